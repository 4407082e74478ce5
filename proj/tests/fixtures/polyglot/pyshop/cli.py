#!/usr/bin/env python3
import argparse

from pyshop.models import Item
from pyshop.store import Store


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--db")
    args = parser.parse_args()
    store = Store(args.db)
    order = store.new_order()
    order.add(Item("a", 3))
    print(store.checkout(order))


if __name__ == "__main__":
    main()
