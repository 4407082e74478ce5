import { Priced } from "./types";
import { formatPrice } from "./util/format";

export class Cart {
  items: Priced[] = [];

  add(p: Priced) {
    this.items.push(p);
  }

  total(): string {
    return formatPrice(this.items.reduce((a, p) => a + p.price, 0));
  }
}

export class DiscountCart extends Cart {
  total(): string {
    return "-" + super.total();
  }
}
