"""Command entry for the notes service."""
from app.service import NoteService
from lib.textfmt import banner


def run():
    service = NoteService()
    service.add("first note")
    print(banner("notes"))
    for line in service.listing():
        print(line)


if __name__ == "__main__":
    run()
