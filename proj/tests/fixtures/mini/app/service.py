"""Note bookkeeping on top of the store."""
from app.store import MemoryStore
from lib.textfmt import bullet


class NoteService:
    def __init__(self):
        self.store = MemoryStore()

    def add(self, text):
        return self.store.put(text.strip())

    def listing(self):
        return [bullet(n) for n in self.store.items()]
