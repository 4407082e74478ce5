package ledger

import "sync"

type Book struct {
	mu      sync.Mutex
	entries []Entry
}

func (b *Book) Post(account string, cents int64) {
	b.mu.Lock()
	defer b.mu.Unlock()
	b.entries = append(b.entries, NewEntry(account, cents))
}

func (b *Book) Balance(account string) int64 {
	var sum int64
	for _, e := range b.entries {
		if e.Account == account {
			sum += e.Cents
		}
	}
	return sum
}
