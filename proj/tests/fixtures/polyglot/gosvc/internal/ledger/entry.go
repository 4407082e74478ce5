package ledger

// Entry is one booked amount.
type Entry struct {
	Account string
	Cents   int64
}

func NewEntry(account string, cents int64) Entry {
	return Entry{Account: account, Cents: cents}
}
