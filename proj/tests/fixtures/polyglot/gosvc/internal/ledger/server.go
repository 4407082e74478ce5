package ledger

import (
	"fmt"
	"net/http"
)

type Server struct {
	Book
}

func (s *Server) handleBalance(w http.ResponseWriter, r *http.Request) {
	fmt.Fprintf(w, "%d", s.Balance(r.URL.Query().Get("account")))
}

func (s *Server) Routes() *http.ServeMux {
	mux := http.NewServeMux()
	mux.HandleFunc("/balance", s.handleBalance)
	return mux
}
