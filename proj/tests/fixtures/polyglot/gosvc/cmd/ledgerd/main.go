package main

import (
	"log"
	"net/http"

	"example.com/gosvc/internal/ledger"
)

func main() {
	srv := &ledger.Server{}
	srv.Post("seed", 100)
	log.Fatal(http.ListenAndServe(":8080", srv.Routes()))
}
