"""Order handling for the shop backend."""
