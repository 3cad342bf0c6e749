"""k-clique phase-transition laboratory for uniform random graphs G(n, m)."""
