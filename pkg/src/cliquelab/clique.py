"""Exact k-clique search, counting and certificate checks on bitset graphs."""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import Iterator, Optional, Sequence

from .graph import Graph, bits

BRUTE_FORCE_LIMIT = 10**8


class CliqueError(ValueError):
    pass


@dataclass(frozen=True)
class SearchStats:
    nodes_explored: int
    budget_hit: bool


@dataclass(frozen=True)
class SearchResult:
    certificate: Optional[tuple[int, ...]]
    stats: SearchStats

    @property
    def found(self) -> bool:
        return self.certificate is not None

    @property
    def indeterminate(self) -> bool:
        return self.certificate is None and self.stats.budget_hit


class _BudgetExceeded(Exception):
    pass


def _check_k(g: Graph, k: int) -> None:
    if not 1 <= k <= g.n:
        raise CliqueError(f"k must lie in 1..{g.n}, got {k}")


def core_mask(adj: Sequence[int], mask: int, min_degree: int) -> int:
    """Largest subset of ``mask`` where every vertex has >= min_degree
    neighbours inside the subset."""
    if min_degree <= 0:
        return mask
    changed = True
    while changed and mask:
        changed = False
        m = mask
        while m:
            low = m & -m
            v = low.bit_length() - 1
            m ^= low
            if (adj[v] & mask).bit_count() < min_degree:
                mask &= ~low
                changed = True
    return mask


def degeneracy_order(adj: Sequence[int], mask: int) -> list[int]:
    """Repeatedly remove a minimum-degree vertex; ties go to the lowest id."""
    deg = {v: (adj[v] & mask).bit_count() for v in bits(mask)}
    heap = [(d, v) for v, d in deg.items()]
    heapq.heapify(heap)
    alive = mask
    order = []
    while heap:
        d, v = heapq.heappop(heap)
        if not alive >> v & 1 or d != deg[v]:
            continue
        alive &= ~(1 << v)
        order.append(v)
        for w in bits(adj[v] & alive):
            deg[w] -= 1
            heapq.heappush(heap, (deg[w], w))
    return order


def _later_masks(adj: Sequence[int], order: list[int]) -> dict[int, int]:
    later = {}
    remaining = 0
    for v in order:
        remaining |= 1 << v
    for v in order:
        remaining &= ~(1 << v)
        later[v] = adj[v] & remaining
    return later


def find_k_clique(g: Graph, k: int, node_budget: Optional[int] = None) -> SearchResult:
    """Search for a k-clique; stops at the first witness.

    Branch and bound over bitset candidate sets with k-core pruning and a
    pivot maximising |P & N(pivot)|.  ``node_budget`` caps the number of
    search-tree nodes; hitting it gives an indeterminate result.
    """
    _check_k(g, k)
    adj = g.adj
    counter = [0]

    def visit() -> None:
        counter[0] += 1
        if node_budget is not None and counter[0] > node_budget:
            raise _BudgetExceeded

    def extend(chosen: list[int], cand: int, need: int) -> Optional[list[int]]:
        visit()
        if need == 0:
            return chosen
        cand = core_mask(adj, cand, need - 1)
        if cand.bit_count() < need:
            return None
        if need == 1:
            return chosen + [(cand & -cand).bit_length() - 1]
        pivot, best = -1, -1
        for u in bits(cand):
            d = (adj[u] & cand).bit_count()
            if d > best:
                pivot, best = u, d
        branch = cand & ~adj[pivot]
        for v in bits(branch):
            found = extend(chosen + [v], cand & adj[v], need - 1)
            if found is not None:
                return found
            cand &= ~(1 << v)
            if cand.bit_count() < need:
                return None
        return None

    def root() -> Optional[list[int]]:
        # Each clique is found at its earliest vertex in degeneracy order.
        visit()
        core = core_mask(adj, (1 << g.n) - 1, k - 1)
        if k == 1:
            return [0]
        for v, forward in _later_masks(adj, degeneracy_order(adj, core)).items():
            if forward.bit_count() >= k - 1:
                found = extend([v], forward, k - 1)
                if found is not None:
                    return found
        return None

    try:
        found = root()
    except _BudgetExceeded:
        return SearchResult(None, SearchStats(counter[0] - 1, True))
    cert = tuple(sorted(found)) if found is not None else None
    return SearchResult(cert, SearchStats(counter[0], False))


def count_k_cliques(g: Graph, k: int) -> int:
    """Exact number of k-vertex subsets that induce complete subgraphs."""
    _check_k(g, k)
    if k == 1:
        return g.n
    adj = g.adj
    core = core_mask(adj, (1 << g.n) - 1, k - 1)
    later = _later_masks(adj, degeneracy_order(adj, core))

    def count(cand: int, need: int) -> int:
        if need == 1:
            return cand.bit_count()
        if cand.bit_count() < need:
            return 0
        total = 0
        for v in bits(cand):
            total += count(cand & later[v], need - 1)
        return total

    return count(core, k)


def iter_k_cliques(g: Graph, k: int) -> Iterator[tuple[int, ...]]:
    """All k-cliques as sorted tuples, in lexicographic order."""
    _check_k(g, k)
    adj = g.adj
    n = g.n

    def walk(chosen: tuple[int, ...], cand: int, need: int):
        if need == 0:
            yield chosen
            return
        for v in bits(cand):
            rest = cand & adj[v] & ~((2 << v) - 1)
            if rest.bit_count() >= need - 1:
                yield from walk(chosen + (v,), rest, need - 1)

    yield from walk((), (1 << n) - 1, k)


def verify_certificate(g: Graph, cert: Sequence[int]) -> bool:
    if len(set(cert)) != len(cert):
        raise CliqueError(f"certificate {tuple(cert)} repeats a vertex")
    for v in cert:
        if not 0 <= v < g.n:
            raise CliqueError(f"certificate vertex {v} outside 0..{g.n - 1}")
    return all(g.has_edge(u, v) for u, v in combinations(cert, 2))


def brute_force_count(g: Graph, k: int) -> int:
    """Reference count: test every k-subset against the edge set directly."""
    _check_k(g, k)
    if comb(g.n, k) > BRUTE_FORCE_LIMIT:
        raise CliqueError(f"C({g.n},{k}) subsets is too many for the oracle")
    edges = g.edge_set()
    return sum(
        1
        for subset in combinations(range(g.n), k)
        if all(pair in edges for pair in combinations(subset, 2))
    )
