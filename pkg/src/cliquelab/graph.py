"""Simple undirected graphs, uniform G(n, m) sampling and DIMACS I/O.

Vertices are 0-based everywhere inside the package; the DIMACS reader and
writer are the only places that shift to 1-based ids.
"""

from __future__ import annotations

from fractions import Fraction
from math import isqrt
from typing import Iterable, Sequence

from .rng import Stream, trial_stream

MAX_VERTICES = 20_000

Edge = tuple[int, int]


class GraphError(ValueError):
    pass


class DimacsError(ValueError):
    pass


class Graph:
    """Immutable simple undirected graph.

    ``edges`` is a sorted tuple of (min, max) pairs and ``adj[v]`` is an int
    bitset of the neighbours of ``v``.
    """

    __slots__ = ("n", "edges", "adj", "_edge_set")

    def __init__(self, n: int, edges: Sequence[Edge], adj: Sequence[int]):
        self.n = n
        self.edges = tuple(edges)
        self.adj = tuple(adj)
        self._edge_set = frozenset(self.edges)

    @property
    def m(self) -> int:
        return len(self.edges)

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.adj[u] >> v & 1)

    def degree(self, v: int) -> int:
        return self.adj[v].bit_count()

    def degrees(self) -> list[int]:
        return [a.bit_count() for a in self.adj]

    def neighbors(self, v: int) -> list[int]:
        return bits(self.adj[v])

    def edge_set(self) -> frozenset[Edge]:
        return self._edge_set

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and self.edges == other.edges

    def __hash__(self) -> int:
        return hash((self.n, self.edges))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


def bits(mask: int) -> list[int]:
    """Indices of set bits, ascending."""
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def _check_n(n: int) -> None:
    if n < 1:
        raise GraphError(f"vertex count must be positive, got {n}")
    if n > MAX_VERTICES:
        raise GraphError(f"vertex count {n} exceeds the {MAX_VERTICES} limit")


def build_graph(n: int, edge_list: Iterable[Edge]) -> Graph:
    _check_n(n)
    adj = [0] * n
    seen: set[Edge] = set()
    for u, v in edge_list:
        if not (0 <= u < n and 0 <= v < n):
            raise GraphError(f"edge ({u}, {v}) has an endpoint outside 0..{n - 1}")
        if u == v:
            raise GraphError(f"self-loop at vertex {u}")
        e = (u, v) if u < v else (v, u)
        if e in seen:
            raise GraphError(f"duplicate edge {e}")
        seen.add(e)
        adj[u] |= 1 << v
        adj[v] |= 1 << u
    return Graph(n, sorted(seen), adj)


def pair_count(n: int) -> int:
    return n * (n - 1) // 2


def index_to_pair(i: int) -> Edge:
    """Unrank edge index i to (u, v), u < v, with i = v(v-1)/2 + u."""
    v = (1 + isqrt(1 + 8 * i)) // 2
    u = i - v * (v - 1) // 2
    return u, v


def pair_to_index(u: int, v: int) -> int:
    if u > v:
        u, v = v, u
    return v * (v - 1) // 2 + u


def sample_edge_indices(g: int, m: int, stream: Stream) -> list[int]:
    """Floyd's algorithm: m distinct indices from 0..g-1, uniform over subsets."""
    chosen: set[int] = set()
    for j in range(g - m, g):
        t = stream.below(j + 1)
        chosen.add(j if t in chosen else t)
    return sorted(chosen)


def sample_gnm(n: int, m: int, seed: int, point_index: int = 0,
               trial_index: int = 0) -> Graph:
    """Uniform sample from G(n, m) on the stream derived from the seed triple."""
    _check_n(n)
    g = pair_count(n)
    if not 0 <= m <= g:
        raise GraphError(f"edge count {m} outside 0..{g} for n={n}")
    stream = trial_stream(seed, point_index, trial_index)
    return graph_from_indices(n, sample_edge_indices(g, m, stream))


def graph_from_indices(n: int, indices: Iterable[int]) -> Graph:
    adj = [0] * n
    edges = []
    for i in indices:
        u, v = index_to_pair(i)
        adj[u] |= 1 << v
        adj[v] |= 1 << u
        edges.append((u, v))
    edges.sort()
    return Graph(n, edges, adj)


def degree_sequence(g: Graph) -> list[int]:
    return sorted(g.degrees(), reverse=True)


def edge_density(g: Graph) -> Fraction:
    if g.n < 2:
        raise GraphError("edge density needs at least two vertices")
    return Fraction(2 * g.m, g.n * (g.n - 1))


def parse_dimacs(data: bytes | str) -> Graph:
    text = data.decode("ascii") if isinstance(data, bytes) else data
    header = None
    endpoints: list[Edge] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        parts = raw.split()
        if not parts or parts[0] == "c":
            continue
        tag = parts[0]
        if tag == "p":
            if header is not None:
                raise DimacsError(f"line {lineno}: duplicate p-line")
            if len(parts) != 4 or parts[1] != "edge":
                raise DimacsError(f"line {lineno}: expected 'p edge <n> <m>'")
            header = (int(parts[2]), int(parts[3]))
        elif tag == "e":
            if header is None:
                raise DimacsError(f"line {lineno}: edge before p-line")
            if len(parts) != 3:
                raise DimacsError(f"line {lineno}: expected 'e <u> <v>'")
            u, v = int(parts[1]), int(parts[2])
            n = header[0]
            if not (1 <= u <= n and 1 <= v <= n):
                raise DimacsError(f"line {lineno}: endpoint out of range 1..{n}")
            endpoints.append((u - 1, v - 1))
        else:
            raise DimacsError(f"line {lineno}: unknown line type {tag!r}")
    if header is None:
        raise DimacsError("missing p-line")
    n, m = header
    if len(endpoints) != m:
        raise DimacsError(f"header declares {m} edges, found {len(endpoints)}")
    try:
        return build_graph(n, endpoints)
    except GraphError as exc:
        raise DimacsError(str(exc)) from exc


def emit_dimacs(g: Graph, comments: Sequence[str] = ()) -> bytes:
    lines = [f"c {c}" if c else "c" for c in comments]
    lines.append(f"p edge {g.n} {g.m}")
    lines.extend(f"e {u + 1} {v + 1}" for u, v in g.edges)
    return ("\n".join(lines) + "\n").encode("ascii")
