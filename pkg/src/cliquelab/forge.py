"""Degree-preserving 2-edge swaps that destroy or create a k-clique, and
generation of verified yes/no instance pairs."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Optional, Sequence

from .clique import count_k_cliques, find_k_clique, iter_k_cliques, verify_certificate
from .graph import Edge, Graph, bits, build_graph, degree_sequence, emit_dimacs, sample_gnm
from .moments import MomentInputs, calibrate_m, survival_probability


class SwapError(ValueError):
    pass


class ForgeError(RuntimeError):
    pass


def _norm(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class SwapMove:
    """Remove two edges and add two, touching the same four vertices.

    destroy: actors (u, u', v, v'); removes (u,u'), (v,v'); adds (u,v), (u',v').
    create:  actors (u, u', v, v'); removes (u,v'), (u',v); adds (u,u'), (v,v').
    """

    removed: tuple[Edge, Edge]
    added: tuple[Edge, Edge]
    direction: str
    actors: tuple[int, int, int, int]

    @classmethod
    def destroy(cls, u: int, u2: int, v: int, v2: int) -> "SwapMove":
        return cls((_norm(u, u2), _norm(v, v2)), (_norm(u, v), _norm(u2, v2)),
                   "destroy", (u, u2, v, v2))

    @classmethod
    def create(cls, u: int, u2: int, v: int, v2: int) -> "SwapMove":
        return cls((_norm(u, v2), _norm(u2, v)), (_norm(u, u2), _norm(v, v2)),
                   "create", (u, u2, v, v2))

    def inverse(self) -> "SwapMove":
        u, u2, v, v2 = self.actors
        if self.direction == "destroy":
            return SwapMove.create(u, u2, v2, v)
        return SwapMove.destroy(u, u2, v2, v)

    def to_dict(self, one_based: bool = True) -> dict:
        s = 1 if one_based else 0
        return {
            "direction": self.direction,
            "actors": dict(zip(("u", "u_prime", "v", "v_prime"), (a + s for a in self.actors))),
            "removed": [[a + s, b + s] for a, b in self.removed],
            "added": [[a + s, b + s] for a, b in self.added],
        }


def check_move(g: Graph, move: SwapMove) -> None:
    if len(set(move.actors)) != 4:
        raise SwapError(f"swap actors {move.actors} are not four distinct vertices")
    for u, v in move.removed:
        if not g.has_edge(u, v):
            raise SwapError(f"removed edge {(u, v)} is not in the graph")
    for u, v in move.added:
        if g.has_edge(u, v):
            raise SwapError(f"added edge {(u, v)} is already in the graph")
    out = Counter(x for e in move.removed for x in e)
    into = Counter(x for e in move.added for x in e)
    if out != into:
        raise SwapError("swap does not preserve degrees")


def apply_swap(g: Graph, move: SwapMove) -> Graph:
    check_move(g, move)
    edges = (g.edge_set() - set(move.removed)) | set(move.added)
    h = build_graph(g.n, edges)
    assert degree_sequence(h) == degree_sequence(g) and h.m == g.m
    return h


@dataclass
class ForgeReport:
    attempts: int = 0
    candidates_examined: int = 0
    survival_events: int = 0
    status: str = "pending"


def destroy_candidates(g: Graph, cert: Sequence[int]):
    """Structurally valid destroy moves in the documented deterministic order.

    Clique edges (u, u') lexicographic, then non-clique edges (v, v')
    lexicographic, then the two orientations of (v, v').
    """
    clique_edges = list(combinations(sorted(cert), 2))
    inside = set(clique_edges)
    others = [e for e in g.edges if e not in inside]
    for u, u2 in clique_edges:
        for a, b in others:
            for v, v2 in ((a, b), (b, a)):
                if len({u, u2, v, v2}) < 4:
                    continue
                if g.has_edge(u, v) or g.has_edge(u2, v2):
                    continue
                yield SwapMove.destroy(u, u2, v, v2)


def find_destroy_swap(g: Graph, cert: Sequence[int], max_candidates: Optional[int] = None
                      ) -> tuple[Optional[SwapMove], ForgeReport]:
    """First destroy move after which no k-clique remains (k = len(cert))."""
    k = len(cert)
    if not verify_certificate(g, cert):
        raise SwapError(f"{tuple(cert)} is not a clique of the graph")
    report = ForgeReport(attempts=1)
    for move in destroy_candidates(g, cert):
        if max_candidates is not None and report.candidates_examined >= max_candidates:
            report.status = "cap"
            return None, report
        report.candidates_examined += 1
        if find_k_clique(apply_swap(g, move), k).found:
            report.survival_events += 1
            continue
        report.status = "ok"
        return move, report
    report.status = "exhausted"
    return None, report


def create_candidates(g: Graph, k: int):
    adj = g.adj
    for s in iter_k_cliques(g, k - 1):
        s_mask = sum(1 << x for x in s)
        for u2 in s:
            rest = s_mask & ~(1 << u2)
            for u in range(g.n):
                if s_mask >> u & 1 or adj[u] & rest != rest or adj[u] >> u2 & 1:
                    continue
                for v in bits(adj[u2] & ~s_mask & ~(1 << u)):
                    for v2 in bits(adj[u] & ~s_mask & ~(1 << v) & ~adj[v]):
                        yield SwapMove.create(u, u2, v, v2)


def find_create_swap(g: Graph, k: int, max_candidates: Optional[int] = None
                     ) -> tuple[Optional[SwapMove], ForgeReport]:
    """First create move whose result contains a k-clique.

    Searches (k-1)-cliques S lexicographically, then u' in S, a vertex u
    outside S adjacent to all of S minus u' but not to u', then v in N(u')
    and v' in N(u), both outside S, with (v, v') absent.
    """
    if find_k_clique(g, k).found:
        raise SwapError("graph already contains a k-clique")
    report = ForgeReport(attempts=1)
    for move in create_candidates(g, k):
        if max_candidates is not None and report.candidates_examined >= max_candidates:
            report.status = "cap"
            return None, report
        report.candidates_examined += 1
        if find_k_clique(apply_swap(g, move), k).found:
            report.status = "ok"
            return move, report
    report.status = "exhausted"
    return None, report


@dataclass(frozen=True)
class InstancePair:
    yes_graph: Graph
    no_graph: Graph
    k: int
    swap: SwapMove  # maps no_graph to yes_graph
    seed: int
    retries_used: int
    certificate: tuple[int, ...]


@dataclass
class PairVerification:
    checks: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())


def forge_pair(n: int, k: int, seed: int, sample_retries: int = 200,
               swap_retries: int = 10_000) -> tuple[InstancePair, ForgeReport]:
    """Sample G(n, m*) at E[X] = 1/2 until exactly one k-clique appears, then
    break it with the first destroy swap that leaves the graph clique-free."""
    if n < k + 2:
        raise ForgeError("n must be at least k + 2")
    if sample_retries < 1 or swap_retries < 1:
        raise ForgeError("retry caps must be positive")
    m = calibrate_m(n, k, 0.5).m_star
    report = ForgeReport()
    for attempt in range(sample_retries):
        report.attempts = attempt + 1
        g = sample_gnm(n, m, seed, 0, attempt)
        if count_k_cliques(g, k) != 1:
            continue
        cert = find_k_clique(g, k).certificate
        move, sub = find_destroy_swap(g, cert, swap_retries)
        report.candidates_examined += sub.candidates_examined
        report.survival_events += sub.survival_events
        if move is None:
            report.status = "no_swap"
            raise ForgeError(f"no clique-free destroy swap within {swap_retries} candidates "
                             f"(sample attempt {attempt})")
        no_graph = apply_swap(g, move)
        report.status = "ok"
        pair = InstancePair(yes_graph=g, no_graph=no_graph, k=k, swap=move.inverse(),
                            seed=seed, retries_used=attempt, certificate=cert)
        return pair, report
    report.status = "sample_cap"
    raise ForgeError(f"no graph with exactly one {k}-clique in {sample_retries} samples")


def verify_pair(pair: InstancePair) -> PairVerification:
    yes, no, k = pair.yes_graph, pair.no_graph, pair.k
    checks = {
        "n_equal": yes.n == no.n,
        "m_equal": yes.m == no.m,
        "degrees_equal": degree_sequence(yes) == degree_sequence(no),
    }
    try:
        checks["yes_has_clique"] = (len(pair.certificate) == k
                                    and verify_certificate(yes, pair.certificate))
    except ValueError:
        checks["yes_has_clique"] = False
    checks["no_clique_free"] = not find_k_clique(no, k).found
    try:
        checks["swap_maps_no_to_yes"] = apply_swap(no, pair.swap) == yes
    except ValueError:
        checks["swap_maps_no_to_yes"] = False
    return PairVerification(checks)


def pair_metadata(pair: InstancePair, report: ForgeReport,
                  verification: PairVerification) -> dict:
    return {
        "n": pair.yes_graph.n,
        "m": pair.yes_graph.m,
        "k": pair.k,
        "seed": pair.seed,
        "swap": pair.swap.to_dict(),
        "certificate": [v + 1 for v in pair.certificate],
        "retries": pair.retries_used,
        "candidates_examined": report.candidates_examined,
        "survival_events": report.survival_events,
        "verification": verification.checks,
    }


def write_pair(pair: InstancePair, report: ForgeReport, stem: str | Path) -> list[Path]:
    """Write <stem>_yes.col, <stem>_no.col and <stem>_meta.json."""
    stem = Path(stem)
    verification = verify_pair(pair)
    head = [f"k = {pair.k}", f"seed = {pair.seed}"]
    paths = [stem.with_name(stem.name + s) for s in ("_yes.col", "_no.col", "_meta.json")]
    paths[0].write_bytes(emit_dimacs(pair.yes_graph, head + ["contains a k-clique"]))
    paths[1].write_bytes(emit_dimacs(pair.no_graph, head + ["contains no k-clique"]))
    meta = pair_metadata(pair, report, verification)
    paths[2].write_text(json.dumps(meta, indent=2) + "\n")
    return paths


@dataclass(frozen=True)
class SurvivalEstimate:
    n: int
    k: int
    m: int
    trials: int
    survived: int
    samples_drawn: int
    formula: float
    condition: str

    @property
    def rate(self) -> float:
        return self.survived / self.trials


SURVIVAL_CONDITIONS = ("unique", "any")


def _survival_trial(n: int, k: int, m: int, seed: int, trial: int, condition: str,
                    sample_retries: int) -> tuple[Optional[bool], int]:
    for attempt in range(sample_retries):
        g = sample_gnm(n, m, seed, trial, attempt)
        if condition == "unique":
            if count_k_cliques(g, k) != 1:
                continue
            cert = find_k_clique(g, k).certificate
        else:
            cert = find_k_clique(g, k).certificate
            if cert is None:
                continue
        move = next(destroy_candidates(g, cert), None)
        if move is None:
            continue
        return find_k_clique(apply_swap(g, move), k).found, attempt + 1
    return None, sample_retries


def estimate_survival(n: int, k: int, m: int, trials: int, seed: int,
                      condition: str = "unique", sample_retries: int = 200) -> SurvivalEstimate:
    """Empirical rate at which a k-clique remains after the first structurally
    valid destroy swap, next to the closed-form survival probability.

    ``condition="unique"`` samples graphs with exactly one k-clique (the
    setting of the destroy construction); ``"any"`` accepts any graph with at
    least one, so pre-existing extra cliques also count as survivals.
    """
    if trials < 100:
        raise ForgeError("survival estimates need at least 100 trials")
    if condition not in SURVIVAL_CONDITIONS:
        raise ForgeError(f"condition must be one of {SURVIVAL_CONDITIONS}")
    survived = drawn = 0
    for t in range(trials):
        outcome, used = _survival_trial(n, k, m, seed, t, condition, sample_retries)
        drawn += used
        if outcome is None:
            raise ForgeError(f"trial {t}: no suitable {k}-clique graph in {sample_retries} draws")
        survived += outcome
    formula = survival_probability(MomentInputs(n, k, m)).value
    return SurvivalEstimate(n, k, m, trials, survived, drawn, formula, condition)
