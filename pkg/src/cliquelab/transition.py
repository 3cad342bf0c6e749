"""Monte Carlo sweeps of the k-clique solvability curve and bound checks.

Every trial draws its graph from the stream derive_seed(seed, point, trial),
so results do not depend on execution order or on the worker count.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import isotonic_regression

from .clique import count_k_cliques, find_k_clique
from .graph import graph_from_indices, pair_count, sample_gnm
from .moments import MomentInputs, calibrate_m, expected_cliques, pxpos_lower_bound, \
    second_moment, threshold_m0

EXHAUSTIVE_LIMIT = 10**6
CSV_HEADER = ("m", "trials", "successes", "fraction", "expected_cliques", "stderr", "mean_nodes")


class TransitionError(ValueError):
    pass


@dataclass(frozen=True)
class SweepConfig:
    n: int
    k: int
    m_grid: tuple[int, ...]
    trials_per_point: int
    seed: int
    node_budget: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "m_grid", tuple(int(m) for m in self.m_grid))
        if list(self.m_grid) != sorted(self.m_grid):
            raise TransitionError("m_grid must be sorted ascending")
        if self.trials_per_point < 1:
            raise TransitionError("trials_per_point must be at least 1")
        g = pair_count(self.n)
        if any(not 0 <= m <= g for m in self.m_grid):
            raise TransitionError(f"grid values must lie in 0..{g}")


@dataclass(frozen=True)
class SweepPoint:
    m: int
    trials: int
    successes: int
    fraction: float
    expected_cliques: float
    stderr: float
    mean_nodes: float
    indeterminate: int = 0


@dataclass(frozen=True)
class SweepResult:
    n: int
    k: int
    seed: int
    points: tuple[SweepPoint, ...]

    @property
    def grid(self) -> list[int]:
        return [p.m for p in self.points]

    @property
    def fractions(self) -> list[float]:
        return [p.fraction for p in self.points]


@dataclass(frozen=True)
class CrossoverEstimate:
    m_half: float
    lower: tuple[int, float]
    upper: tuple[int, float]
    smoothed: tuple[float, ...]
    method: str = "isotonic+linear"


def _stderr(p: float, trials: int) -> float:
    return math.sqrt(p * (1 - p) / trials) if trials else math.nan


def default_grid(n: int, k: int, points: int = 21) -> list[int]:
    """Log-spaced edge counts on [m0/2, 2 * calibrated m], rounded and deduplicated."""
    g = pair_count(n)
    lo = max(threshold_m0(n, k) / 2, 1.0)
    hi = min(2 * calibrate_m(n, k, 0.5).m_star, g)
    grid = np.unique(np.rint(np.geomspace(lo, hi, points)).astype(int))
    return [int(m) for m in grid]


def _run_point(args: tuple) -> tuple[int, int, int, int]:
    n, k, m, trials, seed, index, budget = args
    successes = indeterminate = nodes = 0
    for t in range(trials):
        g = sample_gnm(n, m, seed, index, t)
        res = find_k_clique(g, k, budget)
        nodes += res.stats.nodes_explored
        if res.indeterminate:
            indeterminate += 1
        elif res.found:
            successes += 1
    return successes, indeterminate, nodes, trials


def run_sweep(config: SweepConfig, workers: int = 1) -> SweepResult:
    tasks = [(config.n, config.k, m, config.trials_per_point, config.seed, i, config.node_budget)
             for i, m in enumerate(config.m_grid)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_point, tasks))
    else:
        outcomes = [_run_point(t) for t in tasks]
    points = []
    for m, (succ, indet, nodes, total) in zip(config.m_grid, outcomes):
        counted = total - indet
        frac = succ / counted if counted else math.nan
        points.append(SweepPoint(
            m=m, trials=counted, successes=succ, fraction=frac,
            expected_cliques=float(expected_cliques(MomentInputs(config.n, config.k, m))),
            stderr=_stderr(frac, counted), mean_nodes=nodes / total, indeterminate=indet))
    return SweepResult(config.n, config.k, config.seed, tuple(points))


def isotonic_fractions(result: SweepResult) -> list[float]:
    """Non-decreasing least-squares fit of the fractions, weighted by trials."""
    pts = [p for p in result.points if p.trials > 0]
    if not pts:
        return []
    fit = isotonic_regression([p.fraction for p in pts], weights=[p.trials for p in pts],
                              increasing=True)
    return [float(x) for x in fit.x]


def estimate_crossover(result: SweepResult, level: float = 0.5) -> CrossoverEstimate:
    pts = [p for p in result.points if p.trials > 0]
    smooth = isotonic_fractions(result)
    for i in range(len(pts) - 1):
        y0, y1 = smooth[i], smooth[i + 1]
        if y0 < level <= y1:
            m0, m1 = pts[i].m, pts[i + 1].m
            m_half = m0 + (level - y0) * (m1 - m0) / (y1 - y0)
            return CrossoverEstimate(m_half, (m0, y0), (m1, y1), tuple(smooth))
    if pts and smooth[0] == level:
        return CrossoverEstimate(float(pts[0].m), (pts[0].m, level), (pts[0].m, level),
                                 tuple(smooth))
    raise TransitionError(f"smoothed curve never crosses {level}")


def monotone_violations(result: SweepResult) -> list[tuple[int, float]]:
    """Adjacent raw decreases, as (index, drop / combined stderr)."""
    out = []
    for i, (a, b) in enumerate(zip(result.points, result.points[1:])):
        if b.fraction < a.fraction:
            sigma = math.hypot(a.stderr, b.stderr)
            out.append((i, (a.fraction - b.fraction) / sigma if sigma else math.inf))
    return out


# -- exhaustive mode ---------------------------------------------------------

def enumeration_size(n: int, m: int) -> int:
    return comb(pair_count(n), m)


def exact_count_distribution(n: int, k: int, m: int) -> dict[int, int]:
    """Histogram of the k-clique count over all C(g, m) graphs."""
    total = enumeration_size(n, m)
    if total > EXHAUSTIVE_LIMIT:
        raise TransitionError(f"C(g, m) = {total} graphs is too many to enumerate")
    hist: dict[int, int] = {}
    for idx in combinations(range(pair_count(n)), m):
        x = count_k_cliques(graph_from_indices(n, idx), k)
        hist[x] = hist.get(x, 0) + 1
    return dict(sorted(hist.items()))


def _sampled_counts(n: int, k: int, m: int, trials: int, seed: int) -> dict[int, int]:
    hist: dict[int, int] = {}
    for t in range(trials):
        x = count_k_cliques(sample_gnm(n, m, seed, 0, t), k)
        hist[x] = hist.get(x, 0) + 1
    return dict(sorted(hist.items()))


@dataclass(frozen=True)
class BoundCheckReport:
    n: int
    k: int
    m: int
    mode: str
    trials: int
    p_ge1: float
    p_zero: float
    p_one: float
    ex: float
    ratio: Optional[float]
    pxpos_bound: float
    stderr_ge1: float
    stderr_one: float
    markov_margin: float
    pz_margin: float
    markov_margin_sigma: Optional[float]
    pz_margin_sigma: Optional[float]
    histogram: dict = field(default_factory=dict)

    @property
    def markov_holds(self) -> bool:
        """P(X >= 1) <= min(1, E[X]), within 3 standard errors when sampled."""
        return self.markov_margin >= -3 * self.stderr_ge1

    @property
    def second_moment_holds(self) -> bool:
        return self.pz_margin >= -3 * self.stderr_ge1

    def to_dict(self) -> dict:
        d = asdict(self)
        d["histogram"] = {str(x): c for x, c in self.histogram.items()}
        return d


def _sigma_units(margin: float, sigma: float) -> Optional[float]:
    return margin / sigma if sigma > 0 else None


def _bound_report(n: int, k: int, m: int, hist: dict[int, int], mode: str) -> BoundCheckReport:
    inputs = MomentInputs(n, k, m)
    total = sum(hist.values())
    zero = hist.get(0, 0)
    one = hist.get(1, 0)
    if mode == "exhaustive":
        p_ge1 = Fraction(total - zero, total)
        p_one = Fraction(one, total)
        se_ge1 = se_one = 0.0
    else:
        p_ge1 = (total - zero) / total
        p_one = one / total
        se_ge1, se_one = _stderr(p_ge1, total), _stderr(p_one, total)
    ex = expected_cliques(inputs)
    bound = pxpos_lower_bound(inputs)
    ratio = None
    if ex > 0:
        ratio = float((second_moment(inputs) - ex * ex) / (ex * ex))
    # Margins are taken in the exact path where available, then rounded.
    markov = min(1, ex) - p_ge1
    pz = p_ge1 - bound
    return BoundCheckReport(
        n=n, k=k, m=m, mode=mode, trials=total, p_ge1=float(p_ge1), p_zero=float(1 - p_ge1),
        p_one=float(p_one), ex=float(ex), ratio=ratio, pxpos_bound=float(bound),
        stderr_ge1=se_ge1, stderr_one=se_one, markov_margin=float(markov),
        pz_margin=float(pz), markov_margin_sigma=_sigma_units(float(markov), se_ge1),
        pz_margin_sigma=_sigma_units(float(pz), se_ge1), histogram=hist)


def _pick_mode(n: int, m: int, exhaustive: Optional[bool]) -> bool:
    return enumeration_size(n, m) <= EXHAUSTIVE_LIMIT if exhaustive is None else exhaustive


def check_bounds(n: int, k: int, m: int, trials: int, seed: int,
                 exhaustive: Optional[bool] = None) -> BoundCheckReport:
    """Empirical P(X >= 1), P(X = 0), P(X = 1) against the moment bounds.

    With ``exhaustive`` unset, every graph is enumerated whenever
    C(g, m) <= 10**6 and ``trials``/``seed`` are ignored.
    """
    if _pick_mode(n, m, exhaustive):
        return _bound_report(n, k, m, exact_count_distribution(n, k, m), "exhaustive")
    if trials < 100:
        raise TransitionError("sampled bound checks need at least 100 trials")
    return _bound_report(n, k, m, _sampled_counts(n, k, m, trials, seed), "sampled")


def calibrated_distribution(n: int, k: int, trials: int, seed: int,
                            exhaustive: Optional[bool] = None) -> BoundCheckReport:
    """check_bounds at the smallest m with E[X] >= 1/2."""
    m = calibrate_m(n, k, 0.5).m_star
    if not _pick_mode(n, m, exhaustive) and trials < 1000:
        raise TransitionError("calibrated distribution needs at least 1000 trials")
    return check_bounds(n, k, m, trials, seed, exhaustive)


# -- near-independence of candidate solutions ---------------------------------

@dataclass(frozen=True)
class PairFrequency:
    sigma: tuple[int, ...]
    tau: tuple[int, ...]
    f_sigma: float
    f_tau: float
    f_both: float
    stderr_both: float

    @property
    def deviation(self) -> float:
        return self.f_both - self.f_sigma * self.f_tau

    @property
    def within_3_sigma(self) -> bool:
        return abs(self.deviation) <= 3 * self.stderr_both


def disjoint_pairs(n: int, k: int, count: int) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Deterministic disjoint k-set pairs: pair j covers 2k consecutive ids mod n."""
    if 2 * k > n:
        raise TransitionError("two disjoint k-sets need n >= 2k")
    pairs = []
    for j in range(count):
        base = j * 2 * k
        block = [(base + i) % n for i in range(2 * k)]
        pairs.append((tuple(sorted(block[:k])), tuple(sorted(block[k:]))))
    return pairs


def independence_check(n: int, k: int, m: int, trials: int, seed: int,
                       pair_count_: int = 50) -> list[PairFrequency]:
    """Joint vs product clique frequencies for fixed disjoint k-set pairs."""
    pairs = disjoint_pairs(n, k, pair_count_)
    masks = [(sum(1 << v for v in s), sum(1 << v for v in t)) for s, t in pairs]
    hits = np.zeros((len(pairs), 3), dtype=np.int64)

    def is_clique(adj, vs, mask):
        return all((adj[v] | (1 << v)) & mask == mask for v in vs)

    for t in range(trials):
        adj = sample_gnm(n, m, seed, 0, t).adj
        for j, ((s, tau), (ms, mt)) in enumerate(zip(pairs, masks)):
            a = is_clique(adj, s, ms)
            b = is_clique(adj, tau, mt)
            hits[j] += (a, b, a and b)
    out = []
    for (s, tau), (hs, ht, hb) in zip(pairs, hits.tolist()):
        fb = hb / trials
        out.append(PairFrequency(s, tau, hs / trials, ht / trials, fb, _stderr(fb, trials)))
    return out


# -- report export -----------------------------------------------------------

def _point_row(p: SweepPoint) -> dict:
    return {key: getattr(p, key) for key in CSV_HEADER}


def export_report(result: SweepResult, fmt: str = "csv") -> bytes:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for p in result.points:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in _point_row(p).values()])
        return buf.getvalue().encode("ascii")
    if fmt == "json":
        doc = {"n": result.n, "k": result.k, "seed": result.seed,
               "points": [_point_row(p) for p in result.points],
               "indeterminate": [p.indeterminate for p in result.points]}
        return (json.dumps(doc, indent=2) + "\n").encode("ascii")
    raise TransitionError(f"unknown report format {fmt!r}")


def parse_report(data: bytes) -> SweepResult:
    """Inverse of ``export_report(result, "json")``."""
    doc = json.loads(data)
    indet = doc.get("indeterminate") or [0] * len(doc["points"])
    points = tuple(SweepPoint(**row, indeterminate=i) for row, i in zip(doc["points"], indet))
    return SweepResult(doc["n"], doc["k"], doc["seed"], points)
