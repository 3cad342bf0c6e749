"""Closed-form moments of the k-clique count X in G(n, m).

Two numeric paths are provided.  The exact path works in ``Fraction`` and is
used automatically while g = n(n-1)/2 <= 10**6; beyond that the float path
works in log space.  Every quantity that depends on m reduces to the
falling-factorial ratio

    R(t) = C(g - t, m - t) / C(g, m) = prod_{i < t} (m - i) / (g - i),

the probability that t fixed vertex pairs are all edges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, lgamma, log
from typing import Optional, Union

EXACT_PAIR_LIMIT = 10**6
_EXACT_LOG_A = 10**6
_EXACT_LOG_SPAN = 2000

Number = Union[Fraction, float]


class MomentError(ValueError):
    pass


@dataclass(frozen=True)
class MomentInputs:
    n: int
    k: int
    m: int

    def __post_init__(self):
        if not 2 <= self.k <= self.n:
            raise MomentError(f"need 2 <= k <= n, got n={self.n}, k={self.k}")
        g = self.n * (self.n - 1) // 2
        if not 0 <= self.m <= g:
            raise MomentError(f"edge count {self.m} outside 0..{g}")

    @property
    def g(self) -> int:
        return self.n * (self.n - 1) // 2

    @property
    def beta(self) -> int:
        return self.k * (self.k - 1) // 2

    @property
    def k_warning(self) -> bool:
        """True when k is well outside the k = O(ln n) regime."""
        return self.k > 3 * math.log(self.n)


@dataclass(frozen=True)
class DerivedParams:
    g: int
    beta: int
    rho: Fraction
    m0: float
    c: Optional[float]

    @property
    def c_defined(self) -> bool:
        return self.c is not None


@dataclass(frozen=True)
class OverlapTerm:
    r: int
    w: int
    term_value: Number


@dataclass(frozen=True)
class VarianceDecomposition:
    ex: Number
    ex2: Number
    var: Number
    a_n: Number
    b_n: Number
    c_n: Number
    ratio: Number
    overlaps: tuple[OverlapTerm, ...] = field(default=())

    def identity_value(self) -> Number:
        return 1 / self.ex + self.a_n * self.b_n + self.c_n - 1


@dataclass(frozen=True)
class CalibrationResult:
    m_star: int
    ex_at_m: Number
    ex_below: Number
    m0: float
    target: float
    probes: int

    @property
    def epsilon(self) -> float:
        return self.m_star - self.m0


@dataclass(frozen=True)
class SurvivalFormula:
    value: float
    raw: Number
    clamped: bool


def _use_exact(g: int, exact: Optional[bool]) -> bool:
    return g <= EXACT_PAIR_LIMIT if exact is None else exact


def threshold_m0(n: int, k: int) -> float:
    """m0 = g * n^(-2/(k-1))."""
    return n * (n - 1) / 2 * n ** (-2 / (k - 1))


def derived_params(inputs: MomentInputs) -> DerivedParams:
    n, k, m = inputs.n, inputs.k, inputs.m
    g = inputs.g
    c = None
    if 0 < m < g:
        c = -(k - 1) * log(m / g) / (2 * log(n))
    return DerivedParams(g=g, beta=inputs.beta, rho=Fraction(2 * m, n * (n - 1)),
                         m0=threshold_m0(n, k), c=c)


def binomial_log(a: int, b: int) -> float:
    """ln C(a, b), with -inf for empty selections (b < 0, b > a or a < 0)."""
    if a < 0 or b < 0 or b > a:
        return -math.inf
    span = min(b, a - b)
    if span <= _EXACT_LOG_SPAN:
        if a <= _EXACT_LOG_A:
            return log(comb(a, b))
        # lgamma(a) loses ~a * eps absolute; the short product does not.
        return math.fsum(log((a - i) / (span - i)) for i in range(span))
    return lgamma(a + 1) - lgamma(b + 1) - lgamma(a - b + 1)


def _binom(a: int, b: int) -> int:
    if a < 0 or b < 0 or b > a:
        return 0
    return comb(a, b)


def edge_ratio_exact(g: int, m: int, t: int) -> Fraction:
    if t < 0 or m < t:
        return Fraction(0)
    out = Fraction(1)
    for i in range(t):
        out *= Fraction(m - i, g - i)
    return out


def edge_ratio_log(g: int, m: int, t: int) -> float:
    if t < 0 or m < t:
        return -math.inf
    # log((m - i)/(g - i)) = log1p(-(g - m)/(g - i)); stays accurate when m ~ g.
    return math.fsum(math.log1p(-(g - m) / (g - i)) for i in range(t))


def _exp(x: float) -> float:
    return 0.0 if x == -math.inf else math.exp(x)


def clique_prob_exact(inputs: MomentInputs, exact: Optional[bool] = None) -> Number:
    """P(a fixed k-set spans a clique) = C(g-beta, m-beta) / C(g, m)."""
    g, m, beta = inputs.g, inputs.m, inputs.beta
    if _use_exact(g, exact):
        return edge_ratio_exact(g, m, beta)
    return _exp(edge_ratio_log(g, m, beta))


def clique_prob_stirling(inputs: MomentInputs) -> float:
    """Stirling form (m/g)^beta * sqrt(1 + beta(g-m)/((m-beta)g)); needs m > beta."""
    g, m, beta = inputs.g, inputs.m, inputs.beta
    if m <= beta:
        raise MomentError(f"Stirling form is singular for m <= beta ({m} <= {beta})")
    return (m / g) ** beta * math.sqrt(1 + beta * (g - m) / ((m - beta) * g))


def expected_cliques(inputs: MomentInputs, exact: Optional[bool] = None) -> Number:
    n, k = inputs.n, inputs.k
    if _use_exact(inputs.g, exact):
        return comb(n, k) * edge_ratio_exact(inputs.g, inputs.m, inputs.beta)
    return _exp(binomial_log(n, k) + edge_ratio_log(inputs.g, inputs.m, inputs.beta))


def _overlap_weights(n: int, k: int, r: int) -> tuple[int, int]:
    """(C(k, r) * C(n-k, k-r), w) for two k-sets sharing r vertices."""
    beta = k * (k - 1) // 2
    return _binom(k, r) * _binom(n - k, k - r), 2 * beta - r * (r - 1) // 2


def overlap_terms(inputs: MomentInputs, exact: Optional[bool] = None) -> tuple[OverlapTerm, ...]:
    """Contributions to E[X^2] from ordered pairs of distinct k-sets, r = 0..k-1."""
    n, k, m, g = inputs.n, inputs.k, inputs.m, inputs.g
    terms = []
    if _use_exact(g, exact):
        nk = comb(n, k)
        for r in range(k):
            weight, w = _overlap_weights(n, k, r)
            terms.append(OverlapTerm(r, w, nk * weight * edge_ratio_exact(g, m, w)))
    else:
        lnk = binomial_log(n, k)
        for r in range(k):
            beta = inputs.beta
            w = 2 * beta - r * (r - 1) // 2
            lw = binomial_log(k, r) + binomial_log(n - k, k - r)
            terms.append(OverlapTerm(r, w, _exp(lnk + lw + edge_ratio_log(g, m, w))))
    return tuple(terms)


def second_moment(inputs: MomentInputs, exact: Optional[bool] = None) -> Number:
    ex = expected_cliques(inputs, exact)
    terms = overlap_terms(inputs, exact)
    if isinstance(ex, Fraction):
        return ex + sum((t.term_value for t in terms), Fraction(0))
    return ex + math.fsum(t.term_value for t in terms)


def variance_decomposition(inputs: MomentInputs,
                           exact: Optional[bool] = None) -> VarianceDecomposition:
    n, k, m, g, beta = inputs.n, inputs.k, inputs.m, inputs.g, inputs.beta
    ex = expected_cliques(inputs, exact)
    if ex == 0:
        raise MomentError("E[X] = 0, the variance ratio is undefined")
    terms = overlap_terms(inputs, exact)
    if _use_exact(g, exact):
        nk = comb(n, k)
        p1 = edge_ratio_exact(g, m, beta)
        a_n = Fraction(_binom(n - k, k) + k * _binom(n - k, k - 1), nk)
        b_n = edge_ratio_exact(g, m, 2 * beta) / p1**2
        c_sum = Fraction(0)
        for r in range(2, k):
            weight, w = _overlap_weights(n, k, r)
            c_sum += weight * edge_ratio_exact(g, m, w)
        c_n = c_sum / (nk * p1**2)
        ex2 = ex + sum((t.term_value for t in terms), Fraction(0))
    else:
        lnk = binomial_log(n, k)
        lp1 = edge_ratio_log(g, m, beta)
        a_n = _exp(binomial_log(n - k, k) - lnk) + k * _exp(binomial_log(n - k, k - 1) - lnk)
        b_n = _exp(edge_ratio_log(g, m, 2 * beta) - 2 * lp1)
        c_n = math.fsum(
            _exp(binomial_log(k, r) + binomial_log(n - k, k - r)
                 + edge_ratio_log(g, m, 2 * beta - r * (r - 1) // 2) - lnk - 2 * lp1)
            for r in range(2, k)
        )
        ex2 = ex + math.fsum(t.term_value for t in terms)
    var = ex2 - ex * ex
    return VarianceDecomposition(ex=ex, ex2=ex2, var=var, a_n=a_n, b_n=b_n, c_n=c_n,
                                 ratio=var / (ex * ex), overlaps=terms)


def calibrate_m(n: int, k: int, target: float,
                exact: Optional[bool] = None) -> CalibrationResult:
    """Smallest integer m with E[X](m) >= target, by binary search on m.

    E[X] is non-decreasing in m, so the bracket [lo, hi] with
    E[X](lo - 1) < target <= E[X](hi) is maintained throughout.
    """
    if target <= 0:
        raise MomentError("calibration target must be positive")
    if target > comb(n, k):
        raise MomentError(f"target {target} exceeds the maximum E[X] = C({n},{k})")
    g = n * (n - 1) // 2
    beta = k * (k - 1) // 2

    def ex_at(m: int) -> Number:
        return expected_cliques(MomentInputs(n, k, m), exact)

    lo, hi = beta, g
    probes = 0
    while lo < hi:
        mid = (lo + hi) // 2
        probes += 1
        if ex_at(mid) >= target:
            hi = mid
        else:
            lo = mid + 1
    ex_star = ex_at(lo)
    ex_below = ex_at(lo - 1) if lo > 0 else 0
    assert ex_below < target <= ex_star
    return CalibrationResult(m_star=lo, ex_at_m=ex_star, ex_below=ex_below,
                             m0=threshold_m0(n, k), target=target, probes=probes)


def survival_probability(inputs: MomentInputs,
                         exact: Optional[bool] = None) -> SurvivalFormula:
    """Chance a k-clique survives a destroy swap, by the inclusion-exclusion form

        [2 C(G-s, M-s) - C(G-2s, M-2s)] / C(G, M),  G = g-beta, M = m-beta, s = k-2.
    """
    g, m, beta, k = inputs.g, inputs.m, inputs.beta, inputs.k
    if m < beta:
        raise MomentError(f"survival formula needs m >= beta ({m} < {beta})")
    big_g, big_m, s = g - beta, m - beta, k - 2
    if _use_exact(g, exact):
        raw: Number = 2 * edge_ratio_exact(big_g, big_m, s) - edge_ratio_exact(big_g, big_m, 2 * s)
    else:
        raw = 2 * _exp(edge_ratio_log(big_g, big_m, s)) - _exp(edge_ratio_log(big_g, big_m, 2 * s))
    value = min(max(float(raw), 0.0), 1.0)
    return SurvivalFormula(value=value, raw=raw, clamped=not 0 <= raw <= 1)


def pxpos_lower_bound(inputs: MomentInputs, exact: Optional[bool] = None) -> Number:
    """Second-moment bound P(X > 0) >= E[X]^2 / E[X^2]; 0 when E[X] = 0."""
    ex = expected_cliques(inputs, exact)
    if ex == 0:
        return 0 * ex
    return ex * ex / second_moment(inputs, exact)


MOMENT_REPORT_KEYS = ("n", "k", "m", "g", "beta", "rho", "m0", "c", "ex", "ex2",
                      "var", "a_n", "b_n", "c_n", "ratio")


def moment_report(inputs: MomentInputs, exact: Optional[bool] = None) -> dict:
    """Flat JSON-ready summary; decomposition fields are None when E[X] = 0."""
    p = derived_params(inputs)
    report = {"n": inputs.n, "k": inputs.k, "m": inputs.m, "g": p.g, "beta": p.beta,
              "rho": float(p.rho), "m0": p.m0, "c": p.c}
    ex = expected_cliques(inputs, exact)
    if ex == 0:
        report.update(ex=0.0, ex2=0.0, var=0.0, a_n=None, b_n=None, c_n=None, ratio=None)
    else:
        d = variance_decomposition(inputs, exact)
        report.update(ex=float(d.ex), ex2=float(d.ex2), var=float(d.var), a_n=float(d.a_n),
                      b_n=float(d.b_n), c_n=float(d.c_n), ratio=float(d.ratio))
    return {key: report[key] for key in MOMENT_REPORT_KEYS}
