"""Sufficient conditions for the quenched CLT, evaluated on a process spec.

Each check sums a nonnegative series explicitly up to some ``K`` and closes
it with a tail bound.  Verdicts:

``holds-analytic``
    the tail bound is a closed form (geometric, exact zero, Lipschitz
    majorant) that certifies convergence;
``holds-numeric``
    partial sums are Cauchy (increase over the last decade of ``K`` below
    1e-6) *and* a power-law comparison bounds the tail;
``fails-numeric``
    the comparison series diverges;
``inconclusive``
    anything else.

Almost-sure series are replaced by their expectations (``L^1`` majorants),
which is stronger; reports name the majorant used.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .fourier import is_excluded
from .martingale import SingularResolventError, resolvent
from .models import (
    FiniteMarkovFn,
    GaussianLRD,
    IteratedRandomFn,
    LinearProcess,
    SpecError,
)
from .reporting import jsonable
from .rng import stream
from .spectral import check_ergodic, contraction_block

HOLDS_ANALYTIC = "holds-analytic"
HOLDS_NUMERIC = "holds-numeric"
FAILS_NUMERIC = "fails-numeric"
INCONCLUSIVE = "inconclusive"

CAUCHY_TOL = 1e-6
DEFAULT_K = 10**6


def _num(x):
    """JSON-safe float."""
    if x is None:
        return None
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return x


@dataclass
class ConditionReport:
    condition_id: str
    verdict: str
    majorant: str = ""
    partial_sums: list = field(default_factory=list)
    tail_bound: float = None
    tail_statement: str = ""
    parameters: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return self.verdict in (HOLDS_ANALYTIC, HOLDS_NUMERIC)

    def to_dict(self) -> dict:
        return {
            "condition_id": self.condition_id,
            "verdict": self.verdict,
            "majorant": self.majorant,
            "evidence": {
                "partial_sums": [[int(k), _num(s)] for k, s in self.partial_sums],
                "tail_bound": _num(self.tail_bound),
                "tail_statement": self.tail_statement,
                **jsonable(self.extra),
            },
            "parameters": jsonable(self.parameters),
        }


# ---------------------------------------------------------------------------
# series machinery
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Tail:
    """Bound on the remainder of a series past its last explicit term."""

    kind: str  # zero | geometric | analytic | comparison | divergent | none
    value: float
    statement: str


def _checkpoints(K: int) -> list:
    pts, d = [], 10
    while d < K:
        pts.append(d)
        d *= 10
    pts.append(K)
    return pts


def partial_sum_table(terms: np.ndarray) -> list:
    """``(K_i, sum of the first K_i terms)`` at decades, compensated summation."""
    K = len(terms)
    out, acc, prev = [], 0.0, 0
    parts = []
    for c in _checkpoints(K):
        parts.append(math.fsum(terms[prev:c]))
        acc = math.fsum(parts)
        out.append((c, acc))
        prev = c
    return out


def _verdict(table: list, tail: Tail) -> str:
    if tail.kind in ("zero", "geometric", "analytic"):
        return HOLDS_ANALYTIC if math.isfinite(tail.value) else INCONCLUSIVE
    if tail.kind == "divergent":
        return FAILS_NUMERIC
    if tail.kind == "comparison":
        if len(table) >= 2 and table[-1][1] - table[-2][1] < CAUCHY_TOL and math.isfinite(tail.value):
            return HOLDS_NUMERIC
        return INCONCLUSIVE
    return INCONCLUSIVE


def series_report(cid: str, terms: np.ndarray, tail: Tail, majorant: str, parameters: dict, **extra) -> ConditionReport:
    terms = np.asarray(terms, dtype=float)
    table = partial_sum_table(terms)
    return ConditionReport(
        cid, _verdict(table, tail), majorant, table, tail.value, tail.statement, parameters, extra
    )


def comparison_sum(C: float, c: float, r: float, sigma: float, k1: int) -> float:
    """Upper bound on ``sum_{k >= k1} C (k+c)^(-r) log(k+c)^sigma`` (``sigma <= 1``).

    Uses ``f(x1) + int_{x1}^inf f`` for the decreasing summand; returns inf
    when the comparison integral diverges.
    """
    if C == 0:
        return 0.0
    x1 = k1 + c
    if x1 <= 1 or (sigma > 0 and math.log(x1) < sigma / max(r, 1e-300)):
        return math.inf
    lg = math.log(x1)
    first = C * x1 ** (-r) * lg**sigma
    if r > 1:
        if sigma <= 0:
            integral = lg**sigma * x1 ** (1 - r) / (r - 1)
        else:
            integral = lg ** (sigma - 1) * x1 ** (1 - r) * (lg / (r - 1) + 1 / (r - 1) ** 2)
    elif r == 1 and sigma < -1:
        integral = lg ** (sigma + 1) / (-sigma - 1)
    else:
        return math.inf
    return first + C * integral


def _geometric_log_sum(r2: float, k1: int) -> float:
    """``sum_{j >= k1} r2^j log j`` via ``log j <= log k1 + (j - k1)/k1``."""
    if r2 == 0:
        return 0.0
    with np.errstate(under="ignore"):
        head = r2 ** float(k1)
    return head * (math.log(k1) / (1 - r2) + r2 / ((1 - r2) ** 2 * k1))


# ---------------------------------------------------------------------------
# linear-process norms
# ---------------------------------------------------------------------------


def _reverse_cumsum(x: np.ndarray) -> np.ndarray:
    return np.cumsum(x[::-1])[::-1]


def linear_past_norms(spec: LinearProcess, K: int) -> np.ndarray:
    """``||E_0 X_k||_2^2 = sigma^2 sum_{j>=k} a_j^2`` for ``k = 1..K`` (upper bounds for power tails)."""
    a = spec.coeffs.values(K + 1)
    T = _reverse_cumsum(a**2) + spec.coeffs.square_tail(K + 1)
    return spec.variance * T[1:]


def _diff_tail(coeffs, k1: int) -> float:
    """Bound on ``sum_{j >= k1} (a_{j+1} - a_j)^2`` for ``k1 >= J``."""
    if coeffs.tail == "none":
        return 0.0
    if coeffs.tail == "geometric":
        r = coeffs.rho
        with np.errstate(under="ignore"):
            return coeffs.scale**2 * (1 - r) ** 2 * r ** (2.0 * k1) / (1 - r * r)
    Cd = _mvt_constant(coeffs)
    return comparison_sum(Cd, coeffs.shift, 2 * coeffs.power + 2, -2 * coeffs.log_power, k1)


def _mvt_constant(coeffs) -> float:
    """``C`` with ``(a_j - a_{j+1})^2 <= C (j+c)^(-2p-2) log(j+c)^(-2q)`` on the power tail."""
    p, q = coeffs.power, coeffs.log_power
    x0 = coeffs.J + coeffs.shift
    slope = p + (q / math.log(x0) if q else 0.0)
    return coeffs.scale**2 * slope**2


def linear_diff_norms(spec: LinearProcess, K: int) -> np.ndarray:
    """``||E_0(X_{k+1} - X_k)||_2^2 = sigma^2 sum_{j>=k} (a_{j+1} - a_j)^2`` for ``k = 1..K``."""
    a = spec.coeffs.values(K + 2)
    d2 = np.diff(a) ** 2  # j = 0..K
    D = _reverse_cumsum(d2) + _diff_tail(spec.coeffs, K + 1)
    return spec.variance * D[1:]


def _kappa(c: float, K: int) -> float:
    """``1/k <= kappa/(k+c)`` for ``k > K``."""
    return max(1.0, (K + 1 + c) / (K + 1))


def _linear_sufcond_tail(spec: LinearProcess, K: int) -> Tail:
    co, s2 = spec.coeffs, spec.variance
    if co.tail == "none" or s2 == 0:
        return Tail("zero", 0.0, f"a_j = 0 for j >= {co.J}: terms vanish beyond k = {co.J}")
    if co.tail == "geometric":
        r2 = co.rho**2
        with np.errstate(under="ignore"):
            v = s2 * co.scale**2 * r2 ** float(K + 1) / ((1 - r2) ** 2 * (K + 1))
        return Tail("geometric", v, "sum_{k>K} sigma^2 s^2 rho^(2k) / (k (1-rho^2)) <= geometric closed form")
    p, q, c = co.power, co.log_power, co.shift
    kap = _kappa(c, K)
    C = s2 * co.scale**2 * kap
    if p == 0.5:
        # sum_{j>=k} a_j^2 <= a_k^2 + s^2 log(k+c)^(1-2q) / (2q-1)
        v = comparison_sum(C, c, 2.0, -2 * q, K + 1) + comparison_sum(C / (2 * q - 1), c, 1.0, 1 - 2 * q, K + 1)
    else:
        v = comparison_sum(C, c, 2 * p + 1, -2 * q, K + 1) + comparison_sum(C / (2 * p - 1), c, 2 * p, -2 * q, K + 1)
    if not math.isfinite(v):
        return Tail("divergent", v, f"comparison series (k+c)^(-{2 * p:g}) log^(-{2 * q:g}) diverges")
    return Tail("comparison", v, f"terms <= C (k+c)^(-{2 * p:g}) log(k+c)^(-{2 * q:g}); integral comparison")


def _linear_cond14_tail(spec: LinearProcess, K: int) -> Tail:
    co, s2 = spec.coeffs, spec.variance
    if co.tail == "none" or s2 == 0:
        return Tail("zero", 0.0, f"differences vanish beyond j = {co.J}")
    if co.tail == "geometric":
        r2 = co.rho**2
        with np.errstate(under="ignore"):
            v = s2 * co.scale**2 * (1 - co.rho) ** 2 * r2 ** float(K + 1) / ((1 - r2) ** 2 * (K + 1))
        return Tail("geometric", v, "sigma^2 s^2 (1-rho)^2 rho^(2k)/(1-rho^2) summed against 1/k")
    p, q, c = co.power, co.log_power, co.shift
    C = s2 * _mvt_constant(co) * _kappa(c, K)
    v = comparison_sum(C, c, 2 * p + 3, -2 * q, K + 1) + comparison_sum(C / (2 * p + 1), c, 2 * p + 2, -2 * q, K + 1)
    return Tail("comparison", v, f"mean-value bound: terms <= C (k+c)^(-{2 * p + 2:g}) log^(-{2 * q:g})")


def _log_weighted_tail(co, C_geo: float, r2: float, C_pow: float, r_pow: float, K: int) -> Tail:
    """Tail of ``sum_{j>K} term_j log j`` for geometric or power terms."""
    if co.tail == "none":
        return Tail("zero", 0.0, f"terms vanish beyond j = {co.J}")
    if co.tail == "geometric":
        v = C_geo * _geometric_log_sum(r2, K + 1)
        return Tail("geometric", v, "geometric terms times log j: closed-form bound")
    q, c = co.log_power, co.shift
    v = comparison_sum(C_pow, c, r_pow, 1 - 2 * q, K + 1)
    if c < 0:
        v += comparison_sum(C_pow * -c, c, r_pow + 1, -2 * q, K + 1)
    if not math.isfinite(v):
        return Tail("divergent", v, "log-weighted comparison series diverges")
    return Tail("comparison", v, f"terms <= C (j+c)^(-{r_pow:g}) log(j+c)^({1 - 2 * q:g})")


# ---------------------------------------------------------------------------
# Markov norms
# ---------------------------------------------------------------------------


def _markov_norm_terms(spec: FiniteMarkovFn, v0: np.ndarray, K: int):
    """``||Q^k v0||^2_{L^2(pi)}`` for ``k = 1..K`` and ``osc(Q^K v0)``."""
    Q, pi = spec.Q, spec.pi
    out = np.zeros(K)
    v = v0.copy()
    v = v - pi @ v  # both callers pass pi-centred vectors; drop roundoff along the constants
    for k in range(K):
        v = Q @ v
        v -= pi @ v
        out[k] = pi @ (v * v)
        if out[k] == 0.0:  # underflow: the remaining terms are exactly zero in floating point
            v = np.zeros_like(v)
            break
    osc = float(v.max() - v.min())
    return out, osc


def _markov_tail(spec: FiniteMarkovFn, osc: float, K: int) -> Tail:
    m, delta = contraction_block(spec.Q)
    v = osc**2 * m / ((1 - delta**2) * (K + 1))
    return Tail(
        "geometric", v,
        f"|Q^k v| <= osc(Q^K v) * {delta:.4g}^floor((k-K)/{m}) (Dobrushin contraction of Q^{m})",
    )


# ---------------------------------------------------------------------------
# conditions 16 / 15 / 14
# ---------------------------------------------------------------------------


def _unsupported(cid: str, spec, reason: str) -> ConditionReport:
    return ConditionReport(cid, INCONCLUSIVE, "", [], None, reason, {"kind": spec.kind})


def check_sufcond(spec, K: int = DEFAULT_K, variant: str = "cond-16") -> ConditionReport:
    """``sum_k ||E_0 X_k||_2^2 / k``; ``variant="cond-15"`` reports it as the majorant of the a.s. series."""
    majorant = (
        "L2 series itself" if variant == "cond-16"
        else "expectation of the a.s. series sum |E_0 X_k|^2/k equals the L2 series"
    )
    if isinstance(spec, LinearProcess):
        terms = linear_past_norms(spec, K) / np.arange(1, K + 1)
        tail = _linear_sufcond_tail(spec, K)
        return series_report(variant, terms, tail, majorant, {"kind": spec.kind, "K": K})
    if isinstance(spec, FiniteMarkovFn):
        check_ergodic(spec)
        norms, osc = _markov_norm_terms(spec, spec.hvec, K)
        terms = norms / np.arange(1, K + 1)
        return series_report(variant, terms, _markov_tail(spec, osc, K), majorant, {"kind": spec.kind, "K": K})
    return _unsupported(variant, spec, f"no analytic ||E_0 X_k|| for {spec.kind}")


def check_cond15(spec, K: int = DEFAULT_K) -> ConditionReport:
    return check_sufcond(spec, K, variant="cond-15")


def check_cond14(spec, K: int = DEFAULT_K) -> ConditionReport:
    """``sum_k |E_0(X_{k+1} - X_k)|^2 / k`` through its expectation."""
    majorant = "expectation: sum_k ||E_0(X_{k+1} - X_k)||_2^2 / k"
    if isinstance(spec, LinearProcess):
        terms = linear_diff_norms(spec, K) / np.arange(1, K + 1)
        return series_report("cond-14", terms, _linear_cond14_tail(spec, K), majorant, {"kind": spec.kind, "K": K})
    if isinstance(spec, FiniteMarkovFn):
        check_ergodic(spec)
        h = spec.hvec
        norms, osc = _markov_norm_terms(spec, spec.Q @ h - h, K)
        terms = norms / np.arange(1, K + 1)
        return series_report("cond-14", terms, _markov_tail(spec, osc, K), majorant, {"kind": spec.kind, "K": K})
    return _unsupported("cond-14", spec, f"no analytic conditional increments for {spec.kind}")


def check_lin23(spec: LinearProcess, K: int = DEFAULT_K) -> ConditionReport:
    """``sum_{j>=2} (a_j - a_{j+1})^2 log j``."""
    co = spec.coeffs
    a = co.values(K + 2)
    j = np.arange(2, K + 1)
    terms = (a[j] - a[j + 1]) ** 2 * np.log(j)
    C_pow = _mvt_constant(co) if co.tail == "power" else 0.0
    C_geo = co.scale**2 * (1 - co.rho) ** 2 if co.tail == "geometric" else 0.0
    tail = _log_weighted_tail(co, C_geo, co.rho**2, C_pow, 2 * co.power + 2, K)
    return series_report("cond-lin23", terms, tail, "deterministic series", {"kind": spec.kind, "K": K, "first_index": 2})


# ---------------------------------------------------------------------------
# condition 18
# ---------------------------------------------------------------------------

MW_TERMS = 4096


def _zeta_tail(K: int) -> float:
    """``sum_{k>K} k^(-3/2) <= 2 / sqrt(K)``."""
    return 2.0 / math.sqrt(K)


def linear_conditional_mean_norms(spec: LinearProcess, t: float, K: int, M: int):
    """``||E_0 S_k(t)||_2^2 = sigma^2 sum_{m>=0} |sum_{j=1}^k exp(ijt) a_{j+m}|^2`` truncated at ``m < M``."""
    a = spec.coeffs.values(M + K + 1)
    P = np.concatenate([[0.0], np.cumsum(a * np.exp(1j * np.arange(M + K + 1) * t))])
    # P[x] = sum_{l < x} exp(ilt) a_l ; inner sum = exp(-imt) (P[m+k+1] - P[m+1])
    base = P[1 : M + 1]
    out = np.empty(K)
    for k in range(1, K + 1):
        d = P[k + 1 : k + M + 1] - base
        out[k - 1] = float(np.sum(d.real**2 + d.imag**2))
    return spec.variance * out


def _linear_uniform_bound(spec: LinearProcess, t: float):
    """``(B, statement)`` with ``||E_0 S_k(t)||_2 <= B`` for all k, or ``(None, reason)``."""
    co, sd = spec.coeffs, spec.innovation.sd
    if sd == 0:
        return 0.0, "zero innovation variance"
    tail1 = co.square_tail(1)
    if tail1 == 0:
        return 0.0, "a_j = 0 for j >= 1, so E_0 S_k = 0"
    gap = abs(1 - np.exp(1j * t))
    if co.is_monotone() and gap > 1e-12:
        B = 2 * sd * math.sqrt(tail1) / gap
        return B, "Abel summation, a nonincreasing: ||E_0 S_k|| <= 2 sigma ||a_{>=1}||_2 / |1 - exp(it)|"
    if co.tail in ("geometric", "none"):
        # |sum_{j=1}^k exp(ijt) a_{j+m}| <= tau_m = sum_{j>m} |a_j|
        J = co.J
        W = J + co.window(1.0, 1e-30) + 2
        absa = np.abs(co.values(W))
        r = abs(co.rho) if co.tail == "geometric" else 0.0
        geo_tail = abs(co.scale) * r**W / (1 - r) if co.tail == "geometric" else 0.0
        tau = _reverse_cumsum(absa)[1:] + geo_tail  # tau_m for m = 0..W-2
        # beyond W: tau_m <= |s| r^(m+1)/(1-r), squares summed in closed form
        extra = (abs(co.scale) * r ** (W) / (1 - r)) ** 2 / (1 - r * r) if co.tail == "geometric" else 0.0
        B = sd * math.sqrt(float(np.sum(tau**2)) + extra)
        return B, "absolute summability: ||E_0 S_k|| <= sigma (sum_m (sum_{j>m}|a_j|)^2)^(1/2)"
    return None, "no uniform bound on ||E_0 S_k(t)|| for this coefficient family"


def check_condMW(spec, t: float, K: int = MW_TERMS) -> ConditionReport:
    """``sum_k k^(-3/2) ||E_0 S_k(t)||_2``."""
    params = {"kind": spec.kind, "t": float(t), "K": K, "excluded_frequency": bool(is_excluded(t))}
    w = np.arange(1, K + 1) ** -1.5
    if isinstance(spec, FiniteMarkovFn):
        try:
            ker = resolvent(spec, t)
        except SingularResolventError as exc:
            return ConditionReport("cond-18", INCONCLUSIVE, "", [], None, str(exc), params)
        pi = spec.pi
        g_norm = math.sqrt(float(pi @ np.abs(ker.g) ** 2))
        norms = np.empty(K)
        Q = spec.Q
        v = Q @ ker.g  # Q^{k+1} g, starting at k = 0
        e1 = np.exp(1j * t)
        for k in range(1, K + 1):
            v = Q @ v
            means = e1 * ker.Qg - np.exp(1j * (k + 1) * t) * v
            norms[k - 1] = math.sqrt(float(pi @ np.abs(means) ** 2))
        B = 2 * g_norm
        tail = Tail("analytic", B * _zeta_tail(K), "||E_0 S_k|| <= 2 ||g||_2 for all k (resolvent route)")
        return series_report(
            "cond-18", w * norms, tail, "exact L2 norms over pi-distributed starts", params,
            uniform_bound=B, g_norm=g_norm, max_norm=float(norms.max()),
            analytic_total=B * float(special.zeta(1.5)), resolvent_residual=ker.residual,
        )
    if isinstance(spec, LinearProcess):
        B, statement = _linear_uniform_bound(spec, t)
        if B is None:
            return ConditionReport("cond-18", INCONCLUSIVE, "", [], None, statement, params)
        try:
            M = min(spec.coeffs.window(max(spec.variance, 1e-300), 1e-16), 1 << 14)
        except SpecError:
            M = 1 << 14
        norms = np.sqrt(linear_conditional_mean_norms(spec, t, K, M))
        tail = Tail("analytic", B * _zeta_tail(K), statement)
        return series_report(
            "cond-18", w * norms, tail, "exact L2 norms (past truncated at certified window)", params,
            uniform_bound=B, max_norm=float(norms.max()), analytic_total=B * float(special.zeta(1.5)),
        )
    return _unsupported("cond-18", spec, f"no analytic E_0 S_k for {spec.kind}")


# ---------------------------------------------------------------------------
# functions of linear processes
# ---------------------------------------------------------------------------

HOLDER_DEFAULTS = {"identity": (1.0, 0.0, 1.0), "square": (1.0, 1.0, 2.0)}


def _observe_linear(observable: str, x):
    return x if observable == "identity" else x * x


def projection_norms_mc(spec: LinearProcess, observable: str, js, n_outer: int, seed: int) -> list:
    """Monte Carlo ``||P_0 Y_j||_2^2`` for ``Y = h(X)`` via two-copy coupling.

    For each outer draw of ``(past, xi_0)`` two independent inner draws of
    ``(future, xi_0')`` give ``Z_i = h(X_j) - h(X_j')`` with ``X_j'`` using
    ``xi_0'`` in place of ``xi_0``; ``E[Z_1 Z_2] = ||E[Z | F_0]||^2 = ||P_0 Y_j||^2``.
    """
    innov = spec.innovation
    W = spec.window()
    rows = []
    for j in js:
        rng = stream(seed, "condition_lab/flin", int(j))
        a = spec.coeffs.values(j + W + 1)
        past = innov.sample(rng, (n_outer, W)) @ a[j + 1 : j + W + 1]
        xi0 = innov.sample(rng, n_outer)
        Z = []
        for _ in range(2):
            fut = innov.sample(rng, (n_outer, j)) @ a[:j][::-1] if j > 0 else np.zeros(n_outer)
            xi0p = innov.sample(rng, n_outer)
            base = past + fut
            Z.append(_observe_linear(observable, base + a[j] * xi0) - _observe_linear(observable, base + a[j] * xi0p))
        prod = Z[0] * Z[1]
        rows.append({
            "j": int(j), "a_j": float(a[j]), "estimate": float(prod.mean()),
            "stderr": float(prod.std(ddof=1) / math.sqrt(n_outer)),
        })
    return rows


def projection_norm_square_normal(spec: LinearProcess, j: int) -> float:
    """Closed form ``||P_0 (X_j^2)||_2^2 = 2 s^4 a_j^4 + 4 s^4 a_j^2 sum_{l>j} a_l^2`` (normal innovations)."""
    s4 = spec.variance**2
    aj = spec.coeffs[j]
    return 2 * s4 * aj**4 + 4 * s4 * aj**2 * spec.coeffs.square_tail(j + 1)


def check_flin(
    spec: LinearProcess, observable: str = "identity", holder=None, K: int = DEFAULT_K,
    mc_js=None, mc_outer: int = 20000, seed: int = 0,
) -> ConditionReport:
    """``sum_{k>=3} a_k^2 log k < inf`` plus the innovation moment of order ``2 v 2gamma v 2beta``."""
    if not isinstance(spec, LinearProcess):
        return _unsupported("cond-flin26", spec, "defined for functions of linear processes")
    if holder is None:
        if observable not in HOLDER_DEFAULTS:
            raise SpecError(f"unknown observable {observable!r}; give Holder parameters", ("observable",))
        holder = HOLDER_DEFAULTS[observable]
    gamma, beta, C = holder
    order = max(2.0, 2 * gamma, 2 * beta)
    moment = spec.innovation.abs_moment(order)
    co = spec.coeffs
    a = co.values(K + 1)
    k = np.arange(3, K + 1)
    terms = a[k] ** 2 * np.log(k)
    tail = _log_weighted_tail(
        co, co.scale**2 if co.tail == "geometric" else 0.0, co.rho**2,
        co.scale**2, 2 * co.power, K,
    )
    extra = {"moment_order": order, "innovation_moment": moment, "holder": {"gamma": gamma, "beta": beta, "C": C}}
    if mc_js is not None:
        rows = projection_norms_mc(spec, observable, mc_js, mc_outer, seed)
        for r in rows:
            r["ratio_to_a_j2"] = r["estimate"] / r["a_j"] ** 2 if r["a_j"] else None
        extra["projection_mc"] = rows
        extra["projection_series_28"] = math.fsum(
            max(r["estimate"], 0.0) * math.log(r["j"]) for r in rows if r["j"] >= 2
        )
    report = series_report(
        "cond-flin26", terms, tail, "deterministic series", {"kind": spec.kind, "observable": observable, "K": K},
        **extra,
    )
    if not math.isfinite(moment) and report.holds:
        report.verdict = INCONCLUSIVE
    return report


# ---------------------------------------------------------------------------
# iterated random functions
# ---------------------------------------------------------------------------


def stationary_draws(spec: IteratedRandomFn, N: int, rng: np.random.Generator) -> np.ndarray:
    x = np.zeros(N)
    for _ in range(spec.burn_in()):
        x = spec.draw_a(rng, N) * x + spec.noise.sample(rng, N)
    return x


def lipschitz_integral_bound(lip: float) -> float:
    """``Lip^2 int_0^{1/2} u / |log u| du = Lip^2 E_1(2 log 2)``."""
    return lip**2 * float(special.exp1(2 * math.log(2)))


def coupling_decay(spec: IteratedRandomFn, N: int, steps: int, seed: int, beta: float = 1.0) -> dict:
    """Fit ``log E|xi_n - xi_n'|^beta`` against ``n`` for two coupled chains."""
    rng = stream(seed, "condition_lab/irf/coupling")
    x = stationary_draws(spec, N, rng)
    y = stationary_draws(spec, N, rng)
    means = []
    for _ in range(steps):
        A = spec.draw_a(rng, N)
        B = spec.noise.sample(rng, N)
        x, y = A * x + B, A * y + B
        means.append(float(np.mean(np.abs(x - y) ** beta)))
    means = np.array(means)
    out = {"beta": beta, "means": means.tolist(), "predicted_rate": spec.lipschitz_moment(beta)}
    if means[0] == 0:
        out.update(coupled_after=1, rate=0.0, r2=1.0, passes=True)
        return out
    pos = np.flatnonzero(means > 0)
    last = pos[-1] + 1 if pos.size else 1
    n = np.arange(1, last + 1)
    logm = np.log(means[:last])
    if last < 3:
        out.update(coupled_after=int(last + 1), rate=0.0, r2=1.0, passes=True)
        return out
    slope, intercept = np.polyfit(n, logm, 1)
    fit = slope * n + intercept
    ss_res = float(np.sum((logm - fit) ** 2))
    ss_tot = float(np.sum((logm - logm.mean()) ** 2))
    r2 = 1 - ss_res / ss_tot if ss_tot > 0 else 1.0
    out.update(coupled_after=None, rate=float(math.exp(slope)), r2=r2, passes=bool(r2 > 0.95 and slope < 0))
    return out


def delta_table(spec: IteratedRandomFn, N: int, seed: int, grid=None) -> dict:
    """``Delta_h(u)^2`` on a log grid and the integral ``int_0^{1/2} Delta^2/(u|log u|) du``.

    The integral is estimated without discretising ``u``: by Fubini it equals
    ``E[(h(xi) - h(xi'))^2 log(|log d| / log 2) 1(d < 1/2)]`` with ``d = |xi - xi'|``.
    """
    rng = stream(seed, "condition_lab/irf/delta")
    x = stationary_draws(spec, N, rng)
    y = stationary_draws(spec, N, rng)
    d = np.abs(x - y)
    w = (spec.observe(x) - spec.observe(y)) ** 2
    grid = np.geomspace(1e-4, 0.5, 16) if grid is None else np.asarray(grid, dtype=float)
    rows = []
    for u in grid:
        v = w * (d < u)
        rows.append({"u": float(u), "delta2": float(v.mean()), "stderr": float(v.std(ddof=1) / math.sqrt(N))})
    inside = (d < 0.5) & (d > 0)
    weight = np.zeros(N)
    weight[inside] = np.log(np.abs(np.log(d[inside])) / math.log(2))
    z = w * weight
    return {
        "grid": rows,
        "integral": float(z.mean()),
        "integral_stderr": float(z.std(ddof=1) / math.sqrt(N)),
        "pairs": N,
    }


def check_irf(spec: IteratedRandomFn, N: int = 20000, seed: int = 0, steps: int = 30) -> tuple:
    """Reports for the contraction conditions and the coupling-function integral."""
    if not isinstance(spec, IteratedRandomFn):
        return (_unsupported("cond-irf20", spec, "not an IRF"), _unsupported("cond-irf21", spec, "not an IRF"))
    beta, r = spec.contraction()
    elog = spec.mean_log_lipschitz()
    noise_moment = spec.noise.abs_moment(beta)
    coupling = coupling_decay(spec, N, steps, seed, beta)
    ok20 = elog < 0 and math.isfinite(noise_moment)
    r20 = ConditionReport(
        "cond-irf20", HOLDS_ANALYTIC if ok20 else FAILS_NUMERIC, "closed-form moments of a finite-law A",
        [], 0.0, "E L^beta, E log L and E d(F(x0, eps), x0)^beta in closed form",
        {"kind": spec.kind, "beta": beta},
        {
            "E_log_L": elog, "E_L_beta": r, "noise_moment_beta": noise_moment,
            "coupling": coupling,
        },
    )
    lip = spec.lipschitz
    bound = lipschitz_integral_bound(lip)
    table = delta_table(spec, N, seed)
    r21 = ConditionReport(
        "cond-irf21", HOLDS_ANALYTIC, "Lipschitz majorant Delta_h(u) <= Lip * u",
        [], bound, f"int_0^(1/2) Delta^2/(u|log u|) <= Lip^2 E_1(2 log 2) = {bound:.6g}",
        {"kind": spec.kind, "observable": spec.observable, "lipschitz": lip},
        {"monte_carlo": table},
    )
    return r20, r21


# ---------------------------------------------------------------------------
# strong mixing for finite chains
# ---------------------------------------------------------------------------


def alpha_tilde(spec: FiniteMarkovFn, k: int) -> float:
    """Exact ``sup_{A in F_0, x} |P(A, X_k > x) - P(A) P(X_k > x)|``.

    By the Markov property the past enters only through ``xi_0``; for a
    fixed event ``B`` the supremum over ``A`` is ``(1/2) sum_i pi_i |P(B|xi_0=i) - P(B)|``.
    """
    Qk = np.linalg.matrix_power(spec.Q, int(k))
    return _alpha_from_power(spec, Qk)


def _alpha_from_power(spec: FiniteMarkovFn, Qk: np.ndarray) -> float:
    pi, h = spec.pi, spec.hvec
    best = 0.0
    for x in np.unique(h):
        ind = (h > x).astype(float)
        if not ind.any():
            continue
        p_i = Qk @ ind
        p = pi @ ind
        best = max(best, 0.5 * float(pi @ np.abs(p_i - p)))
    return best


def upper_quantile(spec: FiniteMarkovFn):
    """Step representation of ``Q(u) = inf{t >= 0 : P(|X_0| > t) <= u}``.

    Returns ``(values, edges)``: ``Q(u) = values[i]`` for ``edges[i] <= u < edges[i+1]``.
    """
    absval = np.abs(spec.hvec)
    vals = np.unique(absval)[::-1]
    probs = np.array([spec.pi[absval == v].sum() for v in vals])
    edges = np.concatenate([[0.0], np.cumsum(probs)])
    return vals, edges


def quantile_square_integral(spec: FiniteMarkovFn, alpha: float) -> float:
    """``int_0^alpha Q(u)^2 du`` exactly."""
    vals, edges = upper_quantile(spec)
    total = 0.0
    for i, v in enumerate(vals):
        lo, hi = edges[i], min(edges[i + 1], alpha)
        if hi > lo:
            total += v * v * (hi - lo)
    return total


def rio_table(spec: FiniteMarkovFn, ks, scale: float = 1.0) -> list:
    """Rows comparing ``||E_0 X_k||_2^2`` with ``2 int_0^{scale * alpha~(k)} Q^2``.

    ``scale = 1`` is the literal form of the bound with the coefficient
    defined above; ``scale = 2`` corresponds to the normalisation
    ``alpha = 2 alpha~`` of the classical covariance inequality.
    """
    rows = []
    for k in ks:
        Qk = np.linalg.matrix_power(spec.Q, int(k))
        v = Qk @ spec.hvec
        lhs = float(spec.pi @ v**2)
        a = _alpha_from_power(spec, Qk)
        rhs = 2.0 * float(quantile_square_integral(spec, min(scale * a, 1.0)))
        rows.append({"k": int(k), "lhs": lhs, "alpha_tilde": a, "rhs": rhs, "holds": bool(lhs <= rhs * (1 + 1e-12) + 1e-15)})
    return rows


def check_mixing(spec: FiniteMarkovFn, K: int = 1000) -> ConditionReport:
    """``sum_k (1/k) int_0^{alpha~(k)} Q^2(u) du`` plus the bounded-h shortcut ``sum alpha~(k)/k``."""
    if not isinstance(spec, FiniteMarkovFn):
        return _unsupported("cond-mix30", spec, "defined for finite chains")
    check_ergodic(spec)
    m, delta = contraction_block(spec.Q)
    alphas = np.zeros(K)
    P = np.eye(spec.m)
    Q = spec.Q
    for k in range(K):
        P = P @ Q
        alphas[k] = _alpha_from_power(spec, P)
    ints = np.array([quantile_square_integral(spec, a) for a in alphas])
    kk = np.arange(1, K + 1)
    hmax2 = float(np.max(np.abs(spec.hvec)) ** 2)
    # alpha~(k) <= (1/2) delta^floor(k/m); int_0^alpha Q^2 <= alpha max h^2
    geo = m * delta ** math.floor((K + 1) / m) / (1 - delta)
    tail_alpha = 0.5 * geo / (K + 1)
    shortcut = series_report(
        "cond-mix30-shortcut", alphas / kk,
        Tail("geometric", tail_alpha, f"alpha~(k) <= (1/2) {delta:.4g}^floor(k/{m})"),
        "bounded h: sum alpha~(k)/k", {},
    )
    monotone = bool(np.all(np.diff(alphas) <= 1e-15))
    return series_report(
        "cond-mix30", ints / kk,
        Tail("geometric", hmax2 * tail_alpha, f"int_0^alpha Q^2 <= alpha max|h|^2, alpha~(k) <= (1/2) {delta:.4g}^floor(k/{m})"),
        "exact alpha~ and quantile integral", {"kind": spec.kind, "K": K},
        alpha_tilde_head=alphas[:10].tolist(), alpha_monotone=monotone,
        shortcut={"verdict": shortcut.verdict, "partial_sums": shortcut.partial_sums, "tail_bound": shortcut.tail_bound},
    )


# ---------------------------------------------------------------------------
# everything applicable to one spec
# ---------------------------------------------------------------------------


class OutOfScopeError(ValueError):
    """The model lies outside every sufficient condition implemented here."""


def check_all(spec, t: float = 1.0, seed: int = 0, K: int = DEFAULT_K) -> list:
    if isinstance(spec, GaussianLRD):
        raise OutOfScopeError(
            "long-range dependent Gaussian model: covariances are not summable, no sufficient condition applies"
        )
    if isinstance(spec, IteratedRandomFn):
        return list(check_irf(spec, seed=seed))
    reports = [check_sufcond(spec, K), check_cond15(spec, K), check_cond14(spec, K), check_condMW(spec, t)]
    if isinstance(spec, LinearProcess):
        reports += [check_lin23(spec, K), check_flin(spec, K=K)]
    else:
        reports.append(check_mixing(spec))
    return reports
