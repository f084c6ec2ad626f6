"""Martingale approximation of Fourier sums.

For a causal linear process the increment attached to time ``k`` is

    D_k(t) = exp(ikt) A(t) xi_k,        A(t) = sum_{j>=0} a_j exp(ijt),

i.e. the projection of the whole future Fourier sum onto the innovation
``xi_k`` (lags ``j >= k``, the current term included).  With this kernel
``S_n - E_0 S_n - M_n`` is the truncation remainder of the transfer sum and
its normalised second moment tends to zero.  The variant that drops ``a_0``
(``strict=True``) is kept for comparison; its gap tends to ``sigma^2 a_0^2``.

For a finite chain with ``X_k = h(xi_k)`` the resolvent ``g`` solves
``g - exp(it) Q g = h`` and

    D_k(t) = exp(ikt) [g(xi_k) - (Qg)(xi_{k-1})],

so that ``S_n - E_0 S_n - M_n = -exp(i(n+1)t) [(Qg)(xi_n) - (Q^{n+1} g)(xi_0)]``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .fourier import dft_many, phases
from .models import (
    STATIONARY,
    FiniteMarkovFn,
    GaussianLRD,
    IteratedRandomFn,
    LinearProcess,
    SpecError,
    _gaussian_conditional,
    check_origin,
    draw_origin,
    linear_past_mean,
    simulate_paths,
    spec_hash,
)
from .rng import derive_seed
from .spectral import transfer_function

#: resolvent declared singular above this condition number
COND_LIMIT = 1e12


class SingularResolventError(ValueError):
    """``I - exp(it) Q`` is numerically singular at the requested frequency."""


@dataclass(frozen=True)
class MartingaleKernel:
    """Everything needed to evaluate ``D_k(t)`` for one model and frequency.

    ``c`` is the linear-process multiplier (``A(t)``, or ``A(t) - a_0`` when
    ``strict``); ``g`` and ``Qg`` are the Markov resolvent vectors.
    """

    kind: str
    t: float
    c: complex = None
    strict: bool = False
    g: np.ndarray = None
    Qg: np.ndarray = None
    residual: float = 0.0
    cond: float = 1.0


def projection_linear(spec: LinearProcess, j: int) -> float:
    """Coefficient of ``xi_0`` in ``P_0 X_j = E_0 X_j - E_{-1} X_j``, i.e. ``a_j``."""
    if j < 0:
        raise ValueError("lag must be >= 0")
    return spec.coeffs[int(j)]


def resolvent(spec: FiniteMarkovFn, t: float) -> MartingaleKernel:
    """Solve ``(I - exp(it) Q) g = h`` with one step of residual refinement."""
    Q, h = spec.Q, spec.hvec.astype(complex)
    M = np.eye(spec.m) - np.exp(1j * t) * Q
    cond = float(np.linalg.cond(M))
    if not math.isfinite(cond) or cond > COND_LIMIT:
        raise SingularResolventError(f"I - exp(it)Q is singular at t={t:.6g} (condition {cond:.3g})")
    g = np.linalg.solve(M, h)
    g = g + np.linalg.solve(M, h - M @ g)
    residual = float(np.max(np.abs(h - M @ g)))
    return MartingaleKernel("markov", float(t), g=g, Qg=Q @ g, residual=residual, cond=cond)


def martingale_kernel(spec, t: float, strict: bool = False) -> MartingaleKernel:
    if isinstance(spec, LinearProcess):
        A = transfer_function(spec.coeffs, t, start=1 if strict else 0)
        return MartingaleKernel("linear", float(t), c=complex(A), strict=strict)
    if isinstance(spec, FiniteMarkovFn):
        return resolvent(spec, t)
    raise SpecError(f"no closed-form martingale kernel for {spec.kind}")


def martingale_difference(spec, t: float, value, k: int = 0, prev=None, kernel: MartingaleKernel = None) -> complex:
    """``D_k(t)`` from the innovation ``xi_k`` (linear) or the states ``(xi_{k-1}, xi_k)`` (Markov)."""
    kernel = kernel or martingale_kernel(spec, t)
    phase = np.exp(1j * k * t)
    if kernel.kind == "linear":
        return complex(phase * kernel.c * value)
    if prev is None:
        raise ValueError("Markov increments need the previous state")
    return complex(phase * (kernel.g[int(value)] - kernel.Qg[int(prev)]))


def martingale_increments(kernel: MartingaleKernel, latent: np.ndarray) -> np.ndarray:
    """Unphased increments ``exp(-ikt) D_k`` for ``k = 1..n`` from a latent batch.

    ``latent`` holds future innovations ``(R, n)`` for linear models or
    states ``xi_0..xi_n`` ``(R, n+1)`` for chains.
    """
    latent = np.atleast_2d(latent)
    if kernel.kind == "linear":
        return kernel.c * latent
    return kernel.g[latent[:, 1:]] - kernel.Qg[latent[:, :-1]]


def martingale_sum(kernel: MartingaleKernel, latent: np.ndarray) -> np.ndarray:
    """``M_n(t) = sum_{k=1}^n D_k(t)`` per replicate."""
    inc = martingale_increments(kernel, latent)
    n = inc.shape[1]
    return inc @ phases(n, [kernel.t])[0]


# ---------------------------------------------------------------------------
# conditional means
# ---------------------------------------------------------------------------


def conditional_means(spec, origin, n: int) -> np.ndarray:
    """``E_0 X_k`` for ``k = 1..n`` given the frozen past."""
    check_origin(spec, origin)
    if isinstance(spec, LinearProcess):
        return linear_past_mean(spec, origin.past_innovations, n)
    if isinstance(spec, FiniteMarkovFn):
        Q = spec.Q
        out = np.empty(n)
        v = spec.hvec
        for k in range(n):
            v = Q @ v
            out[k] = v[origin.state_index]
        return out
    if isinstance(spec, GaussianLRD):
        mean, F = _gaussian_conditional(spec, origin.past_values, n)
        if spec.observable == "identity":
            return mean
        return mean**2 + np.einsum("ij,ij->i", F, F) - 1.0
    if isinstance(spec, IteratedRandomFn):
        if spec.observable != "identity":
            raise SpecError("conditional means of nonlinear IRF observables have no closed form")
        ea = float(np.dot(spec.a_values, spec.a_probs))
        return spec.obs_scale * origin.x0 * ea ** np.arange(1, n + 1)
    raise SpecError(f"unsupported spec type {type(spec).__name__}")


def markov_conditional_mean_S(spec: FiniteMarkovFn, n: int, t: float, kernel: MartingaleKernel = None) -> np.ndarray:
    """``E_x S_n(t)`` for every starting state ``x`` via the resolvent.

    ``E_x S_n = exp(it)(Qg)(x) - exp(i(n+1)t)(Q^{n+1} g)(x)``.
    """
    kernel = kernel or resolvent(spec, t)
    Qn1 = np.linalg.matrix_power(spec.Q, n + 1)
    return np.exp(1j * t) * kernel.Qg - np.exp(1j * (n + 1) * t) * (Qn1 @ kernel.g)


def conditional_mean_S(spec, origin, n: int, t: float) -> complex:
    """``E_0 S_n(t)``: resolvent closed form for chains, direct sum otherwise."""
    check_origin(spec, origin)
    if isinstance(spec, FiniteMarkovFn):
        try:
            return complex(markov_conditional_mean_S(spec, n, t)[origin.state_index])
        except SingularResolventError:
            pass
    means = conditional_means(spec, origin, n)
    return complex(phases(n, [t])[0] @ means)


def telescoping_decomposition(spec, origin, n: int, t: float) -> tuple:
    """Three terms whose sum is ``(1 - exp(it)) E_0 S_n(t)``.

    ``exp(it) E_0 X_1``, ``-exp(it(n+1)) E_0 X_n`` and
    ``sum_{k=1}^{n-1} exp(it(k+1)) E_0(X_{k+1} - X_k)``.
    """
    m = conditional_means(spec, origin, n)
    first = complex(np.exp(1j * t) * m[0])
    last = complex(-np.exp(1j * (n + 1) * t) * m[-1])
    if n > 1:
        middle = complex(phases(n - 1, [t], start=2)[0] @ np.diff(m))
    else:
        middle = 0j
    return first, last, middle


# ---------------------------------------------------------------------------
# Monte Carlo gap
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GapEstimate:
    n: int
    t: float
    gap: float
    stderr: float
    model_hash: str
    seed: int
    replicates: int

    def row(self) -> list:
        return [self.n, self.t, self.gap, self.stderr, self.model_hash, self.seed]


GAP_HEADER = ["n", "t", "gap", "stderr", "model_hash", "seed"]


def gap_residuals(spec, origin, n: int, t: float, replicates: int, seed: int, strict: bool = False) -> np.ndarray:
    """``S_n - E_0 S_n - M_n`` for each quenched replicate."""
    kernel = martingale_kernel(spec, t, strict=strict)
    batch = simulate_paths(spec, n, derive_seed(seed, "martingale_engine/gap"), replicates, origin)
    S = dft_many(batch.values, [t])[:, 0]
    centre = conditional_mean_S(spec, origin, n, t)
    return S - centre - martingale_sum(kernel, batch.latent)


def lemma1_gap(spec, origin, n: int, t: float, replicates: int, seed: int, strict: bool = False) -> GapEstimate:
    """Monte Carlo estimate of ``(1/n) E_0 |S_n - E_0 S_n - M_n|^2`` with its standard error."""
    if replicates < 2:
        raise ValueError("need at least 2 replicates")
    if origin is None or origin == STATIONARY:
        origin = draw_origin(spec, derive_seed(seed, "martingale_engine/origin"))
    r = gap_residuals(spec, origin, n, t, replicates, seed, strict)
    sq = (r.real**2 + r.imag**2) / n
    return GapEstimate(
        int(n), float(t), float(sq.mean()), float(sq.std(ddof=1) / math.sqrt(replicates)),
        spec_hash(spec), int(seed), int(replicates),
    )


def gap_curve(spec, origin, ns, t: float, replicates: int, seed: int, strict: bool = False) -> list:
    return [lemma1_gap(spec, origin, n, t, replicates, seed, strict) for n in ns]


def exact_gap_linear(spec: LinearProcess, n: int, t: float) -> float:
    """``(1/n) sigma^2 sum_{r<n} |sum_{j>r} a_j exp(ijt)|^2``: the gap of the inclusive kernel."""
    A = transfer_function(spec.coeffs, t)
    a = spec.coeffs.values(n)
    partial = np.cumsum(a * np.exp(1j * np.arange(n) * t))
    tails = A - partial
    return float(spec.variance * np.sum(np.abs(tails) ** 2) / n)


def write_gap_csv(path, estimates) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(GAP_HEADER)
        for e in estimates:
            w.writerow([e.n, repr(e.t), repr(e.gap), repr(e.stderr), e.model_hash, e.seed])


__all__ = [
    "COND_LIMIT",
    "GapEstimate",
    "MartingaleKernel",
    "SingularResolventError",
    "conditional_mean_S",
    "conditional_means",
    "exact_gap_linear",
    "gap_curve",
    "lemma1_gap",
    "markov_conditional_mean_S",
    "martingale_difference",
    "martingale_increments",
    "martingale_kernel",
    "martingale_sum",
    "projection_linear",
    "resolvent",
    "telescoping_decomposition",
    "write_gap_csv",
]
