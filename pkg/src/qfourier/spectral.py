"""Exact second-order quantities: covariances, spectral densities, Var S_n(t).

These are the ground truth the Monte Carlo experiments are compared against.
Spectral densities use the normalisation

    cov(X_0, X_j) = int_0^{2 pi} exp(i j s) f(s) ds,

so white noise with unit variance has ``f = 1 / (2 pi)`` and
``E|S_n(t)|^2 / n -> 2 pi f(t)``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .models import (
    Coefficients,
    FiniteMarkovFn,
    GaussianLRD,
    LinearProcess,
    SpecError,
)

TWO_PI = 2.0 * math.pi
DENSITY_TOL = 1e-10


class NonSummableError(ValueError):
    """The covariance series does not converge absolutely; no density is reported."""


@dataclass(frozen=True)
class SpectralEstimate:
    t: float
    f: float
    sigma2: float
    method: str


# ---------------------------------------------------------------------------
# linear processes
# ---------------------------------------------------------------------------


def transfer_function(coeffs: Coefficients, t: float, start: int = 0) -> complex:
    """``sum_{j >= start} a_j exp(i j t)`` in closed form.

    Geometric tails are summed exactly; power tails without a log factor go
    through the Lerch transcendent.  Log-power tails have no closed form and
    raise :class:`NonSummableError`.
    """
    J = coeffs.J
    head = 0j
    if start < J:
        j = np.arange(start, J)
        head = complex(np.sum(np.asarray(coeffs.prefix[start:]) * np.exp(1j * j * t)))
    first = max(start, J)
    if coeffs.tail == "none":
        return head
    if coeffs.tail == "geometric":
        z = coeffs.rho * np.exp(1j * t)
        return head + coeffs.scale * z**first / (1 - z)
    if coeffs.log_power:
        raise NonSummableError("log-power coefficient tails have no closed-form transfer function")
    if math.cos(t) >= 1.0 - 1e-15 and coeffs.power <= 1:
        raise NonSummableError("transfer sum diverges at t = 0 for power <= 1")
    with mpmath.workdps(30):
        z = mpmath.exp(1j * mpmath.mpf(t))
        tail = mpmath.lerchphi(z, coeffs.power, first + coeffs.shift) * z**first
        tail = complex(tail)
    return head + coeffs.scale * tail


def spectral_density_linear(spec: LinearProcess, t: float) -> SpectralEstimate:
    """``f(t) = sigma^2 / (2 pi) |sum_j a_j exp(ijt)|^2``."""
    A = transfer_function(spec.coeffs, t)
    f = float(spec.variance * (A.real**2 + A.imag**2) / TWO_PI)
    return SpectralEstimate(float(t), f, TWO_PI * f, "analytic")


# ---------------------------------------------------------------------------
# finite Markov chains
# ---------------------------------------------------------------------------


def dobrushin(Q: np.ndarray) -> float:
    """Dobrushin contraction coefficient ``max_{x,y} ||Q(x,.) - Q(y,.)||_TV``."""
    diff = np.abs(Q[:, None, :] - Q[None, :, :]).sum(axis=2)
    return 0.5 * float(diff.max())


def contraction_block(Q: np.ndarray) -> tuple:
    """``(m, delta)`` with ``delta = dobrushin(Q^m) < 1`` for the smallest such m."""
    k = Q.shape[0]
    limit = (k - 1) ** 2 + 1
    P = Q.copy()
    for m in range(1, limit + 1):
        d = dobrushin(P)
        if d < 1 - 1e-12:
            return m, d
        P = P @ Q
    raise NonSummableError("kernel is periodic or reducible: no power of Q is a strict contraction")


def check_ergodic(spec: FiniteMarkovFn) -> None:
    """Raise unless 1 is the only eigenvalue of Q on the unit circle."""
    w = np.linalg.eigvals(spec.Q)
    on_circle = np.sum(np.abs(w) > 1 - 1e-9)
    if on_circle > 1:
        raise NonSummableError(
            f"kernel has {on_circle} eigenvalues of modulus 1; covariances are not summable"
        )


def _osc(v: np.ndarray) -> float:
    return float(v.max() - v.min()) if v.size else 0.0


def markov_covariances(spec: FiniteMarkovFn, nlags: int) -> np.ndarray:
    """``cov(X_0, X_l) = sum_x pi(x) h(x) (Q^l h)(x)`` for ``l < nlags``."""
    Q, w, v = spec.Q, spec.pi * spec.hvec, spec.hvec.copy()
    out = np.zeros(nlags)
    for l in range(nlags):
        out[l] = w @ v
        if l and not np.any(np.abs(v) > 1e-300):
            break
        v = Q @ v
    return out


def spectral_density_markov(spec: FiniteMarkovFn, t: float) -> SpectralEstimate:
    """Density from the absolutely summable covariance series.

    The series is cut once the remainder bound
    ``2 ||pi h||_1 osc(Q^J h) m / (1 - delta_m)`` (Dobrushin contraction of
    ``Q^m``) drops below ``2 pi * 1e-10``.
    """
    check_ergodic(spec)
    Q, h = spec.Q, spec.hvec
    m, delta = contraction_block(Q)
    w = spec.pi * h
    l1 = float(np.abs(w).sum())
    total = float(w @ h)
    v = h.copy()
    c = math.cos(t)
    s = math.sin(t)
    # cos(jt) by rotation
    cj, sj = 1.0, 0.0
    for j in range(1, 10_000_000):
        v = Q @ v
        cj, sj = cj * c - sj * s, sj * c + cj * s
        total += 2.0 * float(w @ v) * cj
        bound = 2.0 * l1 * _osc(v) * m / (1.0 - delta)
        if bound / TWO_PI < DENSITY_TOL:
            break
    f = max(total, 0.0) / TWO_PI
    return SpectralEstimate(float(t), f, TWO_PI * f, "covariance-series")


def spectral_density(spec, t: float) -> SpectralEstimate:
    if isinstance(spec, LinearProcess):
        return spectral_density_linear(spec, t)
    if isinstance(spec, FiniteMarkovFn):
        return spectral_density_markov(spec, t)
    if isinstance(spec, GaussianLRD):
        raise NonSummableError(
            "long-range dependent covariances are not absolutely summable; "
            "use exact_variance_S to exhibit the variance growth instead"
        )
    raise NonSummableError(f"no analytic spectral density for {spec.kind}")


def has_analytic_density(spec) -> bool:
    if isinstance(spec, LinearProcess):
        return spec.coeffs.tail != "power" or not spec.coeffs.log_power
    if isinstance(spec, FiniteMarkovFn):
        try:
            check_ergodic(spec)
        except NonSummableError:
            return False
        return True
    return False


# ---------------------------------------------------------------------------
# covariances and exact variance of S_n(t)
# ---------------------------------------------------------------------------


def linear_covariances(spec: LinearProcess, nlags: int, tol: float = 1e-16) -> np.ndarray:
    """``sigma^2 sum_j a_j a_{j+l}`` for ``l < nlags``; truncation error below ``tol``."""
    W = spec.coeffs.window(max(spec.variance, 1e-300), tol)
    M = nlags + W
    a = spec.coeffs.values(M)
    size = 1 << int(math.ceil(math.log2(2 * M)))
    F = np.fft.rfft(a, size)
    acf = np.fft.irfft(F * np.conj(F), size)[:nlags]
    return spec.variance * acf


def covariances(spec, nlags: int) -> np.ndarray:
    if isinstance(spec, LinearProcess):
        return linear_covariances(spec, nlags)
    if isinstance(spec, FiniteMarkovFn):
        return markov_covariances(spec, nlags)
    if isinstance(spec, GaussianLRD):
        return spec.cov(np.arange(nlags))
    raise SpecError(f"no analytic covariances for {spec.kind}")


def exact_variance_S(spec, n: int, t: float) -> float:
    """``E|S_n(t)|^2 = sum_{|l|<n} (n - |l|) exp(i l t) cov(l)``, evaluated exactly."""
    n = int(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    c = covariances(spec, n)
    lags = np.arange(1, n)
    val = n * c[0] + 2.0 * float(np.dot((n - lags) * np.cos(lags * t), c[1:]))
    return max(val, 0.0)


def sigma2_extrapolated(spec, t: float, n1: int, n2: int) -> SpectralEstimate:
    """Limit of ``E|S_n|^2 / n`` from two lengths, cancelling the ``1/n`` term."""
    v1 = exact_variance_S(spec, n1, t)
    v2 = exact_variance_S(spec, n2, t)
    s2 = max((v2 - v1) / (n2 - n1), 0.0)
    return SpectralEstimate(float(t), s2 / TWO_PI, s2, "covariance-series")


def variance_growth(spec, t: float, ns) -> list:
    """Rows ``(n, E|S_n|^2/n, ratio to previous row)``."""
    rows, prev = [], None
    for n in ns:
        v = exact_variance_S(spec, n, t) / n
        rows.append({"n": int(n), "var_over_n": v, "ratio": (v / prev) if prev else None})
        prev = v
    return rows


def write_density_csv(path, estimates) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "f", "sigma2", "method"])
        for e in estimates:
            w.writerow([repr(float(e.t)), repr(float(e.f)), repr(float(e.sigma2)), e.method])
