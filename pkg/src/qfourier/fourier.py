"""Finite Fourier transforms and periodograms of real sequences.

Conventions follow the classical time-series ones used throughout the
package: summation starts at ``k = 1``,

    S_n(t) = sum_{k=1}^n exp(i k t) X_k,        I_n(t) = |S_n(t)|^2 / (2 pi n),

``V_n(t) = (Re S_n, Im S_n) / sqrt(n)`` and ``W_n(t)`` is the same pair for
``S_n - E_0 S_n`` when a conditional mean is supplied.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .rng import stream

#: phases are re-synchronised with exp(i k t) every RESYNC steps
RESYNC = 4096
TWO_PI = 2.0 * math.pi
EXCLUDED = (0.0, math.pi / 2, math.pi, 3 * math.pi / 2)


def phases(n: int, ts, start: int = 1) -> np.ndarray:
    """``exp(i k t)`` for ``k = start..start+n-1``, one row per frequency.

    Within a block of :data:`RESYNC` terms the phase is advanced by repeated
    multiplication with ``exp(i t)``; each block starts from an exactly
    evaluated exponential, which keeps the drift at a few ulps per block.
    """
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    out = np.empty((ts.size, n), dtype=complex)
    step = np.exp(1j * ts)[:, None]
    for b0 in range(0, n, RESYNC):
        b1 = min(b0 + RESYNC, n)
        width = b1 - b0
        anchor = np.exp(1j * ts * (start + b0))[:, None]
        rot = np.empty((ts.size, width), dtype=complex)
        rot[:, 0] = 1.0
        if width > 1:
            rot[:, 1:] = step
            np.cumprod(rot, axis=1, out=rot)
        out[:, b0:b1] = anchor * rot
    return out


def _check_values(values) -> np.ndarray:
    x = np.asarray(values, dtype=float)
    if x.ndim == 0 or x.shape[-1] == 0:
        raise ValueError("empty input sequence")
    return x


def _check_t(t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(t > TWO_PI) or not np.all(np.isfinite(t)):
        raise ValueError("frequency must lie in [0, 2*pi]")
    return t


def dft(values, t: float) -> complex:
    """``S_n(t)`` for one real sequence and one frequency."""
    x = _check_values(values)
    _check_t(t)
    return complex(phases(x.shape[-1], [t])[0] @ x)


def dft_many(values, ts) -> np.ndarray:
    """``S_n(t)`` for a ``(R, n)`` batch and ``G`` frequencies; shape ``(R, G)``."""
    x = np.atleast_2d(_check_values(values))
    ts = _check_t(np.atleast_1d(ts))
    return x @ phases(x.shape[1], ts).T


def dft_fourier(values) -> np.ndarray:
    """``S_n(2 pi j / n)`` for ``j = 0..n-1`` by FFT."""
    x = _check_values(values)
    n = x.shape[-1]
    j = np.arange(n)
    return n * np.fft.ifft(x, axis=-1) * np.exp(2j * np.pi * j / n)


def periodogram(values, t: float) -> float:
    """``I_n(t) = |S_n(t)|^2 / (2 pi n)``."""
    x = _check_values(values)
    s = dft(x, t)
    return (s.real**2 + s.imag**2) / (TWO_PI * x.shape[-1])


def fourier_frequencies(n: int, include_zero: bool = False) -> np.ndarray:
    j = np.arange(0 if include_zero else 1, n)
    return TWO_PI * j / n


@dataclass(frozen=True)
class FrequencyGrid:
    """Frequencies in ``(0, 2 pi)`` with excluded-point flags.

    A point is flagged when it lies within 1e-12 of ``pi/2``, ``pi`` or
    ``3 pi/2`` (where ``exp(-2it)`` is real).
    """

    points: tuple
    kind: str = "explicit"

    def __post_init__(self):
        pts = tuple(float(t) for t in self.points)
        if not pts:
            raise ValueError("empty frequency grid")
        if any(not (0.0 < t < TWO_PI) for t in pts):
            raise ValueError("grid points must lie in (0, 2*pi)")
        object.__setattr__(self, "points", pts)

    @classmethod
    def explicit(cls, points: Iterable[float]) -> "FrequencyGrid":
        return cls(tuple(points), "explicit")

    @classmethod
    def fourier(cls, n: int) -> "FrequencyGrid":
        return cls(tuple(fourier_frequencies(n)), "fourier")

    @classmethod
    def uniform_random(cls, k: int, seed: int) -> "FrequencyGrid":
        rng = stream(seed, "fourier_stats/grid")
        pts = rng.uniform(0.0, TWO_PI, size=k)
        pts = np.where(pts == 0.0, math.pi / 7, pts)
        return cls(tuple(np.sort(pts)), "uniform-random")

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.points)

    @property
    def excluded(self) -> np.ndarray:
        t = self.array
        return np.any(np.abs(t[:, None] - np.asarray(EXCLUDED)[None, :]) <= 1e-12, axis=1)

    def __len__(self):
        return len(self.points)


def is_excluded(t: float) -> bool:
    return any(abs(float(t) - e) <= 1e-12 for e in EXCLUDED + (TWO_PI,))


@dataclass(frozen=True)
class FourierSample:
    t: float
    n: int
    S: complex
    V: tuple
    W: tuple
    I: float

    def row(self) -> list:
        return [self.t, self.n, self.S.real, self.S.imag, self.V[0], self.V[1], self.W[0], self.W[1], self.I]


CSV_HEADER = ["t", "n", "re_S", "im_S", "re_V", "im_V", "re_W", "im_W", "I"]


def fourier_batch(values, grid, centering: Sequence[complex] = None) -> list:
    """:class:`FourierSample` for every grid point.

    ``centering`` holds ``E_0 S_n(t)`` per grid point; without it ``W``
    equals ``V``.
    """
    x = _check_values(values)
    if getattr(x, "ndim", 1) != 1:
        raise ValueError("fourier_batch takes a single trajectory")
    ts = grid.array if isinstance(grid, FrequencyGrid) else np.atleast_1d(np.asarray(grid, dtype=float))
    if centering is not None:
        centering = np.asarray(centering, dtype=complex)
        if centering.shape != ts.shape:
            raise ValueError(f"centering has {centering.size} values for {ts.size} grid points")
    n = x.size
    if isinstance(grid, FrequencyGrid) and grid.kind == "fourier" and len(grid) == n - 1:
        S = dft_fourier(x)[1:]
    else:
        S = np.concatenate([dft_many(x, ts[i : i + 256])[0] for i in range(0, ts.size, 256)])
    root = math.sqrt(n)
    out = []
    for g, t in enumerate(ts):
        s = complex(S[g])
        V = (s.real / root, s.imag / root)
        if centering is None:
            W = V
        else:
            c = s - complex(centering[g])
            W = (c.real / root, c.imag / root)
        I = (s.real**2 + s.imag**2) / (TWO_PI * n)
        out.append(FourierSample(float(t), n, s, V, W, I))
    return out


def write_samples_csv(path, samples: Sequence[FourierSample], extra: dict = None) -> None:
    """Write FourierSample rows; ``extra`` maps column name -> per-row values."""
    extra = extra or {}
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER + list(extra))
        for i, s in enumerate(samples):
            w.writerow([repr(float(v)) if isinstance(v, float) else v for v in s.row()]
                       + [repr(float(col[i])) for col in extra.values()])
