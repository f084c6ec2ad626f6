"""Stationary process families and their samplers.

Five families are supported:

* :class:`LinearProcess` -- causal filter ``X_k = sum_j a_j xi_{k-j}`` of i.i.d.
  innovations, with coefficients given by an explicit prefix plus an analytic
  tail rule (:class:`Coefficients`).
* :class:`FiniteMarkovFn` / :class:`ReversibleMarkovFn` -- ``X_k = h(xi_k)``
  for a finite-state chain with kernel ``Q`` and stationary law ``pi``.
* :class:`IteratedRandomFn` -- random affine maps ``x -> A x + B`` on the line
  observed through an odd Lipschitz function.
* :class:`GaussianLRD` -- stationary Gaussian sequence with covariance
  ``(1 + k^2)^(-alpha/2)``, observed directly or through ``x^2 - 1``.

Each family can be sampled under its stationary law or conditionally on a
frozen past (a *quenched origin*).  All randomness comes from
:func:`qfourier.rng.stream`, one stream per replicate, so results are a pure
function of ``(spec, origin, n, seed, replicate)``.
"""
from __future__ import annotations

import functools
import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Any, ClassVar, Sequence, Union

import numpy as np
from scipy import linalg

from .rng import stream

#: neglected variance allowed when a linear past is truncated
TRUNCATION_TOL = 1e-8
#: largest past window a linear process may need
MAX_WINDOW = 1 << 22
#: default cap on the length of an exactly-sampled Gaussian window
GAUSSIAN_MAX_N = 4096
#: burn-in target for iterated random functions, r**B < BURNIN_TOL
BURNIN_TOL = 1e-8


class SpecError(ValueError):
    """Invalid process description.

    ``path`` locates the offending field (e.g. ``("kernel", 1)``) so callers
    that parsed the description from a config file can report a line number.
    """

    def __init__(self, message: str, path: Sequence[Any] = ()):
        super().__init__(message)
        self.path = tuple(path)


# ---------------------------------------------------------------------------
# innovations and coefficients
# ---------------------------------------------------------------------------

INNOVATION_KINDS = ("normal", "uniform", "rademacher")


@dataclass(frozen=True)
class InnovationDist:
    """Centered i.i.d. innovation law with closed-form moments."""

    kind: str = "normal"
    variance: float = 1.0

    def __post_init__(self):
        if self.kind not in INNOVATION_KINDS:
            raise SpecError(f"unknown innovation kind {self.kind!r}", ("kind",))
        if not (self.variance >= 0 and math.isfinite(self.variance)):
            raise SpecError("innovation variance must be finite and >= 0", ("variance",))

    @property
    def sd(self) -> float:
        return math.sqrt(self.variance)

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        if self.kind == "normal":
            return self.sd * rng.standard_normal(size)
        if self.kind == "uniform":
            half = math.sqrt(3.0) * self.sd
            return rng.uniform(-half, half, size)
        signs = rng.integers(0, 2, size=size)
        return self.sd * (2.0 * signs - 1.0)

    def abs_moment(self, r: float) -> float:
        """``E|xi|^r`` in closed form."""
        if r == 0:
            return 1.0
        s = self.sd
        if self.kind == "normal":
            return s**r * 2 ** (r / 2) * math.gamma((r + 1) / 2) / math.sqrt(math.pi)
        if self.kind == "uniform":
            return (math.sqrt(3.0) * s) ** r / (r + 1)
        return s**r

    def to_dict(self) -> dict:
        return {"kind": self.kind, "variance": float(self.variance)}


TAIL_RULES = ("none", "geometric", "power")


@dataclass(frozen=True)
class Coefficients:
    """Square-summable coefficient sequence ``a_0, a_1, ...``.

    ``prefix`` holds ``a_0 .. a_{J-1}`` explicitly; for ``j >= J`` the tail
    rule applies:

    ``none``
        ``a_j = 0``
    ``geometric``
        ``a_j = scale * rho**j``
    ``power``
        ``a_j = scale * (j + shift)**(-power) * log(j + shift)**(-log_power)``

    The tail index is absolute, so ``Coefficients(tail="geometric", rho=.5)``
    is the AR(1) filter ``a_j = 0.5**j``.
    """

    prefix: tuple = ()
    tail: str = "none"
    scale: float = 1.0
    rho: float = 0.0
    power: float = 1.0
    shift: float = 1.0
    log_power: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(float(v) for v in self.prefix))
        if self.tail not in TAIL_RULES:
            raise SpecError(f"unknown tail rule {self.tail!r}", ("tail",))
        if not all(math.isfinite(v) for v in self.prefix):
            raise SpecError("coefficient prefix must be finite", ("prefix",))
        if self.tail == "geometric" and not abs(self.rho) < 1:
            raise SpecError("geometric tail needs |rho| < 1", ("rho",))
        if self.tail == "power":
            if self.log_power < 0:
                raise SpecError("log_power must be >= 0", ("log_power",))
            if not (self.power > 0.5 or (self.power == 0.5 and self.log_power > 0.5)):
                raise SpecError(
                    "power tail is not square summable: need power > 1/2, or power = 1/2 with log_power > 1/2",
                    ("power",),
                )
            start = len(self.prefix) + self.shift
            if start <= (1.0 if self.log_power > 0 else 0.0):
                raise SpecError("power tail evaluated at a non-positive base", ("shift",))
        if self.tail == "none" and not self.prefix:
            raise SpecError("empty coefficient sequence", ("prefix",))

    @property
    def J(self) -> int:
        return len(self.prefix)

    def values(self, stop: int, start: int = 0) -> np.ndarray:
        """``a_j`` for ``start <= j < stop``."""
        j = np.arange(start, stop)
        out = np.zeros(j.shape, dtype=float)
        inside = j < self.J
        if inside.any():
            out[inside] = np.asarray(self.prefix)[j[inside]]
        rest = ~inside
        if rest.any() and self.tail != "none":
            jt = j[rest].astype(float)
            if self.tail == "geometric":
                out[rest] = self.scale * self.rho**jt
            else:
                base = jt + self.shift
                vals = self.scale * base ** (-self.power)
                if self.log_power:
                    vals = vals * np.log(base) ** (-self.log_power)
                out[rest] = vals
        return out

    def __getitem__(self, j: int) -> float:
        return float(self.values(j + 1, j)[0])

    def square_tail(self, L: int) -> float:
        """Upper bound on ``sum_{j >= L} a_j**2`` (exact for geometric tails)."""
        L = max(int(L), 0)
        head = 0.0
        if L < self.J:
            head = float(np.sum(np.asarray(self.prefix[L:]) ** 2))
            L = self.J
        if self.tail == "none":
            return head
        if self.tail == "geometric":
            r2 = self.rho**2
            return head + self.scale**2 * r2**L / (1 - r2)
        # decreasing integrand: sum_{j>=L} f(j+s) <= f(L+s) + int_{L+s}^inf f
        x0 = L + self.shift
        first = self[L] ** 2
        if self.power == 0.5:
            integral = math.log(x0) ** (1 - 2 * self.log_power) / (2 * self.log_power - 1)
        else:
            integral = x0 ** (1 - 2 * self.power) / (2 * self.power - 1)
            if self.log_power:
                integral *= math.log(x0) ** (-2 * self.log_power)
        return head + first + self.scale**2 * integral

    def total_square(self) -> float:
        """``sum_j a_j**2`` (exact up to the tail bound for power tails)."""
        if self.tail == "power":
            K = self.J + 100_000
            return float(np.sum(self.values(K) ** 2)) + self.square_tail(K)
        return self.square_tail(0)

    def window(self, variance: float = 1.0, tol: float = TRUNCATION_TOL) -> int:
        """Smallest ``L`` with ``variance * sum_{j>=L} a_j^2 < tol``."""
        if variance == 0:
            return max(self.J, 1)
        if self.tail == "none":
            return max(self.J, 1)
        if self.tail == "geometric" and self.rho != 0:
            r2 = self.rho**2
            target = tol * (1 - r2) / (variance * self.scale**2)
            L = max(self.J, int(math.ceil(math.log(target) / math.log(r2))) if target < 1 else 0)
            while variance * self.square_tail(L) >= tol:
                L += 1
            return max(L, 1)
        if self.tail == "geometric":
            return max(self.J, 1)
        lo, hi = self.J, max(self.J, 1)
        while variance * self.square_tail(hi) >= tol:
            lo, hi = hi, hi * 2
            if hi > MAX_WINDOW:
                raise SpecError(
                    f"power tail needs a past window > {MAX_WINDOW} for truncation tol {tol}",
                    ("coefficients",),
                )
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if variance * self.square_tail(mid) >= tol:
                lo = mid
            else:
                hi = mid
        return max(hi, 1)

    def is_monotone(self) -> bool:
        """Nonnegative and nonincreasing from ``j = 1`` on."""
        head = self.values(self.J + 2, 1)
        if np.any(head < 0) or np.any(np.diff(head) > 0):
            return False
        if self.tail == "geometric":
            return self.scale >= 0 and self.rho >= 0
        if self.tail == "power":
            return self.scale >= 0
        return True

    def to_dict(self) -> dict:
        return {
            "prefix": list(self.prefix),
            "tail": self.tail,
            "scale": float(self.scale),
            "rho": float(self.rho),
            "power": float(self.power),
            "shift": float(self.shift),
            "log_power": float(self.log_power),
        }


# ---------------------------------------------------------------------------
# process specs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LinearProcess:
    coeffs: Coefficients
    innovation: InnovationDist = field(default_factory=InnovationDist)
    kind: ClassVar[str] = "linear"

    @property
    def variance(self) -> float:
        return self.innovation.variance

    def window(self, tol: float = TRUNCATION_TOL) -> int:
        return self.coeffs.window(self.innovation.variance, tol)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "coefficients": self.coeffs.to_dict(), "innovation": self.innovation.to_dict()}


def stationary_distribution(Q: np.ndarray) -> np.ndarray:
    """Left Perron vector of a row-stochastic matrix."""
    m = Q.shape[0]
    A = np.vstack([Q.T - np.eye(m), np.ones((1, m))])
    b = np.zeros(m + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(A, b, rcond=None)
    return pi


@dataclass(frozen=True)
class FiniteMarkovFn:
    """``X_k = h(xi_k)`` for a stationary chain on ``{0, ..., m-1}``."""

    kernel: tuple
    h: tuple
    stationary: tuple = None
    kind: ClassVar[str] = "markov"

    def __post_init__(self):
        try:
            Q = np.array(self.kernel, dtype=float)
        except (TypeError, ValueError) as exc:
            raise SpecError(f"kernel is not a numeric matrix: {exc}", ("kernel",)) from None
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1] or Q.shape[0] == 0:
            raise SpecError("kernel must be a nonempty square matrix", ("kernel",))
        m = Q.shape[0]
        for i in range(m):
            if np.any(Q[i] < 0):
                raise SpecError(f"kernel row {i} has a negative entry", ("kernel", i))
            if abs(Q[i].sum() - 1) > 1e-12:
                raise SpecError(f"kernel row {i} sums to {Q[i].sum():.12g}, not 1", ("kernel", i))
        h = np.array(self.h, dtype=float)
        if h.shape != (m,):
            raise SpecError(f"h must have length {m}", ("h",))
        pi = stationary_distribution(Q) if self.stationary is None else np.array(self.stationary, dtype=float)
        if pi.shape != (m,):
            raise SpecError(f"stationary vector must have length {m}", ("stationary",))
        if np.max(np.abs(pi @ Q - pi)) > 1e-10 or abs(pi.sum() - 1) > 1e-10 or np.any(pi < -1e-12):
            raise SpecError("stationary vector is not invariant under the kernel", ("stationary",))
        if abs(pi @ h) > 1e-10:
            raise SpecError(f"h is not centered under pi (pi.h = {pi @ h:.3g})", ("h",))
        object.__setattr__(self, "kernel", tuple(tuple(float(v) for v in row) for row in Q))
        object.__setattr__(self, "h", tuple(float(v) for v in h))
        object.__setattr__(self, "stationary", tuple(float(v) for v in pi))

    @classmethod
    def centered(cls, kernel, h):
        """Build from a kernel and an uncentered observable."""
        Q = np.asarray(kernel, dtype=float)
        pi = stationary_distribution(Q)
        h = np.asarray(h, dtype=float)
        return cls(kernel=Q.tolist(), h=(h - pi @ h).tolist(), stationary=pi.tolist())

    @property
    def Q(self) -> np.ndarray:
        return np.array(self.kernel)

    @property
    def pi(self) -> np.ndarray:
        return np.array(self.stationary)

    @property
    def hvec(self) -> np.ndarray:
        return np.array(self.h)

    @property
    def m(self) -> int:
        return len(self.h)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "kernel": [list(r) for r in self.kernel],
            "h": list(self.h),
            "stationary": list(self.stationary),
        }


@dataclass(frozen=True)
class ReversibleMarkovFn(FiniteMarkovFn):
    kind: ClassVar[str] = "reversible_markov"

    def __post_init__(self):
        super().__post_init__()
        F = self.pi[:, None] * self.Q
        resid = np.max(np.abs(F - F.T))
        if resid >= 1e-10:
            raise SpecError(f"detailed balance residual {resid:.3g} >= 1e-10", ("kernel",))


def two_state_flip(p: float, h=(1.0, -1.0), reversible: bool = True) -> FiniteMarkovFn:
    """Symmetric two-state chain that switches state with probability ``p``."""
    cls = ReversibleMarkovFn if reversible else FiniteMarkovFn
    return cls.centered([[1 - p, p], [p, 1 - p]], h)


def random_reversible_chain(m: int, rng: np.random.Generator, h=None) -> ReversibleMarkovFn:
    """Random reversible chain from a symmetric positive weight matrix."""
    W = rng.uniform(0.05, 1.0, size=(m, m))
    W = W + W.T
    Q = W / W.sum(axis=1, keepdims=True)
    pi = W.sum(axis=1) / W.sum()
    if h is None:
        h = rng.standard_normal(m)
    h = np.asarray(h, dtype=float)
    return ReversibleMarkovFn(kernel=Q.tolist(), h=(h - pi @ h).tolist(), stationary=pi.tolist())


IRF_OBSERVABLES = ("identity", "tanh", "sin")


@dataclass(frozen=True)
class IteratedRandomFn:
    """``xi_k = A_k xi_{k-1} + B_k`` with ``X_k = h(xi_k)``.

    ``A`` takes value ``a_values[i]`` with probability ``a_probs[i]``;
    ``B`` is drawn from ``noise``.  Observables are odd (``identity``,
    ``tanh(c x)``, ``sin(c x)``), so with symmetric noise the stationary
    mean of ``X`` is exactly zero.  Lipschitz constant is ``obs_scale``.
    """

    a_values: tuple = (0.5,)
    a_probs: tuple = (1.0,)
    noise: InnovationDist = field(default_factory=InnovationDist)
    observable: str = "identity"
    obs_scale: float = 1.0
    kind: ClassVar[str] = "irf"

    def __post_init__(self):
        object.__setattr__(self, "a_values", tuple(float(v) for v in self.a_values))
        object.__setattr__(self, "a_probs", tuple(float(v) for v in self.a_probs))
        if len(self.a_values) != len(self.a_probs) or not self.a_values:
            raise SpecError("a_values and a_probs must have the same nonzero length", ("a_probs",))
        p = np.array(self.a_probs)
        if np.any(p < 0) or abs(p.sum() - 1) > 1e-12:
            raise SpecError("a_probs must be a probability vector", ("a_probs",))
        if self.observable not in IRF_OBSERVABLES:
            raise SpecError(f"unknown observable {self.observable!r}", ("observable",))
        if not self.mean_log_lipschitz() < 0:
            raise SpecError(
                f"non-contractive map: E log|A| = {self.mean_log_lipschitz():.4g} >= 0", ("a_values",)
            )

    def mean_log_lipschitz(self) -> float:
        """``E log|A|`` (``-inf`` when ``A = 0`` has positive mass)."""
        total = 0.0
        for a, p in zip(self.a_values, self.a_probs):
            if p == 0:
                continue
            if a == 0:
                return -math.inf
            total += p * math.log(abs(a))
        return total

    def lipschitz_moment(self, beta: float) -> float:
        """``E|A|^beta``."""
        return float(sum(p * abs(a) ** beta for a, p in zip(self.a_values, self.a_probs)))

    def contraction(self) -> tuple:
        """``(beta, r)`` with ``E|A|^beta = r < 1``; beta=1 when possible."""
        for beta in (1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125):
            r = self.lipschitz_moment(beta)
            if r < 1:
                return beta, r
        raise SpecError("no moment order in (0, 1] gives E|A|^beta < 1", ("a_values",))

    def burn_in(self) -> int:
        _, r = self.contraction()
        if r == 0:
            return 1
        return max(1, int(math.ceil(math.log(BURNIN_TOL) / math.log(r))))

    @property
    def lipschitz(self) -> float:
        return abs(self.obs_scale)

    def observe(self, x: np.ndarray) -> np.ndarray:
        if self.observable == "identity":
            return self.obs_scale * x
        if self.observable == "tanh":
            return np.tanh(self.obs_scale * x)
        return np.sin(self.obs_scale * x)

    def draw_a(self, rng: np.random.Generator, size) -> np.ndarray:
        if len(self.a_values) == 1:
            rng.random(size)  # keep stream layout independent of the law of A
            return np.full(size, self.a_values[0])
        cum = np.cumsum(self.a_probs)[:-1]
        idx = np.searchsorted(cum, rng.random(size), side="right")
        return np.asarray(self.a_values)[idx]

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "a_values": list(self.a_values),
            "a_probs": list(self.a_probs),
            "noise": self.noise.to_dict(),
            "observable": self.observable,
            "obs_scale": float(self.obs_scale),
        }


@dataclass(frozen=True)
class GaussianLRD:
    """Stationary Gaussian sequence with ``cov(Z_0, Z_k) = (1 + k^2)^(-alpha/2)``.

    ``observable`` is ``identity`` (``X = Z``) or ``square`` (``X = Z^2 - 1``).
    """

    alpha: float = 0.4
    observable: str = "identity"
    max_n: int = GAUSSIAN_MAX_N
    kind: ClassVar[str] = "gaussian_lrd"

    def __post_init__(self):
        if not 0 < self.alpha < 0.5:
            raise SpecError("alpha must lie in (0, 1/2)", ("alpha",))
        if self.observable not in ("identity", "square"):
            raise SpecError(f"unknown observable {self.observable!r}", ("observable",))

    def gaussian_cov(self, lags) -> np.ndarray:
        lags = np.asarray(lags, dtype=float)
        return (1.0 + lags**2) ** (-self.alpha / 2)

    def cov(self, lags) -> np.ndarray:
        """Covariance of the observed sequence ``X`` at the given lags."""
        r = self.gaussian_cov(lags)
        return r if self.observable == "identity" else 2.0 * r**2

    def observe(self, z: np.ndarray) -> np.ndarray:
        return z if self.observable == "identity" else z**2 - 1.0

    def to_dict(self) -> dict:
        return {"kind": self.kind, "alpha": float(self.alpha), "observable": self.observable, "max_n": int(self.max_n)}


ProcessSpec = Union[LinearProcess, FiniteMarkovFn, IteratedRandomFn, GaussianLRD]


@functools.lru_cache(maxsize=8)
def _gaussian_factor(alpha: float, size: int) -> np.ndarray:
    """Lower Cholesky factor of the ``size x size`` Toeplitz covariance."""
    C = linalg.toeplitz((1.0 + np.arange(size, dtype=float) ** 2) ** (-alpha / 2))
    try:
        L = linalg.cholesky(C, lower=True)
    except linalg.LinAlgError:
        w, V = linalg.eigh(C)
        if w.min() < -1e-8:
            raise SpecError(f"covariance window of size {size} is not PSD (min eig {w.min():.3g})", ("alpha",))
        L = V * np.sqrt(np.clip(w, 0, None))
    L.setflags(write=False)
    return L


def gaussian_factor(spec: GaussianLRD, size: int) -> np.ndarray:
    if size > spec.max_n:
        raise SpecError(f"Gaussian window {size} exceeds max_n={spec.max_n}", ("max_n",))
    return _gaussian_factor(float(spec.alpha), int(size))


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def spec_to_dict(spec: ProcessSpec) -> dict:
    return spec.to_dict()


def spec_from_dict(d: dict) -> ProcessSpec:
    """Inverse of :func:`spec_to_dict`; raises :class:`SpecError` with field paths."""
    if not isinstance(d, dict) or "kind" not in d:
        raise SpecError("process section needs a 'kind' field", ("kind",))
    kind = d["kind"]
    try:
        if kind == "linear":
            c = dict(d.get("coefficients", {}))
            try:
                coeffs = Coefficients(**c)
            except SpecError as exc:
                raise SpecError(str(exc), ("coefficients",) + exc.path) from None
            try:
                innov = InnovationDist(**d.get("innovation", {}))
            except SpecError as exc:
                raise SpecError(str(exc), ("innovation",) + exc.path) from None
            return LinearProcess(coeffs, innov)
        if kind in ("markov", "reversible_markov"):
            cls = ReversibleMarkovFn if kind == "reversible_markov" else FiniteMarkovFn
            if d.get("center", False):
                return cls.centered(d["kernel"], d["h"])
            return cls(kernel=d["kernel"], h=d["h"], stationary=d.get("stationary"))
        if kind == "irf":
            kw = {k: v for k, v in d.items() if k not in ("kind", "noise")}
            try:
                noise = InnovationDist(**d.get("noise", {}))
            except SpecError as exc:
                raise SpecError(str(exc), ("noise",) + exc.path) from None
            return IteratedRandomFn(noise=noise, **kw)
        if kind == "gaussian_lrd":
            kw = {k: v for k, v in d.items() if k != "kind"}
            return GaussianLRD(**kw)
    except TypeError as exc:
        raise SpecError(f"bad field in {kind} spec: {exc}", ()) from None
    except KeyError as exc:
        raise SpecError(f"missing field {exc} in {kind} spec", (exc.args[0],)) from None
    raise SpecError(f"unknown process kind {kind!r}", ("kind",))


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def spec_hash(spec: ProcessSpec) -> str:
    """Stable digest of the canonical serialization."""
    return hashlib.sha256(canonical_json(spec_to_dict(spec)).encode("utf-8")).hexdigest()[:16]


# ---------------------------------------------------------------------------
# quenched origins and trajectories
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LinearPast:
    """Frozen innovations ``(xi_0, xi_{-1}, ..., xi_{-L+1})``; zeros beyond."""

    past_innovations: tuple
    kind: ClassVar[str] = "linear_past"

    def __post_init__(self):
        object.__setattr__(self, "past_innovations", tuple(float(v) for v in self.past_innovations))
        if len(self.past_innovations) < 1:
            raise SpecError("past window L must be >= 1", ("past_innovations",))

    @property
    def window(self) -> int:
        return len(self.past_innovations)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "past_innovations": list(self.past_innovations)}


@dataclass(frozen=True)
class MarkovStart:
    state_index: int
    kind: ClassVar[str] = "markov_start"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "state_index": int(self.state_index)}


@dataclass(frozen=True)
class IRFStart:
    x0: float
    kind: ClassVar[str] = "irf_start"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "x0": float(self.x0)}


@dataclass(frozen=True)
class GaussianPast:
    """Frozen Gaussian past ``(Z_0, Z_{-1}, ..., Z_{-L+1})``."""

    past_values: tuple
    kind: ClassVar[str] = "gaussian_past"

    def __post_init__(self):
        object.__setattr__(self, "past_values", tuple(float(v) for v in self.past_values))
        if len(self.past_values) < 1:
            raise SpecError("past window L must be >= 1", ("past_values",))

    @property
    def window(self) -> int:
        return len(self.past_values)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "past_values": list(self.past_values)}


QuenchedOrigin = Union[LinearPast, MarkovStart, IRFStart, GaussianPast]
STATIONARY = "stationary"

_ORIGIN_FOR = {
    "linear": LinearPast,
    "markov": MarkovStart,
    "reversible_markov": MarkovStart,
    "irf": IRFStart,
    "gaussian_lrd": GaussianPast,
}


def origin_from_dict(d: dict) -> QuenchedOrigin:
    kind = d.get("kind")
    try:
        if kind == "linear_past":
            return LinearPast(tuple(d["past_innovations"]))
        if kind == "markov_start":
            return MarkovStart(int(d["state_index"]))
        if kind == "irf_start":
            return IRFStart(float(d["x0"]))
        if kind == "gaussian_past":
            return GaussianPast(tuple(d["past_values"]))
    except KeyError as exc:
        raise SpecError(f"missing field {exc} in origin", (exc.args[0],)) from None
    raise SpecError(f"unknown origin kind {kind!r}", ("kind",))


def check_origin(spec: ProcessSpec, origin: QuenchedOrigin) -> None:
    expected = _ORIGIN_FOR[spec.kind]
    if not isinstance(origin, expected):
        raise SpecError(
            f"origin {type(origin).__name__} does not match a {spec.kind} process "
            f"(expected {expected.__name__})",
            ("origin",),
        )
    if isinstance(origin, MarkovStart) and not 0 <= origin.state_index < spec.m:
        raise SpecError(f"state_index {origin.state_index} outside [0, {spec.m})", ("origin", "state_index"))
    if isinstance(origin, GaussianPast) and origin.window > spec.max_n:
        raise SpecError("Gaussian past window exceeds max_n", ("origin", "past_values"))


@dataclass
class Trajectory:
    values: np.ndarray
    origin: Any
    seed: int
    spec_hash: str
    replicate: int = 0
    #: hidden driver of the path: future innovations (linear), states
    #: ``xi_0..xi_n`` (Markov, IRF) or Gaussian values (LRD)
    latent: np.ndarray = None

    @property
    def n(self) -> int:
        return len(self.values)


@dataclass
class PathBatch:
    """``R`` replicate paths; row ``r`` is replicate ``start + r``."""

    values: np.ndarray
    latent: np.ndarray
    origin: Any
    seed: int
    spec_hash: str
    start: int = 0


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------


def _fft_convolve_prefix(a: np.ndarray, x: np.ndarray, n_out: int) -> np.ndarray:
    """First ``n_out`` entries of the full convolution ``a * x``."""
    size = 1 << int(math.ceil(math.log2(max(len(a) + len(x) - 1, 1))))
    out = np.fft.irfft(np.fft.rfft(a, size) * np.fft.rfft(x, size), size)
    return out[:n_out]


def linear_past_mean(spec: LinearProcess, past: np.ndarray, n: int) -> np.ndarray:
    """``E_0 X_k = sum_{m<L} a_{k+m} xi_{-m}`` for ``k = 1..n``."""
    past = np.asarray(past, dtype=float)
    L = len(past)
    a = spec.coeffs.values(n + L)
    # E_0 X_k = sum_m a_{k+m} past[m]: correlation of a[1:] with past
    rev = past[::-1]
    full = _fft_convolve_prefix(a, rev, n + L)
    return full[L : L + n]


def _linear_future(spec: LinearProcess, xi: np.ndarray) -> np.ndarray:
    """``sum_{j<k} a_j xi_{k-j}`` for ``k = 1..n`` given ``xi_1..xi_n``."""
    n = len(xi)
    a = spec.coeffs.values(n)
    if n <= 64:
        return np.convolve(a, xi)[:n]
    return _fft_convolve_prefix(a, xi, n)


def _replicate_range(start: int, replicates: int):
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    return range(start, start + replicates)


def simulate_paths(
    spec: ProcessSpec,
    n: int,
    seed: int,
    replicates: int = 1,
    origin: QuenchedOrigin = None,
    start: int = 0,
) -> PathBatch:
    """Replicate paths ``X_1..X_n``, stationary when ``origin`` is None.

    Replicate ``r`` draws only from ``stream(seed, label, r)``, so a row does
    not depend on how many other replicates are generated alongside it.
    """
    n = int(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    if origin is not None and origin != STATIONARY:
        check_origin(spec, origin)
        label = f"process_models/quenched/{spec.kind}"
    else:
        origin = STATIONARY
        label = f"process_models/stationary/{spec.kind}"
    reps = _replicate_range(start, replicates)
    h = spec_hash(spec)
    if isinstance(spec, LinearProcess):
        values, latent = _sample_linear(spec, n, seed, reps, origin, label)
    elif isinstance(spec, FiniteMarkovFn):
        values, latent = _sample_markov(spec, n, seed, reps, origin, label)
    elif isinstance(spec, IteratedRandomFn):
        values, latent = _sample_irf(spec, n, seed, reps, origin, label)
    elif isinstance(spec, GaussianLRD):
        values, latent = _sample_gaussian(spec, n, seed, reps, origin, label)
    else:
        raise SpecError(f"unsupported spec type {type(spec).__name__}")
    return PathBatch(values, latent, origin, int(seed), h, start)


def _sample_linear(spec, n, seed, reps, origin, label):
    innov = spec.innovation
    values = np.empty((len(reps), n))
    latent = np.empty((len(reps), n))
    if origin == STATIONARY:
        L = spec.window()
        a = spec.coeffs.values(n + L)
        for i, r in enumerate(reps):
            rng = stream(seed, label, r)
            past = innov.sample(rng, L)  # xi_0, xi_{-1}, ...
            xi = innov.sample(rng, n)
            full = np.concatenate([past[::-1], xi])
            values[i] = _fft_convolve_prefix(a, full, n + L)[L:]
            latent[i] = xi
        return values, latent
    mean = linear_past_mean(spec, origin.past_innovations, n)
    for i, r in enumerate(reps):
        rng = stream(seed, label, r)
        xi = innov.sample(rng, n)
        values[i] = mean + _linear_future(spec, xi)
        latent[i] = xi
    return values, latent


def _markov_step_table(spec: FiniteMarkovFn) -> np.ndarray:
    return np.cumsum(spec.Q, axis=1)[:, :-1]


def _sample_markov(spec, n, seed, reps, origin, label):
    R = len(reps)
    U = np.empty((R, n + 1))
    for i, r in enumerate(reps):
        U[i] = stream(seed, label, r).random(n + 1)
    states = np.empty((R, n + 1), dtype=np.int64)
    if origin == STATIONARY:
        cpi = np.cumsum(spec.pi)[:-1]
        states[:, 0] = np.searchsorted(cpi, U[:, 0], side="right")
    else:
        states[:, 0] = origin.state_index
    cum = _markov_step_table(spec)
    for k in range(1, n + 1):
        states[:, k] = (U[:, k, None] >= cum[states[:, k - 1]]).sum(axis=1)
    values = spec.hvec[states[:, 1:]]
    return values, states


def _irf_run(spec: IteratedRandomFn, x: np.ndarray, rng: np.random.Generator, steps: int) -> np.ndarray:
    """Iterate ``steps`` times from ``x``; returns the states after each step."""
    out = np.empty(steps)
    A = spec.draw_a(rng, steps)
    B = spec.noise.sample(rng, steps)
    for k in range(steps):
        x = A[k] * x + B[k]
        out[k] = x
    return out


def _sample_irf(spec, n, seed, reps, origin, label):
    R = len(reps)
    states = np.empty((R, n + 1))
    burn = spec.burn_in()
    for i, r in enumerate(reps):
        rng = stream(seed, label, r)
        if origin == STATIONARY:
            x0 = _irf_run(spec, 0.0, rng, burn)[-1]
        else:
            x0 = origin.x0
        states[i, 0] = x0
        states[i, 1:] = _irf_run(spec, x0, rng, n)
    return spec.observe(states[:, 1:]), states


def _gaussian_conditional(spec: GaussianLRD, past: np.ndarray, n: int):
    """Mean and lower factor of ``(Z_1..Z_n)`` given ``(Z_0, Z_{-1}, ...)``."""
    L = len(past)
    F = gaussian_factor(spec, L + n)
    chrono = np.asarray(past, dtype=float)[::-1]
    zp = linalg.solve_triangular(F[:L, :L], chrono, lower=True)
    mean = F[L:, :L] @ zp
    return mean, F[L:, L:]


def _sample_gaussian(spec, n, seed, reps, origin, label):
    R = len(reps)
    Z = np.empty((R, n))
    if origin == STATIONARY:
        F = gaussian_factor(spec, n)
        mean = np.zeros(n)
    else:
        mean, F = _gaussian_conditional(spec, origin.past_values, n)
    for i, r in enumerate(reps):
        z = stream(seed, label, r).standard_normal(n)
        Z[i] = mean + F @ z
    return spec.observe(Z), Z


def _single(batch: PathBatch, replicate: int) -> Trajectory:
    return Trajectory(
        values=batch.values[0],
        origin=batch.origin,
        seed=batch.seed,
        spec_hash=batch.spec_hash,
        replicate=replicate,
        latent=batch.latent[0],
    )


def sample_stationary(spec: ProcessSpec, n: int, seed: int, replicate: int = 0) -> Trajectory:
    """One path ``X_1..X_n`` under the stationary law."""
    return _single(simulate_paths(spec, n, seed, 1, None, replicate), replicate)


def sample_quenched(spec: ProcessSpec, origin: QuenchedOrigin, n: int, seed: int, replicate: int = 0) -> Trajectory:
    """One path ``X_1..X_n`` conditional on the frozen past ``origin``."""
    if origin is None or origin == STATIONARY:
        raise SpecError("sample_quenched needs an explicit origin", ("origin",))
    return _single(simulate_paths(spec, n, seed, 1, origin, replicate), replicate)


def draw_origin(spec: ProcessSpec, seed: int, window: int = None, replicate: int = 0) -> QuenchedOrigin:
    """Draw a frozen past from the stationary law of the past."""
    rng = stream(seed, f"process_models/origin/{spec.kind}", replicate)
    if isinstance(spec, LinearProcess):
        L = int(window) if window is not None else spec.window()
        if L < 1:
            raise SpecError("past window L must be >= 1", ("window",))
        return LinearPast(tuple(spec.innovation.sample(rng, L)))
    if isinstance(spec, FiniteMarkovFn):
        cpi = np.cumsum(spec.pi)[:-1]
        return MarkovStart(int(np.searchsorted(cpi, rng.random(), side="right")))
    if isinstance(spec, IteratedRandomFn):
        return IRFStart(float(_irf_run(spec, 0.0, rng, spec.burn_in())[-1]))
    if isinstance(spec, GaussianLRD):
        L = int(window) if window is not None else 64
        z = gaussian_factor(spec, L) @ rng.standard_normal(L)
        return GaussianPast(tuple(z[::-1]))
    raise SpecError(f"unsupported spec type {type(spec).__name__}")


def stationary_variance(spec: ProcessSpec) -> float:
    """``Var(X_0)`` in closed form."""
    if isinstance(spec, LinearProcess):
        return spec.variance * spec.coeffs.total_square()
    if isinstance(spec, FiniteMarkovFn):
        return float(spec.pi @ spec.hvec**2)
    if isinstance(spec, GaussianLRD):
        return float(spec.cov([0])[0])
    raise SpecError("no closed-form variance for this family")
