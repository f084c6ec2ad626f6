"""Reference models used by the demos, the CLI examples and the test suite."""
from __future__ import annotations

import numpy as np

from .models import (
    Coefficients,
    GaussianLRD,
    InnovationDist,
    IteratedRandomFn,
    LinearProcess,
    ReversibleMarkovFn,
    two_state_flip,
)


def white_noise(variance: float = 1.0, kind: str = "normal") -> LinearProcess:
    return LinearProcess(Coefficients(prefix=(1.0,)), InnovationDist(kind, variance))


def ar1(rho: float = 0.5, variance: float = 1.0, kind: str = "normal") -> LinearProcess:
    """``X_k = rho X_{k-1} + xi_k``, i.e. ``a_j = rho^j``."""
    return LinearProcess(Coefficients(tail="geometric", rho=rho), InnovationDist(kind, variance))


def flip_chain(p: float = 0.25) -> ReversibleMarkovFn:
    """Two states, switch with probability ``p``, ``h = (+1, -1)``."""
    return two_state_flip(p)


#: symmetric weights; Q = W / rowsum is reversible with pi proportional to rowsum
THREE_STATE_WEIGHTS = ((4.0, 2.0, 1.0), (2.0, 3.0, 1.0), (1.0, 1.0, 2.0))
THREE_STATE_H = (1.0, 0.0, -2.0)


def three_state_chain() -> ReversibleMarkovFn:
    """Reversible 3-state chain with a non-uniform stationary law."""
    W = np.array(THREE_STATE_WEIGHTS)
    return ReversibleMarkovFn.centered(W / W.sum(axis=1, keepdims=True), THREE_STATE_H)


def long_memory(alpha: float = 0.4, observable: str = "identity") -> GaussianLRD:
    return GaussianLRD(alpha=alpha, observable=observable)


def half_contraction(observable: str = "identity") -> IteratedRandomFn:
    """``x -> 0.5 x + eps`` with standard normal ``eps``."""
    return IteratedRandomFn(a_values=(0.5,), a_probs=(1.0,), observable=observable)
