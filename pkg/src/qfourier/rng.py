"""Seed derivation.

Every random stream is derived from one user seed plus a text label and a
replicate index, so a single integer reproduces a whole run and replicates
can be generated in any order (or in parallel) with identical results.
"""
from __future__ import annotations

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def label_key(label: str) -> int:
    """Stable 64-bit integer for a text label."""
    digest = hashlib.sha256(label.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def stream(seed: int, label: str, index: int = 0) -> np.random.Generator:
    """Counter-based generator for ``(seed, label, index)``.

    Uses Philox keyed through a SeedSequence, so streams for different
    indices are statistically independent and cheap to create.
    """
    seq = np.random.SeedSequence([int(seed) & _MASK64, label_key(label), int(index) & _MASK64])
    return np.random.Generator(np.random.Philox(seq))


def derive_seed(seed: int, label: str) -> int:
    """Child seed for a sub-task, e.g. one command inside a CLI run."""
    payload = f"{int(seed) & _MASK64}:{label}".encode("utf-8")
    return int.from_bytes(hashlib.sha256(payload).digest()[:8], "little")
