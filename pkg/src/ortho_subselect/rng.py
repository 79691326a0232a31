"""Seedable random streams with deterministic child-seed derivation.

All randomness in the package flows from one integer seed. Independent
substreams are derived with :func:`child_seed`: the child for
``(seed, p1, p2, ...)`` is the first 8 bytes of ``SHA-256("seed:p1:p2:...")``
read big-endian. Generators are NumPy PCG64 (``numpy.random.default_rng``).
Both choices are load-bearing for replay of recorded traces and must not
change silently.
"""

from __future__ import annotations

import hashlib

import numpy as np


def child_seed(seed: int, *path: int | str) -> int:
    """Derive the 64-bit seed of the substream named by ``path``."""
    text = ":".join(str(p) for p in (seed, *path))
    digest = hashlib.sha256(text.encode("ascii")).digest()
    return int.from_bytes(digest[:8], "big")


def make_rng(seed: int) -> np.random.Generator:
    """PCG64 generator for the given seed."""
    return np.random.default_rng(seed)


def rademacher(rng: np.random.Generator, size: int) -> np.ndarray:
    """Vector of independent +-1 signs, each with probability 1/2."""
    return 2.0 * rng.integers(0, 2, size=size).astype(np.float64) - 1.0
