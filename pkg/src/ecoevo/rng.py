"""Random streams.

Every simulation draws from a ``numpy.random.Generator`` backed by the
counter-based Philox bit generator.  Independent replicate streams are
derived from a master seed with :func:`derive_seed`, a SplitMix64 finalizer
applied to ``master ^ (index * 0x9E3779B97F4A7C15)`` in 64-bit arithmetic.
The mix is fixed and bit-exact on every platform, so replicate ``i`` of a
run sees the same stream regardless of how many workers execute the batch.
"""
from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(z: int) -> int:
    z = (z + GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master: int, index: int) -> int:
    """Seed of replicate stream ``index`` under master seed ``master``."""
    if master < 0 or index < 0:
        raise ValueError("seeds and stream indices must be non-negative")
    return splitmix64((master & MASK64) ^ ((index * GOLDEN) & MASK64))


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed & MASK64))


def stream(master: int, index: int) -> np.random.Generator:
    return make_rng(derive_seed(master, index))


def as_generator(rng: np.random.Generator | int | None) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None:
        raise ValueError("an explicit seed or Generator is required")
    return make_rng(int(rng))


class DrawBuffer:
    """Block-buffered uniform and standard-normal draws.

    Per-call overhead of ``Generator.random()`` dominates an event loop, so
    draws are taken in blocks.  The sequence consumed is a deterministic
    function of the generator state.
    """

    __slots__ = ("rng", "block", "_u", "_ui", "_z", "_zi")

    def __init__(self, rng: np.random.Generator, block: int = 4096):
        self.rng = rng
        self.block = block
        self._u: list[float] = []
        self._ui = 0
        self._z: list[float] = []
        self._zi = 0

    def uniform(self) -> float:
        if self._ui >= len(self._u):
            self._u = self.rng.random(self.block).tolist()
            self._ui = 0
        u = self._u[self._ui]
        self._ui += 1
        return u

    def normal(self) -> float:
        if self._zi >= len(self._z):
            self._z = self.rng.standard_normal(self.block).tolist()
            self._zi = 0
        z = self._z[self._zi]
        self._zi += 1
        return z
