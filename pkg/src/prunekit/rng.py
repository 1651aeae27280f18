"""Deterministic, splittable random number generation.

Built on numpy's Philox counter-based generator so that a given seed
produces identical draw sequences on every platform. Child streams are
derived by hashing (seed, tag), which keeps independent consumers
(dataset generation, weight init, random criterion, shuffling) from
interfering with each other's draw order.
"""

import hashlib

import numpy as np


class Rng:
    """A seeded random stream. One owner at a time; draws mutate state."""

    def __init__(self, seed: int):
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self._gen = np.random.Generator(np.random.Philox(key=self.seed))

    def child(self, tag: str) -> "Rng":
        """Derive an independent stream keyed by (seed, tag)."""
        digest = hashlib.sha256(f"{self.seed}:{tag}".encode()).digest()
        return Rng(int.from_bytes(digest[:8], "little"))

    def normal(self, shape=None) -> np.ndarray:
        return self._gen.standard_normal(shape)

    def uniform(self, low: float, high: float, shape=None) -> np.ndarray:
        return self._gen.uniform(low, high, shape)

    def integers(self, low: int, high: int, shape=None):
        return self._gen.integers(low, high, size=shape)

    def permutation(self, n: int) -> np.ndarray:
        return self._gen.permutation(n)
