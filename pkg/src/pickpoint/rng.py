"""Portable seeding utilities.

Everything that must reproduce bit-for-bit across platforms (dataset splits,
fold assignment, per-member seeds) goes through SplitMix64 here rather than
through numpy's generator, whose streams are an implementation detail.
Noise draws use ``numpy.random.default_rng`` seeded with derived seeds.
"""

from __future__ import annotations

from typing import MutableSequence, TypeVar

import numpy as np

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15

T = TypeVar("T")


def _mix(z: int) -> int:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & _MASK
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK
    return z ^ (z >> 31)


class SplitMix64:
    """Steele/Lea/Flood SplitMix64 generator (64-bit state)."""

    def __init__(self, seed: int):
        self.state = int(seed) & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + _GAMMA) & _MASK
        return _mix(self.state)

    def below(self, n: int) -> int:
        """Uniform integer in ``[0, n)`` by rejection (no modulo bias)."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = _MASK - (_MASK % n + 1) % n  # largest multiple of n, minus one
        while True:
            x = self.next_u64()
            if x <= limit:
                return x % n

    def shuffle(self, items: MutableSequence[T]) -> MutableSequence[T]:
        """In-place Fisher-Yates, walking from the last element down."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]
        return items


def derive_seed(master: int, *path: int) -> int:
    """Stable 64-bit child seed for ``(master, i, j, ...)``.

    Independent of call order, so parallel and serial code paths that ask for
    the same path get the same seed.
    """
    s = _mix((int(master) & _MASK) ^ 0x5DEECE66D)
    for i in path:
        s = _mix((s + _GAMMA * ((int(i) & _MASK) + 1)) & _MASK)
    return s


def numpy_rng(master: int, *path: int) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master, *path))
