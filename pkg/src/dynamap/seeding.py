"""Deterministic pseudo-randomness (SplitMix64).

All shuffles, permutations, and subsamples in the toolkit go through
this module so that runs are bit-reproducible regardless of the numpy
version or platform RNG state.
"""

from __future__ import annotations

from .hashing import fnv1a_64_text

_MASK64 = 0xFFFFFFFFFFFFFFFF


def derive_seed(base: int, tag: str) -> int:
    """Mix a base seed with a textual tag into a fresh 64-bit seed.

    Used to give every epoch, subset, and artifact its own independent
    stream while keeping a single user-facing seed.
    """
    rng = SplitMix64((base & _MASK64) ^ fnv1a_64_text(tag))
    return rng.next()


class SplitMix64:
    """Sebastiano Vigna's SplitMix64 generator.

    Tiny state, full 64-bit avalanche per step, and trivially portable;
    quality is more than enough for shuffling sample orders.
    """

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n) without modulo bias."""
        if n <= 0:
            raise ValueError("below() needs n >= 1")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            value = self.next()
            if value < limit:
                return value % n

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]

    def permutation(self, n: int) -> list[int]:
        order = list(range(n))
        self.shuffle(order)
        return order

    def sample_indices(self, n: int, k: int) -> list[int]:
        """k distinct indices from range(n), returned in ascending order.

        Ascending output keeps subsampled datasets in their original
        relative order.
        """
        if not 0 <= k <= n:
            raise ValueError(f"cannot sample {k} of {n}")
        pool = list(range(n))
        for i in range(k):
            j = i + self.below(n - i)
            pool[i], pool[j] = pool[j], pool[i]
        return sorted(pool[:k])
