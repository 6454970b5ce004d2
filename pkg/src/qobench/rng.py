"""Pinned deterministic random generator for reproducible sampling.

Splits must be bit-identical across runs, platforms, and reimplementations in
other languages, so sampling is built on SplitMix64 — a 64-bit counter-based
generator with fixed published constants (Steele, Lea & Flood; the same
algorithm as Java's SplittableRandom) — rather than on any standard library PRNG
whose stream is an implementation detail.

Constants:
    increment  0x9E3779B97F4A7C15   (2^64 / golden ratio)
    mix mul 1  0xBF58476D1CE4E5B9
    mix mul 2  0x94D049BB133111EB

Bounded draws use rejection sampling, so they are unbiased and reproducible
independent of the platform's integer width.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_INCREMENT = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


class SplitMix64:
    """Deterministic 64-bit generator; the full stream is pinned by the seed."""

    def __init__(self, seed: int) -> None:
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + _INCREMENT) & _MASK
        z = self._state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        """Uniform integer in [0, bound), bias-free via rejection."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        limit = (_MASK + 1) - ((_MASK + 1) % bound)
        while True:
            draw = self.next_u64()
            if draw < limit:
                return draw % bound

    def partial_shuffle(self, items: list, count: int) -> list:
        """Fisher–Yates the first ``count`` positions of ``items`` in place.

        After the call, items[:count] is a uniform sample without replacement
        from the original list. Returns ``items`` for convenience.
        """
        n = len(items)
        if not 0 <= count <= n:
            raise ValueError(f"count {count} out of range for {n} items")
        for i in range(count):
            j = i + self.below(n - i)
            items[i], items[j] = items[j], items[i]
        return items

    def choice_index(self, length: int) -> int:
        return self.below(length)
