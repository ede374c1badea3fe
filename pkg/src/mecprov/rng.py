"""Seedable, platform-independent 64-bit PRNG.

Request streams must replay bit-identically across machines and runs, so the
generator algorithm is part of the tool's contract: SplitMix64 (the
Steele/Lea/Vigna parameters), with bounded draws reduced by 128-bit
multiply-shift. Do not swap in ``random.Random``: its algorithm is not
pinned by this project.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


class SplitMix64:
    """SplitMix64 stream over a 64-bit counter state."""

    __slots__ = ("_state",)

    def __init__(self, seed: int) -> None:
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
        return z ^ (z >> 31)

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n); bias below n/2**64 is ignored."""
        if n <= 0:
            raise ValueError("bound must be positive, got %r" % n)
        return (self.next_u64() * n) >> 64

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in the inclusive range [lo, hi]."""
        if hi < lo:
            raise ValueError("empty range [%r, %r]" % (lo, hi))
        return lo + self.randbelow(hi - lo + 1)

    def sample(self, n: int, k: int) -> list[int]:
        """k distinct integers from range(n), by partial Fisher-Yates.

        Consumes exactly k draws; result order is the shuffle order, not
        sorted.
        """
        if not 0 <= k <= n:
            raise ValueError("cannot sample %d items from %d" % (k, n))
        pool = list(range(n))
        for j in range(k):
            r = j + self.randbelow(n - j)
            pool[j], pool[r] = pool[r], pool[j]
        return pool[:k]
