"""Deterministic pseudorandom stream used wherever reproducibility is contractual.

A 64-bit seed is expanded with splitmix64 into the 256-bit state of a
xoshiro256** generator.  Doubles are derived as ``(u64 >> 11) * 2**-53`` and
standard normals from consecutive double pairs via Box-Muller, emitted in
(cos, sin) order.  Consumers rely on this exact sequence: the same seed must
produce the same stream on every platform and in every release.
"""
from __future__ import annotations

import math

import numpy as np

_MASK = (1 << 64) - 1


def _splitmix64(state: int):
    while True:
        state = (state + 0x9E3779B97F4A7C15) & _MASK
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        yield (z ^ (z >> 31)) & _MASK


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK


class DeterministicRng:
    """xoshiro256** seeded via splitmix64."""

    def __init__(self, seed: int):
        sm = _splitmix64(seed & _MASK)
        self._s = [next(sm) for _ in range(4)]

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s
        result = (_rotl((s1 * 5) & _MASK, 7) * 9) & _MASK
        t = (s1 << 17) & _MASK
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s = [s0, s1, s2, s3]
        return result

    def random(self) -> float:
        """Uniform double in [0, 1)."""
        return (self.next_u64() >> 11) * 2.0**-53

    def randint(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection-free modulo of a double."""
        return min(int(self.random() * n), n - 1)

    def normals(self, count: int) -> np.ndarray:
        """`count` standard normals, Box-Muller over consecutive double pairs."""
        out = np.empty(count, dtype=np.float64)
        i = 0
        while i < count:
            # u1 in (0, 1] so the log is finite
            u1 = ((self.next_u64() >> 11) + 1) * 2.0**-53
            u2 = (self.next_u64() >> 11) * 2.0**-53
            r = math.sqrt(-2.0 * math.log(u1))
            out[i] = r * math.cos(2.0 * math.pi * u2)
            if i + 1 < count:
                out[i + 1] = r * math.sin(2.0 * math.pi * u2)
            i += 2
        return out

    def choice_weighted(self, weights: np.ndarray) -> int:
        """Index drawn proportionally to nonnegative `weights` (sum > 0)."""
        cum = np.cumsum(weights, dtype=np.float64)
        total = float(cum[-1])
        u = self.random() * total
        return min(int(np.searchsorted(cum, u, side="right")), len(weights) - 1)
