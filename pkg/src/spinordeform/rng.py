"""SplitMix64 generator used for reproducible sample points and random draws.

The update is the standard one: add the golden-ratio increment, then two
xor-shift-multiply rounds.  Doubles take the top 53 bits.
"""

from __future__ import annotations

import numpy as np

__all__ = ["SplitMix64"]

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


class SplitMix64:
    def __init__(self, seed: int = 0):
        if seed < 0:
            raise ValueError("seed must be non-negative")
        self.state = int(seed) & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK
        return z ^ (z >> 31)

    def random(self) -> float:
        """Uniform double in ``[0, 1)``."""
        return (self.next_u64() >> 11) * 2.0**-53

    def uniform(self, low=0.0, high=1.0, size=None):
        """Same calling convention as ``numpy.random.Generator.uniform``."""
        if size is None:
            return low + (high - low) * self.random()
        shape = (size,) if isinstance(size, int) else tuple(size)
        n = int(np.prod(shape))
        u = np.array([self.random() for _ in range(n)]).reshape(shape)
        return np.asarray(low) + (np.asarray(high) - np.asarray(low)) * u
