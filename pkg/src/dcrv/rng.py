"""SplitMix64 uniform stream.

The generator is fully specified so other implementations can reproduce
sampled output bit for bit::

    state <- (state + 0x9E3779B97F4A7C15) mod 2**64
    z <- state
    z <- (z xor (z >> 30)) * 0xBF58476D1CE4E5B9 mod 2**64
    z <- (z xor (z >> 27)) * 0x94D049BB133111EB mod 2**64
    z <- z xor (z >> 31)
    u <- (z >> 11) * 2**-53

The initial state is the seed reduced mod 2**64.  Each ``u`` lies in
[0, 1) on the 2**-53 grid.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
INV_2_53 = 2.0**-53


def mix64(z: int) -> int:
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    return z ^ (z >> 31)


class SplitMix64:
    def __init__(self, seed: int = 0):
        self.state = int(seed) & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GAMMA) & MASK64
        return mix64(self.state)

    def random(self) -> float:
        return (self.next_u64() >> 11) * INV_2_53

    def uniforms(self, count: int) -> np.ndarray:
        """Next ``count`` variates as a float64 array (same values as ``random``)."""
        if count <= 0:
            return np.empty(0, dtype=np.float64)
        steps = np.arange(1, count + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            z = np.uint64(self.state) + steps * np.uint64(GAMMA)
            z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX1)
            z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX2)
            z = z ^ (z >> np.uint64(31))
        self.state = (self.state + count * GAMMA) & MASK64
        return (z >> np.uint64(11)).astype(np.float64) * INV_2_53
