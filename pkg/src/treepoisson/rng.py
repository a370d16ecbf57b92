"""SplitMix64: the portable generator behind every randomised artifact.

The output stream is fully specified by the seed, so random measures written
by the CLI can be regenerated bit-for-bit by any other implementation.
Uniform doubles use the top 53 bits: ``(x >> 11) * 2**-53``.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


class SplitMix64:
    def __init__(self, seed: int):
        if not 0 <= seed <= _MASK:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
        self.state = seed

    def next_u64(self) -> int:
        self.state = (self.state + _GAMMA) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def uniform(self) -> float:
        """Uniform double in ``[0, 1)``."""
        return (self.next_u64() >> 11) * 2.0**-53

    def complex_unit_square(self) -> complex:
        """Uniform on ``[0,1) x [0,1)``; real part drawn first."""
        re = self.uniform()
        return complex(re, self.uniform())

    def split(self) -> "SplitMix64":
        """Independent child stream seeded from the next output."""
        return SplitMix64(self.next_u64())
