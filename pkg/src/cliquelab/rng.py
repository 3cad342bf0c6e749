"""Seed derivation and bounded integer draws.

Every random stream in the package comes from a PCG64 bit generator whose
seed is derived from a user seed plus (point_index, trial_index) with the
SplitMix64 finalizer.  Only raw 64-bit outputs are consumed, and bounded
draws are done here by rejection, so streams do not depend on numpy's
higher-level sampling routines.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    """One SplitMix64 step: add the golden gamma, then finalize."""
    z = (x + _GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, point_index: int = 0, trial_index: int = 0) -> int:
    """Mix a base seed with two stream indices into a 64-bit trial seed.

    mix(s, p, t) = splitmix64(splitmix64(splitmix64(s) ^ p) ^ t)
    """
    if seed < 0 or seed > MASK64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    if point_index < 0 or trial_index < 0:
        raise ValueError("stream indices must be non-negative")
    h = splitmix64(seed)
    h = splitmix64(h ^ (point_index & MASK64))
    return splitmix64(h ^ (trial_index & MASK64))


class Stream:
    """Buffered PCG64 stream producing unbiased integers in [0, bound)."""

    _BATCH = 256

    def __init__(self, seed: int):
        self.seed = seed & MASK64
        self._bitgen = np.random.PCG64(self.seed)
        self._buf: list[int] = []
        self._pos = 0

    def next_u64(self) -> int:
        if self._pos >= len(self._buf):
            self._buf = self._bitgen.random_raw(self._BATCH).tolist()
            self._pos = 0
        x = self._buf[self._pos]
        self._pos += 1
        return x

    def below(self, bound: int) -> int:
        # Lemire's multiply-shift with rejection; exact for any bound < 2**64.
        if bound <= 0:
            raise ValueError("bound must be positive")
        threshold = (1 << 64) % bound
        while True:
            prod = self.next_u64() * bound
            if (prod & MASK64) >= threshold:
                return prod >> 64


def trial_stream(seed: int, point_index: int = 0, trial_index: int = 0) -> Stream:
    return Stream(derive_seed(seed, point_index, trial_index))
