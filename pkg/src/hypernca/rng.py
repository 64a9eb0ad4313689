"""Deterministic random number plumbing.

All randomness in the package flows through numpy's PCG64 bit generator,
seeded either directly or through `derive_seed`, a splitmix64-based mixer
that turns (master seed, stream label, counter) into an independent
64-bit seed. Both algorithms are published and platform-independent, so
a run is reproducible from its master seed on any machine.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1

# Fixed stream labels; keeping them here avoids accidental collisions.
STREAM_ASK = 0xA5C01
STREAM_EVAL = 0xE7A1
STREAM_RESET = 0x5E5E7


def splitmix64(x: int) -> int:
    """One splitmix64 step: mixes a 64-bit state into a 64-bit output."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(master: int, stream: int, counter: int = 0) -> int:
    """Derive an independent 64-bit seed from (master, stream, counter)."""
    h = splitmix64(master & _MASK64)
    h = splitmix64(h ^ (stream & _MASK64))
    h = splitmix64(h ^ (counter & _MASK64))
    return h


def generator(seed: int) -> np.random.Generator:
    """A fresh PCG64 generator for the given 64-bit seed."""
    return np.random.Generator(np.random.PCG64(seed & _MASK64))
