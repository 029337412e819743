"""Deterministic seed derivation for repeated experiments.

Per-repetition and per-purpose seeds come from a splitmix64 chain over the
master seed, so any run is reproducible from (dataset, config, master seed)
alone. Constants are the standard splitmix64 ones; documented here so the
derivation can be reproduced independently:

    step(z)  = mix(z + 0x9E3779B97F4A7C15)
    mix(z)   = h2(h1(z)) ^ (h1(h1(z)) >> 31)      (64-bit, wrapping)
    h1(z)    = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    h2(z)    = (z ^ (z >> 27)) * 0x94D049BB133111EB

derive_seed(master, a, b, ...) feeds each path element into the chain.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def derive_seed(master: int, *path: int) -> int:
    """Derive a 64-bit sub-seed from a master seed and an index path."""
    z = master & _MASK
    if not path:
        return _mix((z + _GOLDEN) & _MASK)
    for element in path:
        z = _mix((z + _GOLDEN + element) & _MASK)
    return z
