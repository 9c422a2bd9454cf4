"""Seeded splitmix64 generator.

Random width profiles and solver start vectors must be bit-reproducible
across platforms and numpy versions, so we keep the generator explicit
instead of relying on numpy's default bit generator.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def _mix(z: int) -> int:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & _MASK
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK
    return z ^ (z >> 31)


def splitmix64(seed: int, count: int) -> np.ndarray:
    """Return `count` raw 64-bit outputs of splitmix64 started at `seed`."""
    x = seed & _MASK
    out = np.empty(count, dtype=np.uint64)
    for i in range(count):
        x = (x + _GAMMA) & _MASK
        out[i] = _mix(x)
    return out


def unit_floats(seed: int, count: int) -> np.ndarray:
    """`count` doubles in [0, 1), one per splitmix64 output (53-bit mantissa)."""
    raw = splitmix64(seed, count)
    return (raw >> np.uint64(11)).astype(np.float64) * 2.0**-53


def derive_seed(seed: int, *indices: int) -> int:
    """Fold integer indices into `seed` to get independent substreams.

    Used to give each strip profile (and each solver instance) its own
    stream from one master seed.
    """
    x = seed & _MASK
    for k in indices:
        x = _mix((x + _GAMMA + (k & _MASK)) & _MASK)
    return x
