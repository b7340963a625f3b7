"""Counter-based uniform draws.

A draw is a pure function of ``(key, index)``: unit ``i`` gets the same value
whether it is generated alone, in a block, or on another thread. Keys are
derived from a master seed and a path of stream labels with
:func:`stream_key`; values come from the SplitMix64 output function applied to
``key + (index + 1) * GOLDEN``.
"""
import hashlib

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def _mix_int(z):
    z = (z ^ (z >> 30)) * _M1 & MASK64
    z = (z ^ (z >> 27)) * _M2 & MASK64
    return z ^ (z >> 31)


def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def stream_key(seed, *path):
    """Derive a 64-bit stream key from a seed and labels (str or int)."""
    key = _mix_int((int(seed) & MASK64) ^ 0x5851F42D4C957F2D)
    for label in path:
        digest = hashlib.blake2b(repr(label).encode(), digest_size=8).digest()
        key = _mix_int((key + GOLDEN) & MASK64 ^ int.from_bytes(digest, "little"))
    return key


def uniforms(key, index):
    """Uniform draws in the open interval (0, 1), one per entry of ``index``."""
    idx = np.asarray(index, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (idx + np.uint64(1)) * np.uint64(GOLDEN) + np.uint64(key & MASK64)
        z = _mix(z)
    return ((z >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
