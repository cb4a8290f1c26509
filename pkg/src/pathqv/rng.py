"""Counter-based normal variates for reproducible path construction.

Each draw is a pure function of (seed, stream, counter): there is no
generator state, so refinement order, thread count, and call history cannot
change any value.  The mixing function is the SplitMix64 finalizer, applied
to the three key components in a fixed chain; two mixed words feed a
Box-Muller transform.
"""

from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_STREAM_SALT = np.uint64(0xD1B54A32D192ED03)
_PAIR_SALT = np.uint64(0x8CB92BA72F3D8DD7)

_U53 = np.float64(1.0 / (1 << 53))


def _mix64(z: np.ndarray) -> np.ndarray:
    # wraparound modulo 2^64 is the point of the finalizer
    with np.errstate(over="ignore"):
        z = z + _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def _keyed_word(seed: int, stream: int, counter) -> np.ndarray:
    """One mixed 64-bit word per counter value (vectorized over counter)."""
    c = np.asarray(counter, dtype=np.uint64)
    with np.errstate(over="ignore"):
        s = _mix64(_mix64(np.uint64(seed & 0xFFFFFFFFFFFFFFFF)))
        s = _mix64(s ^ (np.uint64(stream & 0xFFFFFFFFFFFFFFFF) * _STREAM_SALT))
        key = s ^ c
    return _mix64(key)


def uniforms(seed: int, stream: int, counter) -> tuple[np.ndarray, np.ndarray]:
    """Two independent uniforms per counter, the first in (0,1], the second in [0,1)."""
    w1 = _keyed_word(seed, stream, counter)
    w2 = _mix64(w1 ^ _PAIR_SALT)
    u1 = ((w1 >> np.uint64(11)).astype(np.float64) + 1.0) * _U53
    u2 = (w2 >> np.uint64(11)).astype(np.float64) * _U53
    return u1, u2


def normals(seed: int, stream: int, counter) -> np.ndarray:
    """Standard normals keyed by (seed, stream, counter); shape follows counter."""
    u1, u2 = uniforms(seed, stream, counter)
    out = np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)
    return out


def normals_multi_seed(seeds, stream: int, counter: int) -> np.ndarray:
    """One normal per seed at a fixed (stream, counter); vectorized over seeds."""
    with np.errstate(over="ignore"):
        s = _mix64(_mix64(np.asarray(seeds, dtype=np.uint64)))
        s = _mix64(s ^ (np.uint64(stream) * _STREAM_SALT))
        w1 = _mix64(s ^ np.uint64(counter))
        w2 = _mix64(w1 ^ _PAIR_SALT)
    u1 = ((w1 >> np.uint64(11)).astype(np.float64) + 1.0) * _U53
    u2 = (w2 >> np.uint64(11)).astype(np.float64) * _U53
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)
