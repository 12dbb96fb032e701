"""Counter-based pseudo-random numbers with keyed substreams.

The generator ("sm64ctr-v1") is the splitmix64 output function applied to an
affine counter: value(key, ctr) = mix64(key + (ctr+1)*PHI).  Being stateless,
any (key, counter) pair can be re-evaluated at will and always yields the
same draw, which is exactly what coupling-from-the-past needs to reuse the
randomness of a past time slot across doubled horizons.  Substream keys are
derived by re-mixing, so streams for different ids are decorrelated.

The same arithmetic is implemented scalar (here and in the pure-Python
kernels), vectorized (numpy uint64), and in the compiled kernels; the test
suite pins all three to identical outputs.
"""

from __future__ import annotations

import numpy as np

GENERATOR_ID = "sm64ctr-v1"

_MASK = (1 << 64) - 1
_PHI = 0x9E3779B97F4A7C15
_SALT = 0xD1B54A32D192ED03
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """splitmix64 finalizer on a 64-bit integer."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * _M1) & _MASK
    z = ((z ^ (z >> 27)) * _M2) & _MASK
    return z ^ (z >> 31)


def counter_u64(key: int, ctr: int) -> int:
    return mix64((key + ((ctr + 1) * _PHI)) & _MASK)


def counter_u01(key: int, ctr: int) -> float:
    """Uniform double in [0, 1) from the top 53 bits of the draw."""
    return (counter_u64(key, ctr) >> 11) * 2.0**-53


def substream(key: int, stream_id: int) -> int:
    """Derive an independent stream key for (key, stream_id)."""
    return counter_u64(counter_u64(key, stream_id) ^ _SALT, 0)


def uniforms(key: int, count: int, start: int = 0) -> np.ndarray:
    """Vectorized counter_u01 for counters start .. start+count-1."""
    ctr = np.arange(start, start + count, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(key & _MASK) + (ctr + np.uint64(1)) * np.uint64(_PHI)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
        z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(11)).astype(np.float64) * 2.0**-53


def choice_from_cumulative(cum: np.ndarray, u: float) -> int:
    """Index of the first cumulative weight strictly above u."""
    idx = int(np.searchsorted(cum, u, side="right"))
    return min(idx, len(cum) - 1)
