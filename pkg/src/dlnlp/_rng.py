"""Portable seedable random number generation.

Instances must be reproducible bit-for-bit across machines and across
reimplementations of this toolkit, so we avoid library generators whose
streams are implementation-defined and pin the exact algorithm here.

Generator: SplitMix64.  For a 64-bit seed ``s``, raw output ``i`` (counting
from 0) is ``mix(s + (i+1) * 0x9E3779B97F4A7C15)`` with all arithmetic
modulo 2**64, where::

    mix(z): z ^= z >> 30; z *= 0xBF58476D1CE4E5B9
            z ^= z >> 27; z *= 0x94D049BB133111EB
            z ^= z >> 31; return z

Uniforms on [0, 1) take the top 53 bits: ``(z >> 11) * 2**-53``.

Normals use the Box-Muller transform on consecutive raw pairs
``(z_{2j}, z_{2j+1})``::

    u1 = ((z_{2j} >> 11) + 1) * 2**-53      # in (0, 1], so log is safe
    u2 = (z_{2j+1} >> 11) * 2**-53          # in [0, 1)
    r = sqrt(-2 ln u1); theta = 2 pi u2
    n_{2j} = r cos(theta); n_{2j+1} = r sin(theta)

A request for k normals consumes exactly 2*ceil(k/2) raw outputs (the odd
tail discards the sine variate).  The instance generator draws the matrix
entries first (m*n normals, filling rows left to right), then the planted
point (n uniforms); see lp_core.gen_instance.
"""
from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U64_MASK = (1 << 64) - 1
_INV_2_53 = float(2.0**-53)


def _mix(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> np.uint64(30))
    z = z * _MIX1
    z = z ^ (z >> np.uint64(27))
    z = z * _MIX2
    z = z ^ (z >> np.uint64(31))
    return z


class PortableRng:
    """SplitMix64 stream with uniform/normal draws as documented above."""

    def __init__(self, seed: int):
        if not 0 <= seed <= _U64_MASK:
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        self._seed = np.uint64(seed)
        self._counter = 0  # raw outputs consumed so far

    def raw(self, count: int) -> np.ndarray:
        """Next `count` raw 64-bit outputs as a uint64 array."""
        if count < 0:
            raise ValueError("count must be nonnegative")
        start = self._counter + 1
        idx = np.arange(start, start + count, dtype=np.uint64)
        with np.errstate(over="ignore"):
            out = _mix(self._seed + idx * _GOLDEN)
        self._counter += count
        return out

    def uniforms(self, count: int) -> np.ndarray:
        """`count` doubles uniform on [0, 1)."""
        z = self.raw(count)
        return (z >> np.uint64(11)).astype(np.float64) * _INV_2_53

    def normals(self, count: int) -> np.ndarray:
        """`count` standard normal doubles via Box-Muller."""
        pairs = (count + 1) // 2
        z = self.raw(2 * pairs)
        u1 = ((z[0::2] >> np.uint64(11)).astype(np.float64) + 1.0) * _INV_2_53
        u2 = (z[1::2] >> np.uint64(11)).astype(np.float64) * _INV_2_53
        r = np.sqrt(-2.0 * np.log(u1))
        theta = 2.0 * np.pi * u2
        out = np.empty(2 * pairs)
        out[0::2] = r * np.cos(theta)
        out[1::2] = r * np.sin(theta)
        return out[:count]
