"""Counter-based per-replica random streams.

Every replica draws from its own Philox4x64-10 stream keyed by
(master_seed, replica_index), so results are reproducible under any thread
count and any batching: a replica's randomness is a pure function of its
key and a counter.  The block function is implemented here so the jitted
simulation kernels can call it in nopython mode; it is tested bit-for-bit
against :class:`numpy.random.Philox`, which uses the identical algorithm
(numpy advances the counter before producing each block, and so do we).

Derived variates (shared by the kernels and the pure-Python reference
engine, which must stay bit-identical):

* uniform double in [0, 1): ``(u64 >> 11) * 2**-53``
* exponential(1): ``-log(1 - u)``
* standard normal pair: Marsaglia polar method (uses only log/sqrt, which
  are bit-stable across the jitted and interpreted paths, unlike sin/cos)
* index in [0, k): ``min(int(u * k), k - 1)``
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit, types

__all__ = ["state_new", "ReplicaStream", "U64_TO_DOUBLE"]

U64_TO_DOUBLE = 1.0 / 9007199254740992.0  # 2**-53

# state vector layout (uint64): ctr0..ctr3, key0, key1, buffer position
_CTR0, _CTR1, _CTR2, _CTR3, _KEY0, _KEY1, _POS = range(7)

_M0 = np.uint64(0xD2E7470EE14C6C93)
_M1 = np.uint64(0xCA5A826395121157)
_W0 = np.uint64(0x9E3779B97F4A7C15)
_W1 = np.uint64(0xBB67AE8584CAA73B)
_MASK32 = np.uint64(0xFFFFFFFF)
_SH32 = np.uint64(32)
_SH11 = np.uint64(11)
_ONE = np.uint64(1)
_ZERO = np.uint64(0)


@njit(types.uint64(types.uint64, types.uint64), cache=True, inline="always")
def _mulhi(a, b):
    alo = a & _MASK32
    ahi = a >> _SH32
    blo = b & _MASK32
    bhi = b >> _SH32
    lolo = alo * blo
    m1 = ahi * blo
    m2 = alo * bhi
    carry = ((lolo >> _SH32) + (m1 & _MASK32) + (m2 & _MASK32)) >> _SH32
    return ahi * bhi + (m1 >> _SH32) + (m2 >> _SH32) + carry


@njit(cache=True)
def _refill(st, buf):
    st[_CTR0] += _ONE
    if st[_CTR0] == _ZERO:
        st[_CTR1] += _ONE
    c0, c1, c2, c3 = st[_CTR0], st[_CTR1], st[_CTR2], st[_CTR3]
    k0, k1 = st[_KEY0], st[_KEY1]
    for _ in range(10):
        hi0 = _mulhi(_M0, c0)
        lo0 = _M0 * c0
        hi1 = _mulhi(_M1, c2)
        lo1 = _M1 * c2
        c0 = hi1 ^ c1 ^ k0
        c1 = lo1
        c2 = hi0 ^ c3 ^ k1
        c3 = lo0
        k0 = k0 + _W0
        k1 = k1 + _W1
    buf[0] = c0
    buf[1] = c1
    buf[2] = c2
    buf[3] = c3
    st[_POS] = _ZERO


@njit(cache=True)
def next_u64(st, buf):
    if st[_POS] >= np.uint64(4):
        _refill(st, buf)
    v = buf[st[_POS]]
    st[_POS] += _ONE
    return v


@njit(cache=True)
def next_uniform(st, buf):
    return float(next_u64(st, buf) >> _SH11) * U64_TO_DOUBLE


@njit(cache=True)
def next_exponential(st, buf):
    return -math.log(1.0 - next_uniform(st, buf))


@njit(cache=True)
def next_index(st, buf, k):
    i = int(next_uniform(st, buf) * k)
    if i >= k:
        i = k - 1
    return i


@njit(cache=True)
def next_normal_pair(st, buf):
    while True:
        u = 2.0 * next_uniform(st, buf) - 1.0
        v = 2.0 * next_uniform(st, buf) - 1.0
        s = u * u + v * v
        if 0.0 < s < 1.0:
            f = math.sqrt(-2.0 * math.log(s) / s)
            return u * f, v * f


@njit(cache=True)
def state_new(master_seed, replica):
    """Fresh stream state (state vector, output buffer) for one replica."""
    st = np.zeros(7, dtype=np.uint64)
    st[_KEY0] = np.uint64(master_seed)
    st[_KEY1] = np.uint64(replica)
    st[_POS] = np.uint64(4)  # empty buffer, first use refills
    buf = np.zeros(4, dtype=np.uint64)
    return st, buf


class ReplicaStream:
    """Interpreted mirror of the in-kernel stream, backed by numpy's Philox.

    Consumes the identical raw 64-bit sequence and applies the identical
    variate derivations, so reference trajectories match the jitted kernels
    bit for bit.
    """

    _BLOCK = 4096

    def __init__(self, master_seed: int, replica: int):
        self._bg = np.random.Philox(key=np.array([master_seed, replica], dtype=np.uint64))
        self._raw = np.empty(0, dtype=np.uint64)
        self._pos = 0

    def u64(self) -> int:
        if self._pos >= len(self._raw):
            self._raw = self._bg.random_raw(self._BLOCK)
            self._pos = 0
        v = self._raw[self._pos]
        self._pos += 1
        return int(v)

    def uniform(self) -> float:
        return float(self.u64() >> 11) * U64_TO_DOUBLE

    def exponential(self) -> float:
        return -math.log(1.0 - self.uniform())

    def index(self, k: int) -> int:
        i = int(self.uniform() * k)
        return k - 1 if i >= k else i

    def normal_pair(self):
        while True:
            u = 2.0 * self.uniform() - 1.0
            v = 2.0 * self.uniform() - 1.0
            s = u * u + v * v
            if 0.0 < s < 1.0:
                f = math.sqrt(-2.0 * math.log(s) / s)
                return u * f, v * f
