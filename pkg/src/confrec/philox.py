"""Counter-based random numbers: Philox4x32-10.

State transition: the generator is stateless. Output block i is
``philox(counter=(c0,c1,c2,c3), key=(k0,k1))`` where each round maps

    (c0,c1,c2,c3) -> (mulhi(c2,M1)^c1^k0, mullo(c2,M1), mulhi(c0,M0)^c3^k1, mullo(c0,M0))

with M0=0xD2511F53, M1=0xCD9E8D57, and the key is bumped by the Weyl
constants (0x9E3779B9, 0xBB67AE85) after every round; 10 rounds total.

We address streams by *sample index*: the 128-bit counter is laid out as
(sample_lo, sample_hi, column, domain_tag) and the key carries the 64-bit
seed. Every (seed, sample, column, tag) combination is an independent
deterministic draw, so sampling is reproducible and order-independent
under any parallel chunking.
"""

from __future__ import annotations

import numpy as np

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint32(0x9E3779B9)
_W1 = np.uint32(0xBB67AE85)
_MASK32 = np.uint64(0xFFFFFFFF)

# domain tags keep unrelated uses of the same seed decorrelated
TAG_DIGITS = 0x01
TAG_BLOCKS = 0x02
TAG_POINTS = 0x03
TAG_PAIRS = 0x04


def philox4x32(c0, c1, c2, c3, k0, k1):
    """One Philox4x32-10 block per element; uint32 arrays in, 4 uint32 out."""
    c0 = np.atleast_1d(np.asarray(c0, dtype=np.uint32))
    c1 = np.atleast_1d(np.asarray(c1, dtype=np.uint32))
    c2 = np.atleast_1d(np.asarray(c2, dtype=np.uint32))
    c3 = np.atleast_1d(np.asarray(c3, dtype=np.uint32))
    k0 = np.atleast_1d(np.asarray(k0, dtype=np.uint32))
    k1 = np.atleast_1d(np.asarray(k1, dtype=np.uint32))
    for _ in range(10):
        p0 = c0.astype(np.uint64) * _M0
        p1 = c2.astype(np.uint64) * _M1
        hi0 = (p0 >> np.uint64(32)).astype(np.uint32)
        lo0 = (p0 & _MASK32).astype(np.uint32)
        hi1 = (p1 >> np.uint64(32)).astype(np.uint32)
        lo1 = (p1 & _MASK32).astype(np.uint32)
        c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
        k0 = k0 + _W0  # uint32 wraparound is the Weyl sequence, not an error
        k1 = k1 + _W1
    return c0, c1, c2, c3


def _to_double(hi: np.ndarray, lo: np.ndarray) -> np.ndarray:
    """53-bit uniform double in [0, 1) from two 32-bit words."""
    a = (hi >> np.uint32(5)).astype(np.uint64)
    b = (lo >> np.uint32(6)).astype(np.uint64)
    return ((a << np.uint64(26)) | b).astype(np.float64) * (1.0 / 9007199254740992.0)


def uniform_matrix(seed: int, count: int, cols: int, tag: int, start: int = 0) -> np.ndarray:
    """(count, cols) matrix of uniforms; entry (i, j) depends only on
    (seed, start + i, j, tag)."""
    seed = int(seed) & 0xFFFFFFFFFFFFFFFF
    k0 = np.uint32(seed & 0xFFFFFFFF)
    k1 = np.uint32(seed >> 32)
    idx = np.arange(start, start + count, dtype=np.uint64)
    c0 = (idx & _MASK32).astype(np.uint32)
    c1 = (idx >> np.uint64(32)).astype(np.uint32)
    out = np.empty((count, cols), dtype=np.float64)
    for blk in range((cols + 1) // 2):
        c2 = np.full(count, blk, dtype=np.uint32)
        c3 = np.full(count, tag, dtype=np.uint32)
        w0, w1, w2, w3 = philox4x32(c0, c1, c2, c3, k0, k1)
        j = 2 * blk
        out[:, j] = _to_double(w0, w1)
        if j + 1 < cols:
            out[:, j + 1] = _to_double(w2, w3)
    return out


def categorical_matrix(
    seed: int, count: int, cols: int, probs: np.ndarray, tag: int, start: int = 0
) -> np.ndarray:
    """(count, cols) i.i.d. samples from a finite distribution, uint16."""
    p = np.asarray(probs, dtype=np.float64)
    if p.ndim != 1 or len(p) < 1 or np.any(p < 0):
        raise ValueError("probs must be a nonnegative vector")
    cum = np.cumsum(p / p.sum())
    u = uniform_matrix(seed, count, cols, tag, start)
    sym = np.searchsorted(cum, u, side="right")
    return np.minimum(sym, len(p) - 1).astype(np.uint16)
