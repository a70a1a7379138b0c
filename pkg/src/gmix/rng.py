"""Counter-based standard normals.

Entry ``i`` of stream ``stream`` under master seed ``seed`` is a pure
function of ``(seed, stream, i)``, so any slice of an array can be produced
independently and parallel order never changes the values.

Generator (fixed for release 0.1):

* Philox4x32-10 with key ``(seed_lo, seed_hi)`` and counter
  ``(m_lo, m_hi, stream_lo, stream_hi)`` where ``m = i // 2``;
* the four 32-bit outputs form two 64-bit words whose top 53 bits give
  uniforms ``u = (v + 0.5) / 2**53`` in the open interval (0, 1);
* Box-Muller turns ``(u1, u2)`` into two normals; even ``i`` takes the
  cosine branch, odd ``i`` the sine branch.
"""

from __future__ import annotations

import numpy as np

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = 0x9E3779B9
_W1 = 0xBB67AE85
_MASK = np.uint64(0xFFFFFFFF)
_SHIFT32 = np.uint64(32)
_CHUNK = 1 << 20
U64_MAX = (1 << 64) - 1


def philox4x32(ctr, key, rounds: int = 10):
    """Philox4x32 block function on arrays of counters.

    ``ctr`` is a 4-tuple of uint64 arrays holding 32-bit words, ``key`` a
    pair of Python ints below 2**32. Returns four uint64 arrays of 32-bit words.
    """
    c0, c1, c2, c3 = (np.asarray(c, dtype=np.uint64) for c in ctr)
    k0, k1 = int(key[0]), int(key[1])
    for _ in range(rounds):
        p0 = c0 * _M0
        p1 = c2 * _M1
        c0, c1, c2, c3 = (
            (p1 >> _SHIFT32) ^ c1 ^ np.uint64(k0),
            p1 & _MASK,
            (p0 >> _SHIFT32) ^ c3 ^ np.uint64(k1),
            p0 & _MASK,
        )
        k0 = (k0 + _W0) & 0xFFFFFFFF
        k1 = (k1 + _W1) & 0xFFFFFFFF
    return c0, c1, c2, c3


def _check_u64(name: str, value: int) -> int:
    value = int(value)
    if not 0 <= value <= U64_MAX:
        raise ValueError(f"{name} must be an unsigned 64-bit integer, got {value}")
    return value


def _normals_block(seed: int, stream: int, start: int, count: int) -> np.ndarray:
    first = start // 2
    pairs = np.arange(first, (start + count + 1) // 2, dtype=np.uint64)
    ctr = (
        pairs & _MASK,
        pairs >> _SHIFT32,
        np.full(pairs.shape, stream & 0xFFFFFFFF, dtype=np.uint64),
        np.full(pairs.shape, stream >> 32, dtype=np.uint64),
    )
    x0, x1, x2, x3 = philox4x32(ctr, (seed & 0xFFFFFFFF, seed >> 32))
    scale = 2.0 ** -53
    u1 = (((x0 << _SHIFT32) | x1) >> np.uint64(11)).astype(np.float64) * scale + 0.5 * scale
    u2 = (((x2 << _SHIFT32) | x3) >> np.uint64(11)).astype(np.float64) * scale + 0.5 * scale
    r = np.sqrt(-2.0 * np.log(u1))
    angle = 2.0 * np.pi * u2
    out = np.empty(2 * pairs.size)
    out[0::2] = r * np.cos(angle)
    out[1::2] = r * np.sin(angle)
    offset = start - 2 * first
    return out[offset:offset + count]


def standard_normals(seed: int, stream: int, count: int, start: int = 0) -> np.ndarray:
    """Entries ``start .. start + count - 1`` of the normal stream."""
    seed = _check_u64("seed", seed)
    stream = _check_u64("stream", stream)
    if count < 0 or start < 0:
        raise ValueError("count and start must be nonnegative")
    out = np.empty(count)
    for lo in range(0, count, _CHUNK):
        hi = min(count, lo + _CHUNK)
        out[lo:hi] = _normals_block(seed, stream, start + lo, hi - lo)
    return out
