"""Keccak-256 as used for every digest in the ledger.

This is the original Keccak (0x01 pad), not NIST SHA3-256 (0x06 pad):
keccak256(b"") must equal c5d24601...85a470. The standard library only
ships the NIST variant, so the permutation is implemented here. The
round body is unrolled over 25 local lanes; on CPython that is roughly
3x faster than an indexed-loop version, which matters because chain
validation and committee selection hash in tight loops.
"""

from __future__ import annotations

from functools import lru_cache

_MASK = (1 << 64) - 1

_ROUND_CONSTANTS = (
    0x0000000000000001, 0x0000000000008082, 0x800000000000808A, 0x8000000080008000,
    0x000000000000808B, 0x0000000080000001, 0x8000000080008081, 0x8000000000008009,
    0x000000000000008A, 0x0000000000000088, 0x0000000080008009, 0x000000008000000A,
    0x000000008000808B, 0x800000000000008B, 0x8000000000008089, 0x8000000000008003,
    0x8000000000008002, 0x8000000000000080, 0x000000000000800A, 0x800000008000000A,
    0x8000000080008081, 0x8000000000008080, 0x0000000080000001, 0x8000000080008008,
)

_RATE = 136  # bytes absorbed per permutation at capacity 512


def _keccak_f1600(lanes: list[int]) -> list[int]:
    """One Keccak-f[1600] permutation over 25 little-endian 64-bit lanes.

    Lane order is A[x][y] flattened as index 5*x + y.
    """
    M = _MASK
    (a00, a01, a02, a03, a04,
     a10, a11, a12, a13, a14,
     a20, a21, a22, a23, a24,
     a30, a31, a32, a33, a34,
     a40, a41, a42, a43, a44) = lanes
    for rc in _ROUND_CONSTANTS:
        # theta, rho, pi, chi, iota -- unrolled
        c0 = a00 ^ a01 ^ a02 ^ a03 ^ a04
        c1 = a10 ^ a11 ^ a12 ^ a13 ^ a14
        c2 = a20 ^ a21 ^ a22 ^ a23 ^ a24
        c3 = a30 ^ a31 ^ a32 ^ a33 ^ a34
        c4 = a40 ^ a41 ^ a42 ^ a43 ^ a44
        d0 = c4 ^ (((c1 << 1) | (c1 >> 63)) & M)
        d1 = c0 ^ (((c2 << 1) | (c2 >> 63)) & M)
        d2 = c1 ^ (((c3 << 1) | (c3 >> 63)) & M)
        d3 = c2 ^ (((c4 << 1) | (c4 >> 63)) & M)
        d4 = c3 ^ (((c0 << 1) | (c0 >> 63)) & M)
        a00 ^= d0
        a01 ^= d0
        a02 ^= d0
        a03 ^= d0
        a04 ^= d0
        a10 ^= d1
        a11 ^= d1
        a12 ^= d1
        a13 ^= d1
        a14 ^= d1
        a20 ^= d2
        a21 ^= d2
        a22 ^= d2
        a23 ^= d2
        a24 ^= d2
        a30 ^= d3
        a31 ^= d3
        a32 ^= d3
        a33 ^= d3
        a34 ^= d3
        a40 ^= d4
        a41 ^= d4
        a42 ^= d4
        a43 ^= d4
        a44 ^= d4
        b00 = a00
        b13 = ((a01 << 36) | (a01 >> 28)) & M
        b21 = ((a02 << 3) | (a02 >> 61)) & M
        b34 = ((a03 << 41) | (a03 >> 23)) & M
        b42 = ((a04 << 18) | (a04 >> 46)) & M
        b02 = ((a10 << 1) | (a10 >> 63)) & M
        b10 = ((a11 << 44) | (a11 >> 20)) & M
        b23 = ((a12 << 10) | (a12 >> 54)) & M
        b31 = ((a13 << 45) | (a13 >> 19)) & M
        b44 = ((a14 << 2) | (a14 >> 62)) & M
        b04 = ((a20 << 62) | (a20 >> 2)) & M
        b12 = ((a21 << 6) | (a21 >> 58)) & M
        b20 = ((a22 << 43) | (a22 >> 21)) & M
        b33 = ((a23 << 15) | (a23 >> 49)) & M
        b41 = ((a24 << 61) | (a24 >> 3)) & M
        b01 = ((a30 << 28) | (a30 >> 36)) & M
        b14 = ((a31 << 55) | (a31 >> 9)) & M
        b22 = ((a32 << 25) | (a32 >> 39)) & M
        b30 = ((a33 << 21) | (a33 >> 43)) & M
        b43 = ((a34 << 56) | (a34 >> 8)) & M
        b03 = ((a40 << 27) | (a40 >> 37)) & M
        b11 = ((a41 << 20) | (a41 >> 44)) & M
        b24 = ((a42 << 39) | (a42 >> 25)) & M
        b32 = ((a43 << 8) | (a43 >> 56)) & M
        b40 = ((a44 << 14) | (a44 >> 50)) & M
        a00 = b00 ^ (b20 & ~b10)
        a01 = b01 ^ (b21 & ~b11)
        a02 = b02 ^ (b22 & ~b12)
        a03 = b03 ^ (b23 & ~b13)
        a04 = b04 ^ (b24 & ~b14)
        a10 = b10 ^ (b30 & ~b20)
        a11 = b11 ^ (b31 & ~b21)
        a12 = b12 ^ (b32 & ~b22)
        a13 = b13 ^ (b33 & ~b23)
        a14 = b14 ^ (b34 & ~b24)
        a20 = b20 ^ (b40 & ~b30)
        a21 = b21 ^ (b41 & ~b31)
        a22 = b22 ^ (b42 & ~b32)
        a23 = b23 ^ (b43 & ~b33)
        a24 = b24 ^ (b44 & ~b34)
        a30 = b30 ^ (b00 & ~b40)
        a31 = b31 ^ (b01 & ~b41)
        a32 = b32 ^ (b02 & ~b42)
        a33 = b33 ^ (b03 & ~b43)
        a34 = b34 ^ (b04 & ~b44)
        a40 = b40 ^ (b10 & ~b00)
        a41 = b41 ^ (b11 & ~b01)
        a42 = b42 ^ (b12 & ~b02)
        a43 = b43 ^ (b13 & ~b03)
        a44 = b44 ^ (b14 & ~b04)
        a00 ^= rc
    return [a00, a01, a02, a03, a04,
            a10, a11, a12, a13, a14,
            a20, a21, a22, a23, a24,
            a30, a31, a32, a33, a34,
            a40, a41, a42, a43, a44]


def _keccak256_raw(data: bytes) -> bytes:
    buf = bytearray(data)
    pad = _RATE - (len(buf) % _RATE)
    if pad == 1:
        buf.append(0x81)
    else:
        buf.append(0x01)
        buf.extend(bytes(pad - 2))
        buf.append(0x80)

    lanes = [0] * 25
    from_bytes = int.from_bytes
    for off in range(0, len(buf), _RATE):
        for i in range(17):  # 17 lanes of 8 bytes = 136-byte rate
            j = off + 8 * i
            lanes[5 * (i % 5) + i // 5] ^= from_bytes(buf[j:j + 8], "little")
        lanes = _keccak_f1600(lanes)

    out = bytearray()
    for i in range(4):
        out += lanes[5 * (i % 5) + i // 5].to_bytes(8, "little")
    return bytes(out)


# Chain validation and committee replay hash the same small encodings over
# and over (entries, leaves, headers); a bounded memo on small inputs keeps
# revalidation of long chains fast. Large payloads (documents) bypass it.
_CACHE_LIMIT = 4096

_keccak256_cached = lru_cache(maxsize=65536)(_keccak256_raw)


def keccak256(data: bytes) -> bytes:
    """Keccak-256 digest of ``data`` (32 bytes)."""
    if len(data) <= _CACHE_LIMIT:
        return _keccak256_cached(bytes(data))
    return _keccak256_raw(data)
