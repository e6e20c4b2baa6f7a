"""Canonical byte encoding shared by transactions, blocks, state roots and
model files.

Rules: fields are concatenated in declared order; integers are big-endian
fixed width; variable-length byte strings carry a u32 length prefix. The
encoding must be bit-exact because every hash and signature in the system
is computed over it.
"""

from __future__ import annotations

import struct


class DecodeError(ValueError):
    """Malformed or truncated canonical encoding."""


def enc_u8(n: int) -> bytes:
    if not 0 <= n <= 0xFF:
        raise ValueError(f"u8 out of range: {n}")
    return bytes([n])


def enc_u32(n: int) -> bytes:
    if not 0 <= n <= 0xFFFFFFFF:
        raise ValueError(f"u32 out of range: {n}")
    return struct.pack(">I", n)


def enc_u64(n: int) -> bytes:
    if not 0 <= n <= 0xFFFFFFFFFFFFFFFF:
        raise ValueError(f"u64 out of range: {n}")
    return struct.pack(">Q", n)


def enc_i64(n: int) -> bytes:
    return struct.pack(">q", n)


def enc_f64(x: float) -> bytes:
    return struct.pack(">d", x)


def enc_bytes(b: bytes) -> bytes:
    return enc_u32(len(b)) + b


def enc_str(s: str) -> bytes:
    return enc_bytes(s.encode("utf-8"))


class Reader:
    """Sequential decoder over one canonical byte string.

    Raises DecodeError on truncation; ``expect_end`` rejects trailing bytes
    so a frame either parses exactly or not at all.
    """

    def __init__(self, data: bytes):
        self._data = data
        self._pos = 0

    def take(self, n: int) -> bytes:
        if self._pos + n > len(self._data):
            raise DecodeError(f"truncated: wanted {n} bytes at {self._pos}, have {len(self._data)}")
        out = self._data[self._pos:self._pos + n]
        self._pos += n
        return out

    def u8(self) -> int:
        return self.take(1)[0]

    def u32(self) -> int:
        return struct.unpack(">I", self.take(4))[0]

    def u64(self) -> int:
        return struct.unpack(">Q", self.take(8))[0]

    def i64(self) -> int:
        return struct.unpack(">q", self.take(8))[0]

    def f64(self) -> float:
        return struct.unpack(">d", self.take(8))[0]

    def bytes_(self) -> bytes:
        return self.take(self.u32())

    def str_(self) -> str:
        try:
            return self.bytes_().decode("utf-8")
        except UnicodeDecodeError as e:
            raise DecodeError(f"invalid utf-8: {e}") from e

    @property
    def remaining(self) -> int:
        return len(self._data) - self._pos

    def expect_end(self) -> None:
        if self.remaining:
            raise DecodeError(f"{self.remaining} trailing bytes")
