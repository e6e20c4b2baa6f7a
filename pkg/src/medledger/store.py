"""Content-addressed off-chain store for the actual medical payloads.

The chain never holds a document, only its keccak256 address. Layout is
one file per document under a two-level hex prefix plus a tab-separated
index for media types:

    store/ab/cd/abcd...ef.bin
    store/index.tsv    (address, media_type, byte_length, stored_at)

There is no delete: the store is append-only, like the chain it backs.
"""

from __future__ import annotations

import os
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path

from .keccak import keccak256

DEFAULT_MAX_BYTES = 16 * 1024 * 1024


class TooLarge(ValueError):
    pass


class NotFound(KeyError):
    pass


class CorruptContent(Exception):
    """Stored bytes no longer hash to their address: disk tampering."""


@dataclass(frozen=True)
class StoredDocument:
    content_address: bytes
    media_type: str
    data: bytes
    stored_at: int


class OffchainStore:
    def __init__(self, root: Path, max_bytes: int = DEFAULT_MAX_BYTES):
        self.root = Path(root)
        self.max_bytes = max_bytes
        self.root.mkdir(parents=True, exist_ok=True)
        self._index_path = self.root / "index.tsv"
        self._index: dict[bytes, tuple[str, int, int]] = {}
        self._load_index()

    def _load_index(self) -> None:
        if not self._index_path.exists():
            return
        for line in self._index_path.read_text().splitlines():
            if not line.strip():
                continue
            addr_hex, media_type, length, stored_at = line.split("\t")
            self._index[bytes.fromhex(addr_hex)] = (media_type, int(length), int(stored_at))

    def _path_for(self, address: bytes) -> Path:
        h = address.hex()
        return self.root / h[:2] / h[2:4] / f"{h}.bin"

    def put(self, data: bytes, media_type: str) -> bytes:
        """Store ``data`` under its hash; idempotent for identical bytes."""
        if len(data) > self.max_bytes:
            raise TooLarge(f"payload of {len(data)} bytes exceeds cap {self.max_bytes}")
        address = keccak256(data)
        path = self._path_for(address)
        if not path.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
            # temp file + atomic rename: concurrent identical puts converge
            fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
            try:
                with os.fdopen(fd, "wb") as fh:
                    fh.write(data)
                os.replace(tmp, path)
            finally:
                if os.path.exists(tmp):
                    os.unlink(tmp)
        if address not in self._index:
            stored_at = int(time.time())
            self._index[address] = (media_type, len(data), stored_at)
            with self._index_path.open("a") as fh:
                fh.write(f"{address.hex()}\t{media_type}\t{len(data)}\t{stored_at}\n")
        return address

    def has(self, address: bytes) -> bool:
        return self._path_for(address).exists()

    def get(self, address: bytes) -> StoredDocument:
        path = self._path_for(address)
        if not path.exists():
            raise NotFound(address.hex())
        data = path.read_bytes()
        if keccak256(data) != address:
            raise CorruptContent(f"content at {address.hex()} fails its hash")
        media_type, _, stored_at = self._index.get(address, ("application/octet-stream", len(data), 0))
        return StoredDocument(
            content_address=address, media_type=media_type, data=data, stored_at=stored_at
        )

    def verify_all(self) -> list[bytes]:
        """Rehash every stored document; returns the corrupt addresses."""
        corrupt = []
        for path in sorted(self.root.glob("*/*/*.bin")):
            address = bytes.fromhex(path.stem)
            if keccak256(path.read_bytes()) != address:
                corrupt.append(address)
        return corrupt

    def __len__(self) -> int:
        return sum(1 for _ in self.root.glob("*/*/*.bin"))
