"""Binary Merkle tree over 32-byte leaf hashes.

Domain separation: leaves are hashed as keccak256(0x00 || payload) by the
caller (see ``leaf_hash``), interior nodes as keccak256(0x01 || left || right).
An unpaired node at any level is duplicated (paired with itself). Both rules
are part of the chain file format and must not change.
"""

from __future__ import annotations

from dataclasses import dataclass

from .keccak import keccak256

LEAF_PREFIX = b"\x00"
NODE_PREFIX = b"\x01"

HASH_LEN = 32
ZERO_HASH = bytes(HASH_LEN)


class EmptyTree(ValueError):
    """Merkle root of zero leaves is undefined."""


def leaf_hash(payload: bytes) -> bytes:
    """Hash a raw leaf payload with the 0x00 domain prefix."""
    return keccak256(LEAF_PREFIX + payload)


def node_hash(left: bytes, right: bytes) -> bytes:
    """Hash an interior node with the 0x01 domain prefix."""
    return keccak256(NODE_PREFIX + left + right)


@dataclass(frozen=True)
class MerkleProof:
    """Sibling path from one leaf to the root.

    ``siblings`` is ordered bottom-up; each entry is (hash, is_right) where
    is_right means the sibling sits to the right of the running hash.
    """

    leaf_index: int
    siblings: tuple[tuple[bytes, bool], ...]


def _levels(leaves: list[bytes]) -> list[list[bytes]]:
    if not leaves:
        raise EmptyTree("cannot build a Merkle tree over zero leaves")
    for leaf in leaves:
        if len(leaf) != HASH_LEN:
            raise ValueError(f"leaf must be {HASH_LEN} bytes, got {len(leaf)}")
    levels = [list(leaves)]
    while len(levels[-1]) > 1 or len(levels) == 1:
        level = list(levels[-1])
        if len(level) % 2 == 1:
            level.append(level[-1])
        levels.append([node_hash(level[i], level[i + 1]) for i in range(0, len(level), 2)])
        if len(levels[-1]) == 1:
            break
    return levels


def build_merkle_root(leaves: list[bytes]) -> bytes:
    """Root of the tree; a single leaf is still paired with itself once."""
    return _levels(leaves)[-1][0]


def make_merkle_proof(leaves: list[bytes], index: int) -> MerkleProof:
    if not 0 <= index < len(leaves):
        raise IndexError(f"leaf index {index} out of range for {len(leaves)} leaves")
    levels = _levels(leaves)
    siblings: list[tuple[bytes, bool]] = []
    pos = index
    for level in levels[:-1]:
        padded = list(level)
        if len(padded) % 2 == 1:
            padded.append(padded[-1])
        if pos % 2 == 0:
            siblings.append((padded[pos + 1], True))
        else:
            siblings.append((padded[pos - 1], False))
        pos //= 2
    return MerkleProof(leaf_index=index, siblings=tuple(siblings))


def verify_merkle_proof(leaf: bytes, proof: MerkleProof, root: bytes) -> bool:
    """Fold ``leaf`` through the sibling path; True iff it reproduces ``root``."""
    acc = leaf
    for sibling, is_right in proof.siblings:
        acc = node_hash(acc, sibling) if is_right else node_hash(sibling, acc)
    return acc == root
