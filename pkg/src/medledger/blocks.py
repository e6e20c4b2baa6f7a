"""Transactions, headers, blocks, attestations, and their canonical encodings.

A transaction's action parameters travel in ``body`` (opaque here, decoded
by the registry). ``payload_hash`` is the content address of the off-chain
document for record-creating kinds and the zero hash for pure state
changes. The signature covers the full canonical encoding except the
signature itself, so no field is malleable after signing.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import IntEnum

from . import merkle
from .encoding import DecodeError, Reader, enc_bytes, enc_str, enc_u8, enc_u32, enc_u64
from .keccak import keccak256
from .wallet import ADDRESS_LEN, KeyPair, SenderMismatch, derive_address, verify_sig

ZERO_HASH = bytes(32)

_ATTEST_DOMAIN = b"medledger/attest:"


class TxKind(IntEnum):
    REGISTER = 0
    GRANT_CONSENT = 1
    REVOKE_CONSENT = 2
    APPEND_RECORD = 3
    REFERRAL = 4
    PRESCRIPTION = 5
    TREATMENT = 6
    COMMENT = 7
    SLASH = 8


# Kinds that create a medical record and therefore carry a content address.
RECORD_TX_KINDS = frozenset(
    {TxKind.APPEND_RECORD, TxKind.REFERRAL, TxKind.PRESCRIPTION, TxKind.TREATMENT, TxKind.COMMENT}
)


@dataclass(frozen=True)
class Transaction:
    sender: bytes
    nonce: int
    kind: TxKind
    body: bytes
    payload_hash: bytes
    fee: int
    public_key: bytes
    signature: bytes = b""

    def signing_payload(self) -> bytes:
        return (
            enc_bytes(self.sender)
            + enc_u64(self.nonce)
            + enc_u8(int(self.kind))
            + enc_bytes(self.body)
            + enc_bytes(self.payload_hash)
            + enc_u64(self.fee)
            + enc_bytes(self.public_key)
        )

    def encode(self) -> bytes:
        return self.signing_payload() + enc_bytes(self.signature)

    def hash(self) -> bytes:
        return keccak256(self.encode())

    def leaf(self) -> bytes:
        return merkle.leaf_hash(self.encode())

    @classmethod
    def decode(cls, r: Reader) -> "Transaction":
        sender = r.bytes_()
        nonce = r.u64()
        kind_raw = r.u8()
        body = r.bytes_()
        payload_hash = r.bytes_()
        fee = r.u64()
        public_key = r.bytes_()
        signature = r.bytes_()
        try:
            kind = TxKind(kind_raw)
        except ValueError as e:
            raise DecodeError(f"unknown tx kind {kind_raw}") from e
        if len(sender) != ADDRESS_LEN or len(payload_hash) != 32:
            raise DecodeError("bad sender or payload_hash length")
        return cls(sender, nonce, kind, body, payload_hash, fee, public_key, signature)

    def verify_signature(self) -> bool:
        """Signature valid and the public key actually owns the sender address."""
        if len(self.public_key) != 32 or derive_address(self.public_key) != self.sender:
            return False
        return verify_sig(self.public_key, self.signing_payload(), self.signature)


def sign_tx(key: KeyPair, tx: Transaction) -> Transaction:
    """Sign over the canonical encoding (signature field excluded)."""
    if tx.sender != key.address:
        raise SenderMismatch(
            f"tx sender {tx.sender.hex()} is not the key's address {key.address.hex()}"
        )
    unsigned = replace(tx, public_key=key.public_bytes, signature=b"")
    return replace(unsigned, signature=key.sign(unsigned.signing_payload()))


@dataclass(frozen=True)
class BlockHeader:
    height: int
    parent_hash: bytes
    tx_root: bytes
    state_root: bytes
    timestamp: int
    proposer: str

    def encode(self) -> bytes:
        return (
            enc_u64(self.height)
            + enc_bytes(self.parent_hash)
            + enc_bytes(self.tx_root)
            + enc_bytes(self.state_root)
            + enc_u64(self.timestamp)
            + enc_str(self.proposer)
        )

    def hash(self) -> bytes:
        return keccak256(self.encode())

    @classmethod
    def decode(cls, r: Reader) -> "BlockHeader":
        return cls(
            height=r.u64(),
            parent_hash=r.bytes_(),
            tx_root=r.bytes_(),
            state_root=r.bytes_(),
            timestamp=r.u64(),
            proposer=r.str_(),
        )


def attestation_message(slot: int, block_hash: bytes) -> bytes:
    return _ATTEST_DOMAIN + enc_u64(slot) + enc_bytes(block_hash)


@dataclass(frozen=True)
class Attestation:
    slot: int
    block_hash: bytes
    validator: str
    signature: bytes

    def encode(self) -> bytes:
        return (
            enc_u64(self.slot)
            + enc_bytes(self.block_hash)
            + enc_str(self.validator)
            + enc_bytes(self.signature)
        )

    @classmethod
    def decode(cls, r: Reader) -> "Attestation":
        return cls(slot=r.u64(), block_hash=r.bytes_(), validator=r.str_(), signature=r.bytes_())


@dataclass(frozen=True)
class Block:
    header: BlockHeader
    transactions: tuple[Transaction, ...]
    attestations: tuple[Attestation, ...]

    def encode(self) -> bytes:
        out = self.header.encode()
        out += enc_u32(len(self.transactions))
        for tx in self.transactions:
            out += tx.encode()
        out += enc_u32(len(self.attestations))
        for att in self.attestations:
            out += att.encode()
        return out

    @classmethod
    def decode(cls, r: Reader) -> "Block":
        header = BlockHeader.decode(r)
        txs = tuple(Transaction.decode(r) for _ in range(r.u32()))
        atts = tuple(Attestation.decode(r) for _ in range(r.u32()))
        return cls(header=header, transactions=txs, attestations=atts)

    def hash(self) -> bytes:
        return self.header.hash()

    @property
    def slot(self) -> int:
        """The block's slot, carried by its attestations (all must agree)."""
        if not self.attestations:
            raise ValueError("block carries no attestations, slot unknown")
        return self.attestations[0].slot


def tx_merkle_root(transactions: tuple[Transaction, ...] | list[Transaction]) -> bytes:
    return merkle.build_merkle_root([tx.leaf() for tx in transactions])


def check_block_stateless(block: Block, parent: BlockHeader | None) -> str | None:
    """Structural checks needing no account/registry state.

    Returns None if the block is well-formed, else a short reason string.
    Signature validity of transactions is included (it is a pure check);
    attestation validity is not, because it needs the committee.
    """
    h = block.header
    if parent is None:
        if h.height != 0 or h.parent_hash != ZERO_HASH:
            return "BadParent"
    else:
        if h.height != parent.height + 1 or h.parent_hash != parent.hash():
            return "BadParent"
    if not block.transactions and h.height > 0:
        return "EmptyBlock"
    if h.height > 0 and tx_merkle_root(block.transactions) != h.tx_root:
        return "BadTxRoot"
    for tx in block.transactions:
        if tx.kind in RECORD_TX_KINDS:
            if tx.payload_hash == ZERO_HASH:
                return "BadSignature"
        elif tx.payload_hash != ZERO_HASH:
            return "BadSignature"
        if not tx.verify_signature():
            return "BadSignature"
    slots = {att.slot for att in block.attestations}
    if len(slots) > 1:  # an unattested proposal has none; mixed slots are invalid
        return "NoQuorum"
    return None
