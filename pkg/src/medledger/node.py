"""Single-writer node: the proposer loop over ledger, registry, store and
the simulated multi-validator keystore.

One node drives the whole permissioned deployment. It holds every
validator's attestation key (desk-scale topology), so each produced block
is proposed by the slot committee's proposer and attested by all active
committee members before it is applied and persisted. All mutations are
serialized behind one lock; reads take the same lock briefly, which makes
committed state visible atomically per block.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from pathlib import Path

from . import consensus, ledger
from .blocks import (
    RECORD_TX_KINDS,
    Attestation,
    Block,
    Transaction,
    TxKind,
    ZERO_HASH,
    sign_tx,
)
from .genesis import GenesisConfig
from .ledger import LedgerError, LedgerState, ValidationReport, validate_chain
from .merkle import MerkleProof, make_merkle_proof
from .registry import (
    MissingContent,
    RecordKind,
    Role,
    encode_grant_body,
    encode_record_body,
    encode_register_body,
    encode_revoke_body,
    encode_slash_body,
)
from .store import OffchainStore
from .wallet import KeyPair, keypair_from_passphrase_seed


class NodeError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


@dataclass
class SlotTrace:
    slot: int
    proposer: str
    attest_count: int
    finalized: bool
    block_hash: bytes | None

    def line(self) -> str:
        bh = self.block_hash.hex() if self.block_hash else "-"
        return (
            f"slot={self.slot} proposer={self.proposer} attests={self.attest_count} "
            f"finalized={'yes' if self.finalized else 'no'} block={bh}"
        )


@dataclass
class Node:
    config: GenesisConfig
    validator_keys: dict[str, KeyPair]
    store: OffchainStore
    chain_path: Path | None = None
    state: LedgerState = field(init=False)
    clock: consensus.SlotClock = field(init=False)
    traces: list[SlotTrace] = field(default_factory=list)

    def __post_init__(self):
        self._lock = threading.RLock()
        self.clock = consensus.SlotClock(
            slot_duration_ms=self.config.slot_duration_ms,
            genesis_time_ms=self.config.genesis_time_ms,
        )
        if self.chain_path is not None and self.chain_path.exists():
            blocks = ledger.load_chain(self.chain_path)
            report = validate_chain(blocks, self.config)
            if not report:
                raise NodeError(
                    "CORRUPT_CHAIN",
                    f"chain file fails validation at height {report.height}: "
                    f"{report.reason} {report.detail}".strip(),
                )
            self.state = LedgerState.genesis(self.config)
            for block in blocks[1:]:
                self.state.apply_block(block)
            self.clock.current_slot = self.state.last_slot
        else:
            self.state = LedgerState.genesis(self.config)
            if self.chain_path is not None:
                ledger.save_chain(self.chain_path, self.state.blocks)

    # -- writes ---------------------------------------------------------------

    def advance_slots(self, n: int = 1) -> int:
        """Let slots pass without producing blocks (consent expiry, demos)."""
        with self._lock:
            return self.clock.advance(n)

    def submit_tx(self, tx: Transaction) -> Block:
        """Validate, propose, attest, finalize, and commit one transaction.

        Desk-scale automine: each submission occupies the next slot. Raises
        NodeError with a stable code if the transaction cannot be included.
        """
        with self._lock:
            if tx.kind in RECORD_TX_KINDS and not self.store.has(tx.payload_hash):
                raise NodeError(
                    MissingContent.code,
                    f"content {tx.payload_hash.hex()} is not in the off-chain store",
                )
            return self._produce([tx])

    def submit_batch(self, txs: list[Transaction]) -> Block:
        """Mine several transactions into one block (next slot)."""
        with self._lock:
            for tx in txs:
                if tx.kind in RECORD_TX_KINDS and not self.store.has(tx.payload_hash):
                    raise NodeError(
                        MissingContent.code,
                        f"content {tx.payload_hash.hex()} is not in the off-chain store",
                    )
            return self._produce(txs)

    def _produce(self, txs: list[Transaction]) -> Block:
        slot = self.clock.current_slot + 1
        try:
            committee = consensus.select_committee(
                self.state.stakes, slot, self.config.seed, self.config.committee_size
            )
            state_root = self.state.post_state_root(txs, slot)
            block = consensus.propose_block(
                committee, committee.proposer, txs, self.state.head, self.clock, state_root
            )
            attestations = []
            for member in committee.members:
                key = self.validator_keys.get(member)
                if key is None:
                    continue
                attestations.append(
                    consensus.attest(member, key, block, slot, committee, self.state.head)
                )
            result = consensus.finalize_slot(
                block, attestations, committee, self.config.quorum, self.state.stakes
            )
            trace = SlotTrace(
                slot=slot, proposer=committee.proposer,
                attest_count=len(result.valid_attestations),
                finalized=result.finalized,
                block_hash=block.hash() if result.finalized else None,
            )
            if not result.finalized:
                self.traces.append(trace)
                self.clock.advance()
                raise NodeError("NO_QUORUM", f"slot {slot} gathered no quorum")
            final = Block(
                header=block.header,
                transactions=block.transactions,
                attestations=result.valid_attestations,
            )
            self.state.apply_block(final)
            self.clock.advance()
            self.traces.append(trace)
            if self.chain_path is not None:
                ledger.append_block(self.chain_path, final, self.state.blocks)
            return final
        except LedgerError as e:
            self.clock.advance()  # a failed slot is still a consumed slot
            raise NodeError(e.reason, str(e)) from e
        except (consensus.EmptySlot, consensus.NoActiveValidators) as e:
            raise NodeError("EMPTY_SLOT", str(e)) from e

    def put_document(self, data: bytes, media_type: str) -> bytes:
        return self.store.put(data, media_type)

    # -- reads ----------------------------------------------------------------

    def current_slot(self) -> int:
        with self._lock:
            return self.clock.current_slot

    def head(self):
        with self._lock:
            return self.state.head

    def get_block(self, height: int) -> Block:
        with self._lock:
            if not 0 <= height < len(self.state.blocks):
                raise NodeError("NOT_FOUND", f"no block at height {height}")
            return self.state.blocks[height]

    def tx_proof(self, height: int, tx_index: int) -> tuple[MerkleProof, bytes]:
        with self._lock:
            block = self.get_block(height)
            if not 0 <= tx_index < len(block.transactions):
                raise NodeError("NOT_FOUND", f"no tx {tx_index} in block {height}")
            leaves = [tx.leaf() for tx in block.transactions]
            return make_merkle_proof(leaves, tx_index), block.header.tx_root

    def account_info(self, address: bytes) -> ledger.Account:
        with self._lock:
            return self.state.account(address)

    def locate_tx(self, tx_hash: bytes) -> tuple[int, int] | None:
        """(height, index) of a committed transaction, or None."""
        with self._lock:
            for block in self.state.blocks:
                for i, tx in enumerate(block.transactions):
                    if tx.hash() == tx_hash:
                        return block.header.height, i
        return None

    def next_nonce(self, address: bytes) -> int:
        with self._lock:
            return self.state.account(address).nonce

    def validate(self) -> ValidationReport:
        with self._lock:
            return validate_chain(self.state.blocks, self.config)


# -- transaction builders ------------------------------------------------------


def build_register_tx(
    key: KeyPair, nonce: int, fee: int, role: Role, attributes: dict[str, str]
) -> Transaction:
    tx = Transaction(
        sender=key.address, nonce=nonce, kind=TxKind.REGISTER,
        body=encode_register_body(role, attributes),
        payload_hash=ZERO_HASH, fee=fee, public_key=key.public_bytes,
    )
    return sign_tx(key, tx)


def build_grant_tx(
    key: KeyPair, nonce: int, fee: int, patient: str, requester: str,
    scope: frozenset[RecordKind], duration_slots: int | None,
) -> Transaction:
    tx = Transaction(
        sender=key.address, nonce=nonce, kind=TxKind.GRANT_CONSENT,
        body=encode_grant_body(patient, requester, scope, duration_slots),
        payload_hash=ZERO_HASH, fee=fee, public_key=key.public_bytes,
    )
    return sign_tx(key, tx)


def build_revoke_tx(key: KeyPair, nonce: int, fee: int, grant_id: str) -> Transaction:
    tx = Transaction(
        sender=key.address, nonce=nonce, kind=TxKind.REVOKE_CONSENT,
        body=encode_revoke_body(grant_id),
        payload_hash=ZERO_HASH, fee=fee, public_key=key.public_bytes,
    )
    return sign_tx(key, tx)


def build_record_tx(
    key: KeyPair, nonce: int, fee: int, kind: TxKind, patient: str,
    record_kind: RecordKind, content_address: bytes, media_type: str,
) -> Transaction:
    if kind not in RECORD_TX_KINDS:
        raise ValueError(f"{kind} does not create a record")
    tx = Transaction(
        sender=key.address, nonce=nonce, kind=kind,
        body=encode_record_body(patient, record_kind, media_type),
        payload_hash=content_address, fee=fee, public_key=key.public_bytes,
    )
    return sign_tx(key, tx)


def build_slash_tx(
    key: KeyPair, nonce: int, fee: int, validator_id: str,
    evidence: tuple[Attestation, Attestation],
) -> Transaction:
    tx = Transaction(
        sender=key.address, nonce=nonce, kind=TxKind.SLASH,
        body=encode_slash_body(validator_id, evidence[0].encode(), evidence[1].encode()),
        payload_hash=ZERO_HASH, fee=fee, public_key=key.public_bytes,
    )
    return sign_tx(key, tx)


# -- deterministic demo fixtures -------------------------------------------------


def demo_validators(n: int, stake: int = 10) -> tuple[list, dict[str, KeyPair]]:
    """n seeded validators ``v1..vn`` with equal stakes."""
    validators, keys = [], {}
    for i in range(1, n + 1):
        vid = f"v{i}"
        pair = keypair_from_passphrase_seed(f"validator:{vid}")
        validators.append(consensus.Validator(id=vid, public_key=pair.public_bytes, stake=stake))
        keys[vid] = pair
    return validators, keys


def demo_genesis(
    account_keys: list[KeyPair],
    n_validators: int = 4,
    balance: int = 100,
    fee: int = 1,
    committee_size: int = 4,
    seed_label: str = "demo",
) -> tuple[GenesisConfig, dict[str, KeyPair]]:
    from .keccak import keccak256

    validators, vkeys = demo_validators(n_validators)
    config = GenesisConfig(
        accounts=[(k.address, balance) for k in account_keys],
        validators=validators,
        fee=fee,
        committee_size=committee_size,
        seed=keccak256(b"genesis-seed:" + seed_label.encode()),
    )
    return config, vkeys
