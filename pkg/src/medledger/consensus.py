"""Stake-weighted committee selection, attestation, quorum finalization,
and slashing.

Committee selection is deterministic: a keccak-keyed stream seeded with
(genesis seed, slot) drives weighted sampling without replacement over the
active validators. Determinism makes selection auditable and lets tests
replay any slot. Slashed validators have zero effective stake and can
never re-enter a committee.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction

from .blocks import (
    Attestation,
    Block,
    BlockHeader,
    Transaction,
    attestation_message,
    check_block_stateless,
    tx_merkle_root,
)
from .encoding import enc_bytes, enc_u64
from .keccak import keccak256
from .wallet import KeyPair, verify_sig

DEFAULT_COMMITTEE_SIZE = 128
DEFAULT_SLOT_MS = 30_000
DEFAULT_QUORUM = Fraction(2, 3)


class NoActiveValidators(ValueError):
    pass


class NotProposer(PermissionError):
    pass


class EmptySlot(Exception):
    """No pending transactions: the slot is skipped, no block produced."""


class NotCommitteeMember(PermissionError):
    pass


class InvalidBlock(ValueError):
    """Validator refuses to attest: the block fails stateless checks."""


class BadEvidence(ValueError):
    """Slashing evidence is not a provable equivocation."""


class ValidatorStatus(Enum):
    ACTIVE = "active"
    SLASHED = "slashed"


@dataclass(frozen=True)
class Validator:
    id: str
    public_key: bytes
    stake: int
    status: ValidatorStatus = ValidatorStatus.ACTIVE

    @property
    def effective_stake(self) -> int:
        return self.stake if self.status is ValidatorStatus.ACTIVE else 0


@dataclass
class StakeTable:
    entries: dict[str, Validator] = field(default_factory=dict)

    @property
    def total_active_stake(self) -> int:
        return sum(v.effective_stake for v in self.entries.values())

    def active(self) -> list[Validator]:
        """Active validators with positive stake, in id order (deterministic)."""
        return sorted(
            (v for v in self.entries.values() if v.effective_stake > 0),
            key=lambda v: v.id,
        )

    def encode_entries(self) -> list[bytes]:
        """Canonical per-validator encodings for the state commitment."""
        out = []
        for vid in sorted(self.entries):
            v = self.entries[vid]
            out.append(
                enc_bytes(vid.encode()) + enc_bytes(v.public_key)
                + enc_u64(v.stake) + enc_bytes(v.status.value.encode())
            )
        return out


@dataclass(frozen=True)
class Committee:
    slot: int
    members: tuple[str, ...]

    @property
    def proposer(self) -> str:
        return self.members[0]

    def __contains__(self, validator_id: str) -> bool:
        return validator_id in self.members


@dataclass
class SlotClock:
    slot_duration_ms: int = DEFAULT_SLOT_MS
    genesis_time_ms: int = 0
    current_slot: int = 0

    def slot_start_ms(self, slot: int) -> int:
        return self.genesis_time_ms + slot * self.slot_duration_ms

    def advance(self, slots: int = 1) -> int:
        if slots < 0:
            raise ValueError("slots advance monotonically")
        self.current_slot += slots
        return self.current_slot


def _draw_stream(seed: bytes, slot: int):
    """Deterministic stream of 256-bit integers keyed by keccak(seed || slot)."""
    key = keccak256(seed + enc_u64(slot))
    counter = 0
    while True:
        yield int.from_bytes(keccak256(key + enc_u64(counter)), "big")
        counter += 1


def select_committee(
    stakes: StakeTable, slot: int, seed: bytes, committee_size: int
) -> Committee:
    """Weighted sampling without replacement; the first draw proposes.

    A validator's chance at each draw is its stake over the remaining
    stake. With fewer active validators than ``committee_size`` the
    committee is simply all of them.
    """
    remaining = stakes.active()
    if not remaining:
        raise NoActiveValidators("no active validator with positive stake")
    stream = _draw_stream(seed, slot)
    members: list[str] = []
    while remaining and len(members) < committee_size:
        total = sum(v.stake for v in remaining)
        # 256 fresh bits per draw: modulo bias is ~2^-200, irrelevant here
        point = next(stream) % total
        acc = 0
        for i, v in enumerate(remaining):
            acc += v.stake
            if point < acc:
                members.append(v.id)
                del remaining[i]
                break
    return Committee(slot=slot, members=tuple(members))


def propose_block(
    committee: Committee,
    caller: str,
    pending_txs: list[Transaction],
    parent: BlockHeader,
    clock: SlotClock,
    state_root: bytes,
) -> Block:
    """Build the unattested block for the committee's slot.

    The caller must be the slot proposer. ``state_root`` is the ledger's
    post-application commitment, computed by the single writer before
    proposing. Timestamps are the nominal slot start so replays are
    bit-identical.
    """
    if caller != committee.proposer:
        raise NotProposer(f"{caller} is not the proposer for slot {committee.slot}")
    if not pending_txs:
        raise EmptySlot(f"slot {committee.slot}: nothing to propose")
    header = BlockHeader(
        height=parent.height + 1,
        parent_hash=parent.hash(),
        tx_root=tx_merkle_root(pending_txs),
        state_root=state_root,
        timestamp=clock.slot_start_ms(committee.slot),
        proposer=committee.proposer,
    )
    return Block(header=header, transactions=tuple(pending_txs), attestations=())


def attest(
    validator_id: str,
    key: KeyPair,
    block: Block,
    slot: int,
    committee: Committee,
    parent: BlockHeader | None,
) -> Attestation:
    """Sign (slot, block hash) after the validator's own stateless checks."""
    if validator_id not in committee:
        raise NotCommitteeMember(f"{validator_id} is not in the slot-{slot} committee")
    problem = check_block_stateless(block, parent)
    if problem is not None:
        raise InvalidBlock(f"refusing to attest: {problem}")
    block_hash = block.hash()
    return Attestation(
        slot=slot,
        block_hash=block_hash,
        validator=validator_id,
        signature=key.sign(attestation_message(slot, block_hash)),
    )


def quorum_threshold(quorum: Fraction, committee_size: int) -> int:
    """ceil(quorum x committee size) distinct attestations finalize a slot."""
    return -(-quorum.numerator * committee_size // quorum.denominator)


def verify_attestation(att: Attestation, stakes: StakeTable) -> bool:
    validator = stakes.entries.get(att.validator)
    if validator is None or validator.status is not ValidatorStatus.ACTIVE:
        return False
    return verify_sig(
        validator.public_key, attestation_message(att.slot, att.block_hash), att.signature
    )


@dataclass(frozen=True)
class FinalizeResult:
    finalized: bool
    valid_attestations: tuple[Attestation, ...]
    needed: int

    @property
    def reason(self) -> str | None:
        return None if self.finalized else "NoQuorum"


def finalize_slot(
    block: Block,
    attestations: list[Attestation],
    committee: Committee,
    quorum: Fraction,
    stakes: StakeTable,
) -> FinalizeResult:
    """Finalized iff distinct valid committee attestations reach quorum.

    Duplicates from one validator count once; attestations for a different
    block hash or slot, from non-members, or with bad signatures count not
    at all.
    """
    block_hash = block.hash()
    seen: dict[str, Attestation] = {}
    for att in attestations:
        if att.validator in seen:
            continue
        if att.slot != committee.slot or att.block_hash != block_hash:
            continue
        if att.validator not in committee:
            continue
        if not verify_attestation(att, stakes):
            continue
        seen[att.validator] = att
    needed = quorum_threshold(quorum, len(committee.members))
    ordered = tuple(sorted(seen.values(), key=lambda a: a.validator))
    return FinalizeResult(
        finalized=len(seen) >= needed, valid_attestations=ordered, needed=needed
    )


def slash(
    stakes: StakeTable, validator_id: str, evidence: tuple[Attestation, Attestation]
) -> StakeTable:
    """Zero the stake of a validator caught signing two blocks in one slot."""
    first, second = evidence
    validator = stakes.entries.get(validator_id)
    if validator is None:
        raise BadEvidence(f"unknown validator {validator_id}")
    if first.validator != validator_id or second.validator != validator_id:
        raise BadEvidence("evidence not signed by the accused validator")
    if first.slot != second.slot:
        raise BadEvidence("attestations are for different slots")
    if first.block_hash == second.block_hash:
        raise BadEvidence("attestations agree, no equivocation")
    for att in (first, second):
        if not verify_sig(
            validator.public_key,
            attestation_message(att.slot, att.block_hash),
            att.signature,
        ):
            raise BadEvidence("evidence signature does not verify")
    slashed = replace(validator, stake=0, status=ValidatorStatus.SLASHED)
    entries = dict(stakes.entries)
    entries[validator_id] = slashed
    return StakeTable(entries=entries)
