"""The append-only hash-chained ledger: block application, whole-chain
validation, and chain file persistence.

Block application is atomic: every check must pass or the block is
rejected and state is untouched. The state root is a keccak commitment
over the sorted canonical encodings of every state entry (accounts,
entities, consents, records, validator stakes), so replaying a persisted
chain reproduces it bit for bit.
"""

from __future__ import annotations

import copy
import re
from dataclasses import dataclass, field
from pathlib import Path

from . import consensus
from .blocks import Block, BlockHeader, Transaction, TxKind, ZERO_HASH, check_block_stateless
from .encoding import DecodeError, Reader, enc_bytes, enc_u32, enc_u64
from .genesis import GenesisConfig
from .keccak import keccak256
from .registry import Registry, RegistryError, decode_slash_body
from .blocks import Attestation


@dataclass
class Account:
    balance: int = 0
    nonce: int = 0


class LedgerError(Exception):
    """Block rejected; ``reason`` is the stable machine code."""

    def __init__(self, reason: str, height: int, detail: str = ""):
        super().__init__(f"{reason} at height {height}" + (f": {detail}" if detail else ""))
        self.reason = reason
        self.height = height
        self.detail = detail


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    height: int | None = None
    reason: str | None = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok


@dataclass
class LedgerState:
    config: GenesisConfig
    accounts: dict[bytes, Account] = field(default_factory=dict)
    registry: Registry = field(default_factory=Registry)
    stakes: consensus.StakeTable = field(default_factory=consensus.StakeTable)
    blocks: list[Block] = field(default_factory=list)
    last_slot: int = 0

    @property
    def head(self) -> BlockHeader:
        return self.blocks[-1].header

    @property
    def height(self) -> int:
        return self.head.height

    @classmethod
    def genesis(cls, config: GenesisConfig) -> "LedgerState":
        state = cls(config=config)
        for addr, balance in config.accounts:
            state.accounts[addr] = Account(balance=balance)
        state.stakes = config.stake_table()
        header = BlockHeader(
            height=0,
            parent_hash=ZERO_HASH,
            tx_root=ZERO_HASH,
            state_root=state.state_root(),
            timestamp=config.genesis_time_ms,
            proposer="genesis",
        )
        state.blocks.append(Block(header=header, transactions=(), attestations=()))
        return state

    def state_root(self) -> bytes:
        """Commitment over every state entry: accounts, entities, consents,
        records, validator stakes.

        Each sorted canonical entry is hashed individually and the root is
        the hash of the digest sequence. Unchanged entries therefore hash
        identically from block to block, which keeps whole-chain
        revalidation cheap."""
        entries: list[bytes] = []
        for addr in sorted(self.accounts):
            acct = self.accounts[addr]
            entries.append(b"\x00" + enc_bytes(addr) + enc_u64(acct.balance) + enc_u64(acct.nonce))
        entries.extend(self.registry.encode_entries())
        for enc in self.stakes.encode_entries():
            entries.append(b"\x04" + enc)
        blob = b"state:" + enc_u32(len(entries)) + b"".join(keccak256(e) for e in entries)
        return keccak256(blob)

    def account(self, address: bytes) -> Account:
        return self.accounts.get(address, Account())

    def total_supply(self) -> int:
        return sum(a.balance for a in self.accounts.values())

    # -- block application ---------------------------------------------------

    def apply_block(self, block: Block) -> None:
        """Validate and commit one block; raises LedgerError and leaves
        state untouched on any failure."""
        h = block.header
        height = h.height
        problem = check_block_stateless(block, self.head)
        if problem is not None:
            raise LedgerError(problem, height)

        if not block.attestations:
            raise LedgerError("NoQuorum", height, "block carries no attestations")
        slot = block.slot
        if slot <= self.last_slot:
            raise LedgerError("BadSlot", height, f"slot {slot} <= {self.last_slot}")

        committee = consensus.select_committee(
            self.stakes, slot, self.config.seed, self.config.committee_size
        )
        if h.proposer != committee.proposer:
            raise LedgerError("NoQuorum", height, f"wrong proposer {h.proposer}")
        block_hash = block.hash()
        seen: set[str] = set()
        for att in block.attestations:
            if (
                att.validator in seen
                or att.block_hash != block_hash
                or att.validator not in committee
                or not consensus.verify_attestation(att, self.stakes)
            ):
                raise LedgerError("BadAttestation", height, f"attestation by {att.validator}")
            seen.add(att.validator)
        needed = consensus.quorum_threshold(self.config.quorum, len(committee.members))
        if len(seen) < needed:
            raise LedgerError("NoQuorum", height, f"{len(seen)} of {needed} attestations")

        accounts, registry, stakes = self._execute_txs(block.transactions, slot, height)
        trial = LedgerState(
            config=self.config, accounts=accounts, registry=registry,
            stakes=stakes, blocks=self.blocks, last_slot=slot,
        )
        root = trial.state_root()
        if root != h.state_root:
            raise LedgerError(
                "BadStateRoot", height,
                f"recomputed {root.hex()[:16]} != header {h.state_root.hex()[:16]}",
            )

        self.accounts = accounts
        self.registry = registry
        self.stakes = stakes
        self.last_slot = slot
        self.blocks.append(block)

    def _execute_txs(
        self, txs: tuple[Transaction, ...] | list[Transaction], slot: int, height: int
    ) -> tuple[dict[bytes, Account], Registry, consensus.StakeTable]:
        """Run the transactions on copies of the state; all-or-nothing."""
        accounts = copy.deepcopy(self.accounts)
        registry = copy.deepcopy(self.registry)
        stakes = copy.deepcopy(self.stakes)
        for tx in txs:
            acct = accounts.setdefault(tx.sender, Account())
            if tx.nonce != acct.nonce:
                raise LedgerError(
                    "NonceReplay", height,
                    f"sender {tx.sender.hex()[:8]} nonce {tx.nonce}, expected {acct.nonce}",
                )
            if tx.fee != self.config.fee:
                raise LedgerError("BadFee", height, f"fee {tx.fee} != {self.config.fee}")
            if acct.balance < tx.fee:
                raise LedgerError(
                    "InsufficientBalance", height,
                    f"sender {tx.sender.hex()[:8]} balance {acct.balance} < fee {tx.fee}",
                )
            acct.balance -= tx.fee  # fees are burned
            acct.nonce += 1
            try:
                if tx.kind is TxKind.SLASH:
                    stakes = self._apply_slash(stakes, tx, height)
                else:
                    registry.apply_tx(tx, slot, tx.hash())
            except RegistryError as e:
                raise LedgerError(e.code, height, str(e)) from e
        return accounts, registry, stakes

    def post_state_root(self, txs: list[Transaction], slot: int) -> bytes:
        """State root the chain would have after these transactions; used by
        the proposer to fill the header before attestation."""
        height = self.height + 1
        accounts, registry, stakes = self._execute_txs(txs, slot, height)
        trial = LedgerState(
            config=self.config, accounts=accounts, registry=registry,
            stakes=stakes, blocks=self.blocks, last_slot=slot,
        )
        return trial.state_root()

    @staticmethod
    def _apply_slash(
        stakes: consensus.StakeTable, tx: Transaction, height: int
    ) -> consensus.StakeTable:
        try:
            vid, raw_a, raw_b = decode_slash_body(tx.body)
            att_a = Attestation.decode(Reader(raw_a))
            att_b = Attestation.decode(Reader(raw_b))
        except (DecodeError, ValueError) as e:
            raise LedgerError("BadEvidence", height, f"malformed slash body: {e}") from e
        try:
            return consensus.slash(stakes, vid, (att_a, att_b))
        except consensus.BadEvidence as e:
            raise LedgerError("BadEvidence", height, str(e)) from e


def validate_chain(blocks: list[Block], config: GenesisConfig) -> ValidationReport:
    """Re-fold the whole chain from genesis; report the earliest failure."""
    if not blocks:
        return ValidationReport(ok=False, height=0, reason="EmptyChain")
    state = LedgerState.genesis(config)
    if blocks[0].encode() != state.blocks[0].encode():
        return ValidationReport(
            ok=False, height=0, reason="BadGenesis",
            detail="genesis block does not match the genesis configuration",
        )
    for block in blocks[1:]:
        try:
            state.apply_block(block)
        except LedgerError as e:
            return ValidationReport(ok=False, height=e.height, reason=e.reason, detail=e.detail)
    return ValidationReport(ok=True)


# -- chain file persistence ---------------------------------------------------
#
# One line per block: 8 lowercase hex chars (u32 length of the block bytes)
# followed by the block bytes in lowercase hex. A sidecar manifest lists the
# genesis hash and head position. Loading is strict: anything that is not
# canonical lowercase hex of the declared length is a corruption report,
# never a best-effort parse.

_HEX_LINE = re.compile(r"^[0-9a-f]+$")


class ChainFileError(Exception):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


def _frame(block: Block) -> str:
    raw = block.encode()
    return f"{len(raw):08x}" + raw.hex()


def save_chain(path: Path, blocks: list[Block]) -> None:
    path.write_text("".join(_frame(b) + "\n" for b in blocks))
    write_manifest(manifest_path(path), blocks)


def append_block(path: Path, block: Block, all_blocks: list[Block]) -> None:
    with path.open("a") as fh:
        fh.write(_frame(block) + "\n")
    write_manifest(manifest_path(path), all_blocks)


def load_chain(path: Path) -> list[Block]:
    blocks: list[Block] = []
    try:
        text = path.read_bytes().decode("ascii")
    except UnicodeDecodeError as e:
        raise ChainFileError(f"chain file is not ascii hex: {e}") from e
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line:
            raise ChainFileError("empty record", lineno)
        if not _HEX_LINE.match(line):
            raise ChainFileError("non-canonical hex in frame", lineno)
        if len(line) < 8:
            raise ChainFileError("truncated length prefix", lineno)
        declared = int(line[:8], 16)
        if len(line) != 8 + 2 * declared:
            raise ChainFileError(
                f"frame length mismatch: declared {declared} bytes, "
                f"line carries {(len(line) - 8) // 2}", lineno,
            )
        try:
            reader = Reader(bytes.fromhex(line[8:]))
            block = Block.decode(reader)
            reader.expect_end()
        except (DecodeError, ValueError) as e:
            raise ChainFileError(f"undecodable block: {e}", lineno) from e
        blocks.append(block)
    if not blocks:
        raise ChainFileError("chain file holds no blocks")
    return blocks


def manifest_path(chain_path: Path) -> Path:
    return chain_path.with_suffix(chain_path.suffix + ".manifest")


def write_manifest(path: Path, blocks: list[Block]) -> None:
    head = blocks[-1].header
    path.write_text(
        f"genesis_hash = {blocks[0].hash().hex()}\n"
        f"head_height = {head.height}\n"
        f"head_hash = {head.hash().hex()}\n"
    )
