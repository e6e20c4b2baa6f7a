"""Genesis configuration: initial accounts, validator set, and consensus
parameters.

Stored as plain key-value text so a deployment is reviewable at a glance.
Defaults follow the reference configuration: ten funded accounts of 100
units, fee 1, committee of up to 128, 2/3 quorum, 30 s slots.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .consensus import DEFAULT_COMMITTEE_SIZE, DEFAULT_QUORUM, DEFAULT_SLOT_MS, StakeTable, Validator
from .encoding import enc_bytes, enc_u32, enc_u64
from .keccak import keccak256

DEFAULT_ACCOUNT_COUNT = 10
DEFAULT_ACCOUNT_BALANCE = 100
DEFAULT_FEE = 1


class GenesisError(ValueError):
    pass


@dataclass
class GenesisConfig:
    accounts: list[tuple[bytes, int]] = field(default_factory=list)
    validators: list[Validator] = field(default_factory=list)
    fee: int = DEFAULT_FEE
    committee_size: int = DEFAULT_COMMITTEE_SIZE
    quorum: Fraction = DEFAULT_QUORUM
    slot_duration_ms: int = DEFAULT_SLOT_MS
    genesis_time_ms: int = 0
    seed: bytes = bytes(32)

    def stake_table(self) -> StakeTable:
        return StakeTable(entries={v.id: v for v in self.validators})

    def encode(self) -> bytes:
        out = enc_u64(self.fee) + enc_u32(self.committee_size)
        out += enc_u32(self.quorum.numerator) + enc_u32(self.quorum.denominator)
        out += enc_u64(self.slot_duration_ms) + enc_u64(self.genesis_time_ms)
        out += enc_bytes(self.seed)
        out += enc_u32(len(self.accounts))
        for addr, balance in self.accounts:
            out += enc_bytes(addr) + enc_u64(balance)
        out += enc_u32(len(self.validators))
        for v in self.validators:
            out += enc_bytes(v.id.encode()) + enc_bytes(v.public_key) + enc_u64(v.stake)
        return out

    def hash(self) -> bytes:
        return keccak256(b"genesis:" + self.encode())


def write_genesis(path: Path, config: GenesisConfig) -> None:
    lines = [
        "# medledger genesis",
        f"fee = {config.fee}",
        f"committee_size = {config.committee_size}",
        f"quorum = {config.quorum.numerator}/{config.quorum.denominator}",
        f"slot_ms = {config.slot_duration_ms}",
        f"genesis_time_ms = {config.genesis_time_ms}",
        f"seed = {config.seed.hex()}",
    ]
    for addr, balance in config.accounts:
        lines.append(f"account = {addr.hex()} {balance}")
    for v in config.validators:
        lines.append(f"validator = {v.id} {v.public_key.hex()} {v.stake}")
    path.write_text("\n".join(lines) + "\n")


def parse_genesis(text: str) -> GenesisConfig:
    config = GenesisConfig()
    seen_addresses: set[bytes] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise GenesisError(f"line {lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        try:
            if key == "fee":
                config.fee = int(value)
            elif key == "committee_size":
                config.committee_size = int(value)
            elif key == "quorum":
                num, den = value.split("/")
                config.quorum = Fraction(int(num), int(den))
            elif key == "slot_ms":
                config.slot_duration_ms = int(value)
            elif key == "genesis_time_ms":
                config.genesis_time_ms = int(value)
            elif key == "seed":
                config.seed = bytes.fromhex(value)
            elif key == "account":
                addr_hex, balance = value.split()
                addr = bytes.fromhex(addr_hex)
                if len(addr) != 20:
                    raise GenesisError(f"line {lineno}: account address must be 20 bytes")
                if addr in seen_addresses:
                    raise GenesisError(f"line {lineno}: duplicate account {addr_hex}")
                seen_addresses.add(addr)
                config.accounts.append((addr, int(balance)))
            elif key == "validator":
                vid, pub_hex, stake = value.split()
                config.validators.append(
                    Validator(id=vid, public_key=bytes.fromhex(pub_hex), stake=int(stake))
                )
            else:
                raise GenesisError(f"line {lineno}: unknown key {key!r}")
        except GenesisError:
            raise
        except ValueError as e:
            raise GenesisError(f"line {lineno}: {e}") from e
    if config.fee < 0 or config.committee_size < 1:
        raise GenesisError("fee must be >= 0 and committee_size >= 1")
    if not 0 < config.quorum <= 1:
        raise GenesisError("quorum must be in (0, 1]")
    if len(config.seed) != 32:
        raise GenesisError("seed must be 32 bytes of hex")
    return config


def load_genesis(path: Path) -> GenesisConfig:
    return parse_genesis(path.read_text())
