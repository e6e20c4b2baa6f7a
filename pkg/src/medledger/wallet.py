"""Key pairs, addresses, signing, and the on-disk keystore.

Ed25519 throughout (RFC 8032 signatures are deterministic, which the
scenario-replay determinism tests rely on). An address is the trailing
20 bytes of keccak256(public key). Private keys at rest are encrypted
with AES-256-GCM under a scrypt-derived key; the passphrase is never
written anywhere.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

from cryptography.exceptions import InvalidSignature, InvalidTag
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)
from cryptography.hazmat.primitives.ciphers.aead import AESGCM
from cryptography.hazmat.primitives.kdf.scrypt import Scrypt

from .keccak import keccak256

ADDRESS_LEN = 20
PUBKEY_LEN = 32
SIGNATURE_LEN = 64

_SCRYPT_N = 2 ** 14
_SCRYPT_R = 8
_SCRYPT_P = 1


class SenderMismatch(ValueError):
    """Transaction sender address does not belong to the signing key."""


class KeystoreError(ValueError):
    """Unreadable keystore file or wrong passphrase."""


def derive_address(public_key: bytes) -> bytes:
    """Trailing 20 bytes of the key hash."""
    if len(public_key) != PUBKEY_LEN:
        raise ValueError(f"public key must be {PUBKEY_LEN} bytes")
    return keccak256(public_key)[-ADDRESS_LEN:]


@dataclass(frozen=True)
class KeyPair:
    """An Ed25519 signing key plus its derived public key and address."""

    private_bytes: bytes
    public_bytes: bytes

    @property
    def address(self) -> bytes:
        return derive_address(self.public_bytes)

    def sign(self, message: bytes) -> bytes:
        key = Ed25519PrivateKey.from_private_bytes(self.private_bytes)
        return key.sign(message)


def generate_keypair(seed: bytes | None = None) -> KeyPair:
    """Fresh key pair; with a 32-byte seed the pair is fully deterministic."""
    if seed is None:
        key = Ed25519PrivateKey.generate()
    else:
        if len(seed) != 32:
            raise ValueError("seed must be exactly 32 bytes")
        key = Ed25519PrivateKey.from_private_bytes(seed)
    priv = key.private_bytes_raw()
    pub = key.public_key().public_bytes_raw()
    return KeyPair(private_bytes=priv, public_bytes=pub)


def keypair_from_passphrase_seed(label: str) -> KeyPair:
    """Deterministic fixture keys for tests and scenario scripts."""
    return generate_keypair(keccak256(b"medledger-seed:" + label.encode("utf-8")))


def verify_sig(public_key: bytes, message: bytes, signature: bytes) -> bool:
    """True iff ``signature`` is valid for exactly ``message`` under the key."""
    if len(public_key) != PUBKEY_LEN or len(signature) != SIGNATURE_LEN:
        return False
    try:
        Ed25519PublicKey.from_public_bytes(public_key).verify(signature, message)
        return True
    except InvalidSignature:
        return False
    except ValueError:
        return False


# --- keystore files -------------------------------------------------------
#
# One text file per key:
#   address = <40 hex>
#   public_key = <64 hex>
#   ciphertext = <hex>          AES-256-GCM over the 32 private key bytes
#   salt = <hex>, nonce = <hex>
#   kdf = scrypt n=16384 r=8 p=1


def save_keystore(path: Path, pair: KeyPair, passphrase: str) -> None:
    salt = os.urandom(16)
    nonce = os.urandom(12)
    key = Scrypt(salt=salt, length=32, n=_SCRYPT_N, r=_SCRYPT_R, p=_SCRYPT_P).derive(
        passphrase.encode("utf-8")
    )
    ciphertext = AESGCM(key).encrypt(nonce, pair.private_bytes, None)
    lines = [
        f"address = {pair.address.hex()}",
        f"public_key = {pair.public_bytes.hex()}",
        f"ciphertext = {ciphertext.hex()}",
        f"salt = {salt.hex()}",
        f"nonce = {nonce.hex()}",
        f"kdf = scrypt n={_SCRYPT_N} r={_SCRYPT_R} p={_SCRYPT_P}",
    ]
    path.write_text("\n".join(lines) + "\n")


def load_keystore(path: Path, passphrase: str) -> KeyPair:
    fields: dict[str, str] = {}
    for line in path.read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise KeystoreError(f"malformed keystore line: {line!r}")
        k, v = line.split("=", 1)
        fields[k.strip()] = v.strip()
    try:
        kdf = fields["kdf"]
        if not kdf.startswith("scrypt"):
            raise KeystoreError(f"unsupported kdf: {kdf}")
        params = dict(part.split("=") for part in kdf.split()[1:])
        key = Scrypt(
            salt=bytes.fromhex(fields["salt"]),
            length=32,
            n=int(params["n"]),
            r=int(params["r"]),
            p=int(params["p"]),
        ).derive(passphrase.encode("utf-8"))
        private = AESGCM(key).decrypt(
            bytes.fromhex(fields["nonce"]), bytes.fromhex(fields["ciphertext"]), None
        )
    except KeyError as e:
        raise KeystoreError(f"keystore missing field {e}") from e
    except InvalidTag as e:
        raise KeystoreError("wrong passphrase or corrupted keystore") from e
    pair = generate_keypair(private)
    if pair.public_bytes.hex() != fields["public_key"]:
        raise KeystoreError("public key does not match decrypted private key")
    return pair
