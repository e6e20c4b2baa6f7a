"""Entity registration, patient-owned consent grants, and record indexing.

This is the on-chain state machine: every mutation arrives as a signed
transaction and the whole registry is a pure fold over the chain's
transaction sequence, so replaying a persisted chain reproduces it
byte for byte. Only the patient (the signer whose address owns the
patient entity) can grant or revoke access to their records.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum, IntEnum

from .blocks import RECORD_TX_KINDS, Transaction, TxKind
from .encoding import DecodeError, Reader, enc_bytes, enc_str, enc_u8, enc_u32, enc_u64


class RegistryError(ValueError):
    code = "REGISTRY_ERROR"


class DuplicateAddress(RegistryError):
    code = "DUPLICATE_ADDRESS"


class InvalidAadhar(RegistryError):
    code = "INVALID_AADHAR"


class MissingRequiredField(RegistryError):
    code = "MISSING_FIELD"

    def __init__(self, field_name: str):
        super().__init__(f"missing required field: {field_name}")
        self.field_name = field_name


class UnknownEntity(RegistryError):
    code = "UNKNOWN_ENTITY"


class UnknownRequester(RegistryError):
    code = "UNKNOWN_REQUESTER"


class UnknownPatient(RegistryError):
    code = "UNKNOWN_PATIENT"


class UnknownGrant(RegistryError):
    code = "UNKNOWN_GRANT"


class AlreadyRevoked(RegistryError):
    code = "ALREADY_REVOKED"


class BadScope(RegistryError):
    code = "BAD_SCOPE"


class NotOwner(RegistryError):
    code = "NOT_OWNER"


class AccessDenied(RegistryError):
    code = "ACCESS_DENIED"


class MissingContent(RegistryError):
    code = "MISSING_CONTENT"


class Role(Enum):
    PATIENT = "Patient"
    DOCTOR = "Doctor"
    HOSPITAL = "Hospital"
    PATHLAB = "PathLab"
    PHARMACY = "Pharmacy"


_ROLE_PREFIX = {
    Role.PATIENT: "pat",
    Role.DOCTOR: "doc",
    Role.HOSPITAL: "hos",
    Role.PATHLAB: "lab",
    Role.PHARMACY: "pha",
}

# Role-specific registration attributes. Patients and doctors follow the
# entity credential lists; path labs and pharmacies get the common contact
# trio since nothing more is specified for them.
REQUIRED_ATTRIBUTES: dict[Role, tuple[str, ...]] = {
    Role.PATIENT: ("name", "phone", "location", "aadhar", "email",
                   "medical_history", "symptoms", "age"),
    Role.DOCTOR: ("name", "phone", "location", "email", "registration_number",
                  "registration_council", "specialization", "experience_years"),
    Role.HOSPITAL: ("name", "email", "phone", "address", "year_of_establishment"),
    Role.PATHLAB: ("name", "email", "phone"),
    Role.PHARMACY: ("name", "email", "phone"),
}


class RecordKind(IntEnum):
    REPORT = 0
    PRESCRIPTION = 1
    TEST_REFERRAL = 2
    TREATMENT = 3
    COMMENT = 4
    MEDIA = 5


RECORD_KIND_NAMES = {k: k.name.title().replace("_", "") for k in RecordKind}
# TestReferral, not Test_Referral
RECORD_KIND_NAMES[RecordKind.TEST_REFERRAL] = "TestReferral"
RECORD_KIND_BY_NAME = {v: k for k, v in RECORD_KIND_NAMES.items()}

# Tx kinds that force one record kind; APPEND_RECORD may carry any.
FORCED_RECORD_KIND = {
    TxKind.REFERRAL: RecordKind.TEST_REFERRAL,
    TxKind.PRESCRIPTION: RecordKind.PRESCRIPTION,
    TxKind.TREATMENT: RecordKind.TREATMENT,
    TxKind.COMMENT: RecordKind.COMMENT,
}

PERMANENT = None  # expires_at value for a permanent (emergency) grant


@dataclass(frozen=True)
class EntityProfile:
    entity_id: str
    role: Role
    address: bytes
    attributes: dict[str, str]

    def encode(self) -> bytes:
        out = enc_str(self.entity_id) + enc_str(self.role.value) + enc_bytes(self.address)
        items = sorted(self.attributes.items())
        out += enc_u32(len(items))
        for k, v in items:
            out += enc_str(k) + enc_str(v)
        return out


@dataclass
class ConsentGrant:
    grant_id: str
    patient: str
    requester: str
    scope: frozenset[RecordKind]
    granted_at: int
    expires_at: int | None  # None = permanent (still revocable)
    revoked: bool = False

    def active_at(self, at_slot: int) -> bool:
        if self.revoked or at_slot < self.granted_at:
            return False
        return self.expires_at is None or at_slot <= self.expires_at

    def encode(self) -> bytes:
        out = enc_str(self.grant_id) + enc_str(self.patient) + enc_str(self.requester)
        kinds = sorted(self.scope)
        out += enc_u32(len(kinds))
        for k in kinds:
            out += enc_u8(int(k))
        out += enc_u64(self.granted_at)
        out += enc_u8(1 if self.expires_at is None else 0)
        out += enc_u64(0 if self.expires_at is None else self.expires_at)
        out += enc_u8(1 if self.revoked else 0)
        return out


@dataclass(frozen=True)
class RecordEntry:
    record_id: str
    patient: str
    author: str
    kind: RecordKind
    content_address: bytes
    media_type: str
    created_at: int
    tx_hash: bytes

    def encode(self) -> bytes:
        return (
            enc_str(self.record_id) + enc_str(self.patient) + enc_str(self.author)
            + enc_u8(int(self.kind)) + enc_bytes(self.content_address)
            + enc_str(self.media_type) + enc_u64(self.created_at) + enc_bytes(self.tx_hash)
        )


@dataclass(frozen=True)
class ConsentEvent:
    slot: int
    action: str  # "grant" | "revoke"
    grant_id: str
    tx_hash: bytes


# --- transaction bodies -----------------------------------------------------


def encode_register_body(role: Role, attributes: dict[str, str]) -> bytes:
    out = enc_str(role.value)
    items = sorted(attributes.items())
    out += enc_u32(len(items))
    for k, v in items:
        out += enc_str(k) + enc_str(v)
    return out


def decode_register_body(body: bytes) -> tuple[Role, dict[str, str]]:
    r = Reader(body)
    role = Role(r.str_())
    attrs = {}
    for _ in range(r.u32()):
        k = r.str_()
        attrs[k] = r.str_()
    r.expect_end()
    return role, attrs


def encode_grant_body(
    patient: str, requester: str, scope: frozenset[RecordKind], duration_slots: int | None
) -> bytes:
    out = enc_str(patient) + enc_str(requester)
    kinds = sorted(scope)
    out += enc_u32(len(kinds))
    for k in kinds:
        out += enc_u8(int(k))
    out += enc_u8(1 if duration_slots is None else 0)
    out += enc_u64(0 if duration_slots is None else duration_slots)
    return out


def decode_grant_body(body: bytes) -> tuple[str, str, frozenset[RecordKind], int | None]:
    r = Reader(body)
    patient = r.str_()
    requester = r.str_()
    scope = frozenset(RecordKind(r.u8()) for _ in range(r.u32()))
    permanent = r.u8() == 1
    duration = r.u64()
    r.expect_end()
    return patient, requester, scope, (None if permanent else duration)


def encode_revoke_body(grant_id: str) -> bytes:
    return enc_str(grant_id)


def decode_revoke_body(body: bytes) -> str:
    r = Reader(body)
    grant_id = r.str_()
    r.expect_end()
    return grant_id


def encode_record_body(patient: str, kind: RecordKind, media_type: str) -> bytes:
    return enc_str(patient) + enc_u8(int(kind)) + enc_str(media_type)


def decode_record_body(body: bytes) -> tuple[str, RecordKind, str]:
    r = Reader(body)
    patient = r.str_()
    kind = RecordKind(r.u8())
    media_type = r.str_()
    r.expect_end()
    return patient, kind, media_type


def encode_slash_body(validator_id: str, evidence_a: bytes, evidence_b: bytes) -> bytes:
    return enc_str(validator_id) + enc_bytes(evidence_a) + enc_bytes(evidence_b)


def decode_slash_body(body: bytes) -> tuple[str, bytes, bytes]:
    r = Reader(body)
    vid = r.str_()
    a = r.bytes_()
    b = r.bytes_()
    r.expect_end()
    return vid, a, b


# --- the state machine ------------------------------------------------------


def _validate_profile(role: Role, attributes: dict[str, str]) -> None:
    for name in REQUIRED_ATTRIBUTES[role]:
        if not attributes.get(name, "").strip():
            raise MissingRequiredField(name)
    if role is Role.PATIENT:
        aadhar = attributes["aadhar"].strip()
        if len(aadhar) != 12 or not aadhar.isdigit():
            raise InvalidAadhar(f"aadhar must be exactly 12 decimal digits, got {aadhar!r}")
    if role is Role.DOCTOR and not attributes["registration_number"].strip():
        raise MissingRequiredField("registration_number")


@dataclass
class Registry:
    entities: dict[str, EntityProfile] = field(default_factory=dict)
    by_address: dict[bytes, str] = field(default_factory=dict)
    grants: dict[str, ConsentGrant] = field(default_factory=dict)
    records: dict[str, RecordEntry] = field(default_factory=dict)
    consent_events: dict[str, list[ConsentEvent]] = field(default_factory=dict)
    _entity_seq: dict[str, int] = field(default_factory=dict)
    _grant_seq: int = 0
    _record_seq: int = 0

    # -- lookups

    def entity_by_address(self, address: bytes) -> EntityProfile | None:
        eid = self.by_address.get(address)
        return self.entities.get(eid) if eid else None

    def grants_for_patient(self, patient: str) -> list[ConsentGrant]:
        return sorted(
            (g for g in self.grants.values() if g.patient == patient),
            key=lambda g: g.grant_id,
        )

    # -- the fold

    def apply_tx(self, tx: Transaction, slot: int, tx_hash: bytes) -> str | None:
        """Apply one transaction; returns the created id (entity/grant/record).

        Raises a RegistryError subclass on any rule violation; the ledger
        treats that as rejecting the whole block.
        """
        if tx.kind is TxKind.REGISTER:
            return self._register(tx)
        if tx.kind is TxKind.GRANT_CONSENT:
            return self._grant(tx, slot, tx_hash)
        if tx.kind is TxKind.REVOKE_CONSENT:
            return self._revoke(tx, slot, tx_hash)
        if tx.kind in RECORD_TX_KINDS:
            return self._append_record(tx, slot, tx_hash)
        if tx.kind is TxKind.SLASH:
            return None  # stake table change, handled by the ledger
        raise RegistryError(f"unhandled tx kind {tx.kind}")

    def _register(self, tx: Transaction) -> str:
        try:
            role, attrs = decode_register_body(tx.body)
        except (DecodeError, ValueError) as e:
            raise RegistryError(f"malformed register body: {e}") from e
        if tx.sender in self.by_address:
            raise DuplicateAddress(f"address {tx.sender.hex()} already registered")
        _validate_profile(role, attrs)
        prefix = _ROLE_PREFIX[role]
        seq = self._entity_seq.get(prefix, 0) + 1
        self._entity_seq[prefix] = seq
        entity_id = f"{prefix}-{seq}"
        profile = EntityProfile(entity_id=entity_id, role=role, address=tx.sender,
                                attributes=dict(attrs))
        self.entities[entity_id] = profile
        self.by_address[tx.sender] = entity_id
        if role is Role.PATIENT:
            self.consent_events.setdefault(entity_id, [])
        return entity_id

    def _grant(self, tx: Transaction, slot: int, tx_hash: bytes) -> str:
        try:
            patient_id, requester_id, scope, duration = decode_grant_body(tx.body)
        except (DecodeError, ValueError) as e:
            raise RegistryError(f"malformed grant body: {e}") from e
        patient = self.entities.get(patient_id)
        if patient is None:
            raise UnknownPatient(f"no entity {patient_id}")
        if patient.role is not Role.PATIENT or patient.address != tx.sender:
            raise NotOwner("only the patient may grant access to their records")
        requester = self.entities.get(requester_id)
        if requester is None:
            raise UnknownRequester(f"no entity {requester_id}")
        if requester.role is Role.PATIENT:
            raise BadScope("requester must not be a patient")
        if not scope:
            raise BadScope("consent scope is empty")
        self._grant_seq += 1
        grant = ConsentGrant(
            grant_id=f"grant-{self._grant_seq}",
            patient=patient_id,
            requester=requester_id,
            scope=scope,
            granted_at=slot,
            expires_at=None if duration is None else slot + duration,
        )
        self.grants[grant.grant_id] = grant
        self.consent_events.setdefault(patient_id, []).append(
            ConsentEvent(slot=slot, action="grant", grant_id=grant.grant_id, tx_hash=tx_hash)
        )
        return grant.grant_id

    def _revoke(self, tx: Transaction, slot: int, tx_hash: bytes) -> str:
        try:
            grant_id = decode_revoke_body(tx.body)
        except (DecodeError, ValueError) as e:
            raise RegistryError(f"malformed revoke body: {e}") from e
        grant = self.grants.get(grant_id)
        if grant is None:
            raise UnknownGrant(f"no grant {grant_id}")
        patient = self.entities[grant.patient]
        if patient.address != tx.sender:
            raise NotOwner("only the granting patient may revoke")
        if grant.revoked:
            raise AlreadyRevoked(grant_id)
        grant.revoked = True
        self.consent_events.setdefault(grant.patient, []).append(
            ConsentEvent(slot=slot, action="revoke", grant_id=grant_id, tx_hash=tx_hash)
        )
        return grant_id

    def _append_record(self, tx: Transaction, slot: int, tx_hash: bytes) -> str:
        try:
            patient_id, kind, media_type = decode_record_body(tx.body)
        except (DecodeError, ValueError) as e:
            raise RegistryError(f"malformed record body: {e}") from e
        forced = FORCED_RECORD_KIND.get(tx.kind)
        if forced is not None and kind is not forced:
            raise RegistryError(f"{tx.kind.name} tx must carry record kind {forced.name}")
        author = self.entity_by_address(tx.sender)
        if author is None:
            raise UnknownEntity(f"sender {tx.sender.hex()} is not registered")
        if patient_id not in self.entities:
            raise UnknownPatient(f"no entity {patient_id}")
        if not self.check_access(author.entity_id, patient_id, kind, slot):
            raise AccessDenied(
                f"{author.entity_id} has no consent for {RECORD_KIND_NAMES[kind]} "
                f"of {patient_id} at slot {slot}"
            )
        self._record_seq += 1
        entry = RecordEntry(
            record_id=f"rec-{self._record_seq}",
            patient=patient_id,
            author=author.entity_id,
            kind=kind,
            content_address=tx.payload_hash,
            media_type=media_type,
            created_at=slot,
            tx_hash=tx_hash,
        )
        self.records[entry.record_id] = entry
        return entry.record_id

    # -- queries (read-only, safe on a consistent snapshot)

    def check_access(
        self, requester: str, patient: str, kind: RecordKind, at_slot: int
    ) -> bool:
        """Pure function of registry state: the DAC decision."""
        if requester == patient:
            return True
        for grant in self.grants.values():
            if (
                grant.patient == patient
                and grant.requester == requester
                and kind in grant.scope
                and grant.active_at(at_slot)
            ):
                return True
        return False

    def list_records(self, requester: str, patient: str, at_slot: int) -> list[RecordEntry]:
        out = [
            rec
            for rec in self.records.values()
            if rec.patient == patient
            and self.check_access(requester, patient, rec.kind, at_slot)
        ]
        out.sort(key=lambda rec: (rec.created_at, rec.record_id))
        return out

    def audit_consent_log(self, patient: str, up_to_slot: int) -> list[ConsentEvent]:
        if patient not in self.entities:
            raise UnknownPatient(f"no entity {patient}")
        events = self.consent_events.get(patient, [])
        return [e for e in events if e.slot <= up_to_slot]

    # -- state commitment

    def encode_entries(self) -> list[bytes]:
        """Canonical encodings of every state entry, domain-tagged and sorted."""
        out = []
        for eid in sorted(self.entities):
            out.append(b"\x01" + self.entities[eid].encode())
        for gid in sorted(self.grants):
            out.append(b"\x02" + self.grants[gid].encode())
        for rid in sorted(self.records):
            out.append(b"\x03" + self.records[rid].encode())
        return out
