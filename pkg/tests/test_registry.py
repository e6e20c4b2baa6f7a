"""Registration rules, the consent truth table, record indexing, and the
audit log."""

import pytest

from medledger.blocks import Transaction, TxKind, ZERO_HASH, sign_tx
from medledger.keccak import keccak256
from medledger.registry import (
    AccessDenied,
    AlreadyRevoked,
    BadScope,
    DuplicateAddress,
    InvalidAadhar,
    MissingRequiredField,
    NotOwner,
    RecordKind,
    Registry,
    Role,
    UnknownGrant,
    UnknownPatient,
    encode_grant_body,
    encode_record_body,
    encode_register_body,
    encode_revoke_body,
)
from medledger.wallet import keypair_from_passphrase_seed

PATIENT_KEY = keypair_from_passphrase_seed("reg:patient")
DOCTOR_KEY = keypair_from_passphrase_seed("reg:doctor")
PHARMA_KEY = keypair_from_passphrase_seed("reg:pharmacy")

PATIENT_ATTRS = {
    "name": "Asha", "phone": "9000000001", "location": "Tumkur",
    "aadhar": "123412341234", "email": "asha@example.org",
    "medical_history": "none", "symptoms": "cough", "age": "34",
}
DOCTOR_ATTRS = {
    "name": "Dr. Rao", "phone": "9000000002", "location": "Tumkur",
    "email": "rao@example.org", "registration_number": "KA-1234",
    "registration_council": "KMC", "specialization": "cardiology",
    "experience_years": "11",
}
PHARMA_ATTRS = {"name": "MedPlus", "email": "store@example.org", "phone": "9000000003"}


def make_tx(key, kind, body, nonce=0, payload_hash=ZERO_HASH):
    return sign_tx(key, Transaction(
        sender=key.address, nonce=nonce, kind=kind, body=body,
        payload_hash=payload_hash, fee=1, public_key=key.public_bytes,
    ))


def register(reg, key, role, attrs, slot=1, nonce=0):
    tx = make_tx(key, TxKind.REGISTER, encode_register_body(role, attrs), nonce=nonce)
    return reg.apply_tx(tx, slot, tx.hash())


@pytest.fixture
def populated():
    reg = Registry()
    pat = register(reg, PATIENT_KEY, Role.PATIENT, PATIENT_ATTRS, slot=1)
    doc = register(reg, DOCTOR_KEY, Role.DOCTOR, DOCTOR_ATTRS, slot=1)
    pha = register(reg, PHARMA_KEY, Role.PHARMACY, PHARMA_ATTRS, slot=1)
    return reg, pat, doc, pha


def grant(reg, patient, requester, scope, duration, slot, nonce=1):
    tx = make_tx(PATIENT_KEY, TxKind.GRANT_CONSENT,
                 encode_grant_body(patient, requester, frozenset(scope), duration), nonce=nonce)
    return reg.apply_tx(tx, slot, tx.hash())


# -- registration -------------------------------------------------------------

def test_register_assigns_ids_and_indexes(populated):
    reg, pat, doc, pha = populated
    assert pat == "pat-1" and doc == "doc-1" and pha == "pha-1"
    assert reg.entities[pat].role is Role.PATIENT
    assert reg.entity_by_address(PATIENT_KEY.address).entity_id == pat


def test_register_bad_aadhar():
    reg = Registry()
    attrs = dict(PATIENT_ATTRS, aadhar="12345")
    with pytest.raises(InvalidAadhar):
        register(reg, PATIENT_KEY, Role.PATIENT, attrs)
    attrs = dict(PATIENT_ATTRS, aadhar="12341234123x")
    with pytest.raises(InvalidAadhar):
        register(reg, PATIENT_KEY, Role.PATIENT, attrs)


def test_register_duplicate_address(populated):
    reg, *_ = populated
    with pytest.raises(DuplicateAddress):
        register(reg, PATIENT_KEY, Role.PATIENT, PATIENT_ATTRS, nonce=1)


def test_register_missing_field():
    reg = Registry()
    attrs = dict(DOCTOR_ATTRS)
    del attrs["registration_number"]
    with pytest.raises(MissingRequiredField) as exc:
        register(reg, DOCTOR_KEY, Role.DOCTOR, attrs)
    assert exc.value.field_name == "registration_number"


# -- consent truth table --------------------------------------------------------

def test_check_access_truth_table(populated):
    reg, pat, doc, _ = populated
    kind = RecordKind.PRESCRIPTION

    # no grant
    assert reg.check_access(doc, pat, kind, at_slot=5) is False
    # active grant (slots 5..15 inclusive)
    gid = grant(reg, pat, doc, {kind}, duration=10, slot=5)
    assert reg.check_access(doc, pat, kind, at_slot=5) is True
    assert reg.check_access(doc, pat, kind, at_slot=15) is True   # inclusive expiry
    # expired
    assert reg.check_access(doc, pat, kind, at_slot=16) is False
    # scope mismatch
    assert reg.check_access(doc, pat, RecordKind.REPORT, at_slot=6) is False
    # revoked
    tx = make_tx(PATIENT_KEY, TxKind.REVOKE_CONSENT, encode_revoke_body(gid), nonce=2)
    reg.apply_tx(tx, 8, tx.hash())
    assert reg.check_access(doc, pat, kind, at_slot=9) is False
    # permanent
    grant(reg, pat, doc, {kind}, duration=None, slot=9, nonce=3)
    assert reg.check_access(doc, pat, kind, at_slot=10_000_000) is True
    # self access
    assert reg.check_access(pat, pat, kind, at_slot=1) is True


def test_permanent_grant_is_revocable(populated):
    reg, pat, doc, _ = populated
    gid = grant(reg, pat, doc, {RecordKind.REPORT}, duration=None, slot=2)
    assert reg.check_access(doc, pat, RecordKind.REPORT, 500)
    tx = make_tx(PATIENT_KEY, TxKind.REVOKE_CONSENT, encode_revoke_body(gid), nonce=2)
    reg.apply_tx(tx, 600, tx.hash())
    assert not reg.check_access(doc, pat, RecordKind.REPORT, 700)


def test_grant_by_non_owner_rejected(populated):
    reg, pat, doc, _ = populated
    body = encode_grant_body(pat, doc, frozenset({RecordKind.REPORT}), 10)
    tx = make_tx(DOCTOR_KEY, TxKind.GRANT_CONSENT, body, nonce=1)
    with pytest.raises(NotOwner):
        reg.apply_tx(tx, 5, tx.hash())


def test_grant_to_patient_rejected(populated):
    reg, pat, _, _ = populated
    other_key = keypair_from_passphrase_seed("reg:patient2")
    attrs = dict(PATIENT_ATTRS, aadhar="999912341234")
    tx = make_tx(other_key, TxKind.REGISTER, encode_register_body(Role.PATIENT, attrs))
    pat2 = reg.apply_tx(tx, 1, tx.hash())
    with pytest.raises(BadScope):
        grant(reg, pat, pat2, {RecordKind.REPORT}, duration=10, slot=2)


def test_grant_empty_scope_rejected(populated):
    reg, pat, doc, _ = populated
    with pytest.raises(BadScope):
        grant(reg, pat, doc, set(), duration=10, slot=2)


def test_revoke_errors(populated):
    reg, pat, doc, _ = populated
    gid = grant(reg, pat, doc, {RecordKind.REPORT}, duration=10, slot=2)
    bad = make_tx(DOCTOR_KEY, TxKind.REVOKE_CONSENT, encode_revoke_body(gid), nonce=1)
    with pytest.raises(NotOwner):
        reg.apply_tx(bad, 3, bad.hash())
    with pytest.raises(UnknownGrant):
        tx = make_tx(PATIENT_KEY, TxKind.REVOKE_CONSENT, encode_revoke_body("grant-99"), nonce=2)
        reg.apply_tx(tx, 3, tx.hash())
    tx = make_tx(PATIENT_KEY, TxKind.REVOKE_CONSENT, encode_revoke_body(gid), nonce=2)
    reg.apply_tx(tx, 3, tx.hash())
    again = make_tx(PATIENT_KEY, TxKind.REVOKE_CONSENT, encode_revoke_body(gid), nonce=3)
    with pytest.raises(AlreadyRevoked):
        reg.apply_tx(again, 4, again.hash())


# -- records -------------------------------------------------------------------

def append_record(reg, key, patient, kind, nonce, slot, tx_kind=TxKind.APPEND_RECORD):
    address = keccak256(b"payload")
    tx = make_tx(key, tx_kind, encode_record_body(patient, kind, "report/text"),
                 nonce=nonce, payload_hash=address)
    return reg.apply_tx(tx, slot, tx.hash())


def test_consented_doctor_appends(populated):
    reg, pat, doc, _ = populated
    grant(reg, pat, doc, {RecordKind.PRESCRIPTION}, duration=10, slot=2)
    rid = append_record(reg, DOCTOR_KEY, pat, RecordKind.PRESCRIPTION, nonce=1, slot=3,
                        tx_kind=TxKind.PRESCRIPTION)
    listed = reg.list_records(pat, pat, at_slot=3)
    assert [r.record_id for r in listed] == [rid]
    assert listed[0].author == doc


def test_unconsented_pharmacy_denied(populated):
    reg, pat, _, _ = populated
    with pytest.raises(AccessDenied):
        append_record(reg, PHARMA_KEY, pat, RecordKind.COMMENT, nonce=1, slot=3,
                      tx_kind=TxKind.COMMENT)


def test_forced_record_kind(populated):
    reg, pat, doc, _ = populated
    grant(reg, pat, doc, set(RecordKind), duration=10, slot=2)
    with pytest.raises(Exception, match="PRESCRIPTION tx must carry"):
        append_record(reg, DOCTOR_KEY, pat, RecordKind.REPORT, nonce=1, slot=3,
                      tx_kind=TxKind.PRESCRIPTION)


def test_list_records_respects_scope(populated):
    reg, pat, doc, _ = populated
    grant(reg, pat, doc, set(RecordKind), duration=100, slot=2)
    append_record(reg, DOCTOR_KEY, pat, RecordKind.REPORT, nonce=1, slot=3)
    append_record(reg, DOCTOR_KEY, pat, RecordKind.PRESCRIPTION, nonce=2, slot=4)
    # new grant for the pharmacy, Report only
    grant(reg, pat, "pha-1", {RecordKind.REPORT}, duration=100, slot=5, nonce=2)
    visible = reg.list_records("pha-1", pat, at_slot=6)
    assert [r.kind for r in visible] == [RecordKind.REPORT]
    nobody = keypair_from_passphrase_seed("reg:nobody")
    tx = make_tx(nobody, TxKind.REGISTER, encode_register_body(Role.PATHLAB, PHARMA_ATTRS))
    lab = reg.apply_tx(tx, 6, tx.hash())
    assert reg.list_records(lab, pat, at_slot=7) == []


# -- audit ----------------------------------------------------------------------

def test_audit_consent_log(populated):
    reg, pat, doc, _ = populated
    gid = grant(reg, pat, doc, {RecordKind.REPORT}, duration=100, slot=5)
    tx = make_tx(PATIENT_KEY, TxKind.REVOKE_CONSENT, encode_revoke_body(gid), nonce=2)
    reg.apply_tx(tx, 9, tx.hash())
    upto7 = reg.audit_consent_log(pat, up_to_slot=7)
    assert [(e.action, e.slot) for e in upto7] == [("grant", 5)]
    upto9 = reg.audit_consent_log(pat, up_to_slot=9)
    assert [(e.action, e.slot) for e in upto9] == [("grant", 5), ("revoke", 9)]
    assert all(e.tx_hash for e in upto9)
    with pytest.raises(UnknownPatient):
        reg.audit_consent_log("pat-77", up_to_slot=1)
