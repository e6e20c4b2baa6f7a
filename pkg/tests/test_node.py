"""Node end-to-end flows: records with off-chain payloads, slashing via
transaction, replay determinism, and the DAC adversarial fuzz."""

import random

import pytest

from medledger.blocks import Attestation, TxKind, attestation_message
from medledger.keccak import keccak256
from medledger.ledger import LedgerState, load_chain, validate_chain
from medledger.merkle import verify_merkle_proof
from medledger.node import (
    Node,
    NodeError,
    build_grant_tx,
    build_record_tx,
    build_register_tx,
    build_revoke_tx,
    build_slash_tx,
    demo_genesis,
)
from medledger.registry import RecordKind, Role
from medledger.store import OffchainStore
from medledger.wallet import keypair_from_passphrase_seed

KEYS = [keypair_from_passphrase_seed(f"node:acct:{i}") for i in range(10)]

PATIENT, DOCTOR, PHARMA, HOSPITAL = KEYS[0], KEYS[1], KEYS[2], KEYS[3]

PATIENT_ATTRS = {
    "name": "Asha", "phone": "9", "location": "T", "aadhar": "123412341234",
    "email": "a@x", "medical_history": "none", "symptoms": "cough", "age": "34",
}
DOCTOR_ATTRS = {
    "name": "Dr Rao", "phone": "9", "location": "T", "email": "r@x",
    "registration_number": "KA-1", "registration_council": "KMC",
    "specialization": "cardio", "experience_years": "11",
}
SIMPLE_ATTRS = {"name": "Org", "email": "o@x", "phone": "9"}


def new_node(tmp_path, label="node-tests", subdir=""):
    config, vkeys = demo_genesis(KEYS, n_validators=4, committee_size=4, seed_label=label)
    base = tmp_path / subdir if subdir else tmp_path
    base.mkdir(parents=True, exist_ok=True)
    store = OffchainStore(base / "store")
    return Node(config=config, validator_keys=vkeys, store=store, chain_path=base / "chain.dat")


def register_all(node):
    fee = node.config.fee
    pat = node.submit_tx(build_register_tx(PATIENT, 0, fee, Role.PATIENT, PATIENT_ATTRS))
    doc = node.submit_tx(build_register_tx(DOCTOR, 0, fee, Role.DOCTOR, DOCTOR_ATTRS))
    pha = node.submit_tx(build_register_tx(PHARMA, 0, fee, Role.PHARMACY, SIMPLE_ATTRS))
    reg = node.state.registry
    return (
        reg.entity_by_address(PATIENT.address).entity_id,
        reg.entity_by_address(DOCTOR.address).entity_id,
        reg.entity_by_address(PHARMA.address).entity_id,
    )


def test_record_flow_with_offchain_payload(tmp_path):
    node = new_node(tmp_path)
    pat, doc, _ = register_all(node)
    fee = node.config.fee
    node.submit_tx(build_grant_tx(
        PATIENT, 1, fee, pat, doc, frozenset({RecordKind.PRESCRIPTION}), 100,
    ))
    address = node.put_document(b"amoxicillin 500mg twice daily", "report/text")
    node.submit_tx(build_record_tx(
        DOCTOR, 1, fee, TxKind.PRESCRIPTION, pat, RecordKind.PRESCRIPTION,
        address, "report/text",
    ))
    records = node.state.registry.list_records(pat, pat, node.current_slot())
    assert len(records) == 1
    assert records[0].content_address == address
    assert node.store.get(address).data == b"amoxicillin 500mg twice daily"


def test_record_without_stored_content_rejected(tmp_path):
    node = new_node(tmp_path)
    pat, doc, _ = register_all(node)
    fee = node.config.fee
    node.submit_tx(build_grant_tx(
        PATIENT, 1, fee, pat, doc, frozenset({RecordKind.PRESCRIPTION}), 100,
    ))
    with pytest.raises(NodeError) as exc:
        node.submit_tx(build_record_tx(
            DOCTOR, 1, fee, TxKind.PRESCRIPTION, pat, RecordKind.PRESCRIPTION,
            keccak256(b"never put"), "report/text",
        ))
    assert exc.value.code == "MISSING_CONTENT"


def test_unconsented_append_rejected_and_slot_consumed(tmp_path):
    node = new_node(tmp_path)
    pat, doc, pha = register_all(node)
    address = node.put_document(b"pill note", "report/text")
    before = node.head().height
    with pytest.raises(NodeError) as exc:
        node.submit_tx(build_record_tx(
            PHARMA, 1, node.config.fee, TxKind.COMMENT, pat, RecordKind.COMMENT,
            address, "report/text",
        ))
    assert exc.value.code == "ACCESS_DENIED"
    assert node.head().height == before


def test_consent_expiry_over_slots(tmp_path):
    node = new_node(tmp_path)
    pat, doc, _ = register_all(node)
    fee = node.config.fee
    node.submit_tx(build_grant_tx(
        PATIENT, 1, fee, pat, doc, frozenset({RecordKind.REPORT}), 3,
    ))
    reg = node.state.registry
    slot = node.current_slot()
    assert reg.check_access(doc, pat, RecordKind.REPORT, slot)
    node.advance_slots(10)
    assert not reg.check_access(doc, pat, RecordKind.REPORT, node.current_slot())


def test_merkle_proof_endpoint_data(tmp_path):
    node = new_node(tmp_path)
    register_all(node)
    block = node.get_block(1)
    proof, root = node.tx_proof(1, 0)
    assert verify_merkle_proof(block.transactions[0].leaf(), proof, root)
    with pytest.raises(NodeError):
        node.tx_proof(1, 5)
    with pytest.raises(NodeError):
        node.get_block(99)


def test_slash_transaction_end_to_end(tmp_path):
    node = new_node(tmp_path)
    register_all(node)
    evil = "v2"
    evil_key = node.validator_keys[evil]
    slot = 999
    a_hash, b_hash = keccak256(b"fork-a"), keccak256(b"fork-b")
    ev = (
        Attestation(slot, a_hash, evil, evil_key.sign(attestation_message(slot, a_hash))),
        Attestation(slot, b_hash, evil, evil_key.sign(attestation_message(slot, b_hash))),
    )
    node.submit_tx(build_slash_tx(HOSPITAL, 0, node.config.fee, evil, ev))
    from medledger.consensus import ValidatorStatus

    assert node.state.stakes.entries[evil].status is ValidatorStatus.SLASHED
    report = validate_chain(node.state.blocks, node.config)
    assert report.ok
    # the slashed validator never appears in committees afterwards
    from medledger.consensus import select_committee

    for s in range(node.current_slot() + 1, node.current_slot() + 200):
        assert evil not in select_committee(node.state.stakes, s, node.config.seed, 4).members


def test_reload_reproduces_state_root(tmp_path):
    node = new_node(tmp_path)
    pat, doc, _ = register_all(node)
    fee = node.config.fee
    grant_block = node.submit_tx(build_grant_tx(
        PATIENT, 1, fee, pat, doc, frozenset({RecordKind.REPORT}), 50,
    ))
    address = node.put_document(b"scan", "media/image")
    node.submit_tx(build_record_tx(
        DOCTOR, 1, fee, TxKind.APPEND_RECORD, pat, RecordKind.REPORT, address, "media/image",
    ))
    blocks = load_chain(node.chain_path)
    state = LedgerState.genesis(node.config)
    for block in blocks[1:]:
        state.apply_block(block)
    assert state.state_root() == node.state.state_root()
    assert state.registry.audit_consent_log(pat, 10_000) == \
        node.state.registry.audit_consent_log(pat, 10_000)
    assert grant_block.hash() in [b.hash() for b in blocks]


def test_rerun_is_bit_identical(tmp_path):
    hashes = []
    for run in ("a", "b"):
        node = new_node(tmp_path, subdir=run)
        pat, doc, _ = register_all(node)
        fee = node.config.fee
        node.submit_tx(build_grant_tx(
            PATIENT, 1, fee, pat, doc, frozenset({RecordKind.REPORT}), 50,
        ))
        address = node.put_document(b"same payload", "report/text")
        node.submit_tx(build_record_tx(
            DOCTOR, 1, fee, TxKind.APPEND_RECORD, pat, RecordKind.REPORT,
            address, "report/text",
        ))
        hashes.append([b.hash() for b in node.state.blocks])
    assert hashes[0] == hashes[1]


def test_dac_fuzz_no_adversary_gains_access(tmp_path):
    """1,000 random non-patient-signed transactions never open access."""
    node = new_node(tmp_path)
    pat, doc, pha = register_all(node)
    adversary_keys = [DOCTOR, PHARMA, HOSPITAL, *KEYS[4:8]]
    node.submit_tx(build_register_tx(HOSPITAL, 0, node.config.fee, Role.HOSPITAL, {
        "name": "H", "email": "h@x", "phone": "9", "address": "T",
        "year_of_establishment": "1990",
    }))
    address = node.put_document(b"adversarial payload", "report/text")
    rnd = random.Random(42)
    attempts = 0
    for _ in range(1000):
        key = rnd.choice(adversary_keys)
        nonce = node.next_nonce(key.address)
        action = rnd.randrange(3)
        try:
            if action == 0:  # grant signed by a non-patient
                tx = build_grant_tx(
                    key, nonce, node.config.fee, pat,
                    rnd.choice([doc, pha]), frozenset({rnd.choice(list(RecordKind))}),
                    rnd.choice([None, 10, 100]),
                )
            elif action == 1:  # revoke someone else's grant
                tx = build_revoke_tx(key, nonce, node.config.fee, f"grant-{rnd.randrange(3)}")
            else:  # append a record without consent
                tx = build_record_tx(
                    key, nonce, node.config.fee, TxKind.APPEND_RECORD, pat,
                    rnd.choice(list(RecordKind)), address, "report/text",
                )
            node.submit_tx(tx)
        except NodeError:
            attempts += 1
    assert attempts == 1000  # every adversarial mutation was rejected
    registry = node.state.registry  # re-read: committed state swaps per block
    for requester in (doc, pha):
        for kind in RecordKind:
            assert not registry.check_access(requester, pat, kind, node.current_slot())
