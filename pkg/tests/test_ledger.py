"""Ledger core: genesis wiring, block application rules, fee conservation,
whole-chain validation, and the chain file format."""

import dataclasses

import pytest

from medledger.blocks import Transaction, TxKind, ZERO_HASH, sign_tx
from medledger.genesis import GenesisConfig, load_genesis, parse_genesis, write_genesis
from medledger.keccak import keccak256
from medledger.ledger import (
    ChainFileError,
    LedgerError,
    LedgerState,
    load_chain,
    manifest_path,
    save_chain,
    validate_chain,
)
from medledger.node import Node, demo_genesis
from medledger.registry import Role, encode_register_body
from medledger.store import OffchainStore
from medledger.wallet import keypair_from_passphrase_seed

KEYS = [keypair_from_passphrase_seed(f"ledger:acct:{i}") for i in range(10)]


@pytest.fixture
def setup(tmp_path):
    config, vkeys = demo_genesis(KEYS, n_validators=4, committee_size=4, seed_label="ledger")
    node = Node(config=config, validator_keys=vkeys, store=OffchainStore(tmp_path / "store"),
                chain_path=tmp_path / "chain.dat")
    return config, vkeys, node


def register_tx(key, nonce=0, aadhar="123412341234", fee=1):
    attrs = {
        "name": "N", "phone": "1", "location": "L", "aadhar": aadhar,
        "email": "e@x", "medical_history": "h", "symptoms": "s", "age": "30",
    }
    return sign_tx(key, Transaction(
        sender=key.address, nonce=nonce, kind=TxKind.REGISTER,
        body=encode_register_body(Role.PATIENT, attrs),
        payload_hash=ZERO_HASH, fee=fee, public_key=key.public_bytes,
    ))


def test_genesis_accounts_funded(setup):
    config, vkeys, node = setup
    assert len(config.accounts) == 10
    for key in KEYS:
        assert node.account_info(key.address).balance == 100
    assert node.state.total_supply() == 1000
    assert node.head().height == 0


def test_fee_deduction_and_nonce(setup):
    _, _, node = setup
    node.submit_tx(register_tx(KEYS[0]))
    acct = node.account_info(KEYS[0].address)
    assert acct.balance == 99
    assert acct.nonce == 1


def test_replayed_tx_rejected_nonce(setup):
    _, _, node = setup
    tx = register_tx(KEYS[0])
    node.submit_tx(tx)
    from medledger.node import NodeError

    with pytest.raises(NodeError) as exc:
        node.submit_tx(tx)
    assert exc.value.code == "NonceReplay"


def test_insufficient_balance(setup):
    config, vkeys, node = setup
    broke = keypair_from_passphrase_seed("ledger:broke")
    from medledger.node import NodeError

    with pytest.raises(NodeError) as exc:
        node.submit_tx(register_tx(broke))
    assert exc.value.code == "InsufficientBalance"


def test_conservation_fees_burned(setup):
    _, _, node = setup
    genesis_total = node.state.total_supply()
    k = 4
    for i in range(k):
        node.submit_tx(register_tx(KEYS[i], aadhar=f"{100000000000 + i}"))
    assert node.state.total_supply() == genesis_total - k
    assert node.account_info(KEYS[0].address).balance == 99


def test_bad_tx_root_rejected(setup):
    _, _, node = setup
    block = node.submit_tx(register_tx(KEYS[0]))
    tampered_header = dataclasses.replace(block.header, tx_root=keccak256(b"zap"))
    bad = dataclasses.replace(block, header=tampered_header)
    state = LedgerState.genesis(node.config)
    with pytest.raises(LedgerError) as exc:
        state.apply_block(bad)
    assert exc.value.reason == "BadTxRoot"


def test_bad_parent_rejected(setup):
    _, _, node = setup
    block = node.submit_tx(register_tx(KEYS[0]))
    state = LedgerState.genesis(node.config)
    wrong_parent = dataclasses.replace(block.header, parent_hash=keccak256(b"other"))
    with pytest.raises(LedgerError) as exc:
        state.apply_block(dataclasses.replace(block, header=wrong_parent))
    assert exc.value.reason == "BadParent"


def test_bad_state_root_rejected(setup):
    _, _, node = setup
    block = node.submit_tx(register_tx(KEYS[0]))
    # a block with a wrong state root needs fresh attestations to get past
    # the quorum check, so rebuild it via consensus on a fresh state
    from fractions import Fraction

    from medledger import consensus

    state = LedgerState.genesis(node.config)
    slot = 1
    committee = consensus.select_committee(state.stakes, slot, node.config.seed, 4)
    clock = consensus.SlotClock(slot_duration_ms=node.config.slot_duration_ms)
    proposal = consensus.propose_block(
        committee, committee.proposer, list(block.transactions), state.head, clock,
        keccak256(b"wrong state root"),
    )
    atts = [
        consensus.attest(m, node.validator_keys[m], proposal, slot, committee, state.head)
        for m in committee.members
    ]
    result = consensus.finalize_slot(proposal, atts, committee, Fraction(2, 3), state.stakes)
    assert result.finalized
    final = dataclasses.replace(proposal, attestations=result.valid_attestations)
    with pytest.raises(LedgerError) as exc:
        state.apply_block(final)
    assert exc.value.reason == "BadStateRoot"


def test_validate_chain_clean(setup):
    _, _, node = setup
    for i in range(5):
        node.submit_tx(register_tx(KEYS[i], aadhar=f"{200000000000 + i}"))
    report = validate_chain(node.state.blocks, node.config)
    assert report.ok


def test_validate_chain_reports_tamper_height(setup):
    _, _, node = setup
    for i in range(5):
        node.submit_tx(register_tx(KEYS[i], aadhar=f"{300000000000 + i}"))
    blocks = list(node.state.blocks)
    target = blocks[3]
    tx = target.transactions[0]
    tampered_tx = dataclasses.replace(tx, payload_hash=keccak256(b"flip"))
    blocks[3] = dataclasses.replace(target, transactions=(tampered_tx,))
    report = validate_chain(blocks, node.config)
    assert not report.ok
    assert report.height == 3
    assert report.reason in ("BadTxRoot",)


def test_chain_file_roundtrip(setup, tmp_path):
    _, _, node = setup
    for i in range(3):
        node.submit_tx(register_tx(KEYS[i], aadhar=f"{400000000000 + i}"))
    path = tmp_path / "copy.dat"
    save_chain(path, node.state.blocks)
    loaded = load_chain(path)
    assert [b.hash() for b in loaded] == [b.hash() for b in node.state.blocks]
    manifest = manifest_path(path).read_text()
    assert f"head_height = {node.head().height}" in manifest
    assert validate_chain(loaded, node.config).ok


def test_chain_file_rejects_uppercase_hex(setup, tmp_path):
    _, _, node = setup
    path = tmp_path / "chain.dat"
    save_chain(path, node.state.blocks)
    text = path.read_text()
    assert "A" not in text
    path.write_text(text.replace("a", "A", 1))
    with pytest.raises(ChainFileError):
        load_chain(path)


def test_chain_file_rejects_length_mismatch(setup, tmp_path):
    _, _, node = setup
    path = tmp_path / "chain.dat"
    save_chain(path, node.state.blocks)
    lines = path.read_text().splitlines()
    lines[0] = lines[0][:-2]  # drop one byte of hex
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(ChainFileError):
        load_chain(path)


def test_genesis_file_roundtrip(tmp_path):
    config, _ = demo_genesis(KEYS[:3], n_validators=2, seed_label="gfile")
    path = tmp_path / "genesis.txt"
    write_genesis(path, config)
    loaded = load_genesis(path)
    assert loaded.encode() == config.encode()
    assert loaded.hash() == config.hash()


def test_genesis_rejects_bad_quorum():
    with pytest.raises(Exception, match="quorum"):
        parse_genesis("quorum = 5/3\nseed = " + "00" * 32 + "\n")


def test_node_refuses_corrupt_chain_on_start(setup, tmp_path):
    config, vkeys, node = setup
    node.submit_tx(register_tx(KEYS[0]))
    path = node.chain_path
    text = path.read_text()
    # flip a payload byte inside the last frame
    line = text.splitlines()[-1]
    pos = len(line) // 2
    ch = line[pos]
    repl = "0" if ch != "0" else "1"
    corrupted = text.replace(line, line[:pos] + repl + line[pos + 1:])
    path.write_text(corrupted)
    from medledger.node import NodeError

    with pytest.raises(NodeError):
        Node(config=config, validator_keys=vkeys,
             store=OffchainStore(tmp_path / "store2"), chain_path=path)
