"""Merkle tree: hand-folded small cases, exhaustive soundness for n <= 16,
and proof-tampering failures."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from medledger.keccak import keccak256
from medledger.merkle import (
    EmptyTree,
    MerkleProof,
    build_merkle_root,
    leaf_hash,
    make_merkle_proof,
    node_hash,
    verify_merkle_proof,
)

H = [keccak256(bytes([i]) * 4) for i in range(20)]


def hand_node(left, right):
    # independent of merkle.node_hash: spell the domain prefix out
    return keccak256(b"\x01" + left + right)


def test_single_leaf_duplicates_itself():
    assert build_merkle_root([H[1]]) == hand_node(H[1], H[1])


def test_two_leaves():
    assert build_merkle_root([H[1], H[2]]) == hand_node(H[1], H[2])


def test_three_leaves_hand_fold():
    expected = hand_node(hand_node(H[1], H[2]), hand_node(H[3], H[3]))
    assert build_merkle_root([H[1], H[2], H[3]]) == expected


def test_leaf_hash_domain_prefix():
    assert leaf_hash(b"payload") == keccak256(b"\x00payload")
    assert node_hash(H[0], H[1]) == hand_node(H[0], H[1])


def test_empty_tree_rejected():
    with pytest.raises(EmptyTree):
        build_merkle_root([])


def test_proof_two_leaves_index_zero():
    proof = make_merkle_proof([H[1], H[2]], 0)
    assert proof.siblings == ((H[2], True),)  # sibling to the right


def test_proof_single_leaf():
    proof = make_merkle_proof([H[1]], 0)
    assert proof.siblings == ((H[1], True),)


def test_proof_index_out_of_range():
    with pytest.raises(IndexError):
        make_merkle_proof([H[1], H[2]], 2)


def test_exhaustive_roundtrip_and_substitution_up_to_16():
    evil = keccak256(b"substitute")
    for n in range(1, 17):
        leaves = H[:n]
        root = build_merkle_root(leaves)
        for index in range(n):
            proof = make_merkle_proof(leaves, index)
            assert verify_merkle_proof(leaves[index], proof, root)
            assert evil != leaves[index]
            assert not verify_merkle_proof(evil, proof, root)


def test_flipped_side_flag_fails():
    leaves = H[:5]
    root = build_merkle_root(leaves)
    proof = make_merkle_proof(leaves, 2)
    flipped = MerkleProof(
        leaf_index=proof.leaf_index,
        siblings=tuple(
            (h, not side) if i == 0 else (h, side)
            for i, (h, side) in enumerate(proof.siblings)
        ),
    )
    # sibling at the first level differs from the leaf, so swapping sides
    # changes the fold
    assert not verify_merkle_proof(leaves[2], flipped, root)


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=1, max_value=40), st.randoms(use_true_random=False))
def test_property_any_index_roundtrips(n, rnd):
    leaves = [keccak256(rnd.randbytes(8)) for _ in range(n)]
    root = build_merkle_root(leaves)
    index = rnd.randrange(n)
    proof = make_merkle_proof(leaves, index)
    assert verify_merkle_proof(leaves[index], proof, root)
