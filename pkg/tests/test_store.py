"""Content-addressed store: round-trips, idempotence, corruption reporting."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from medledger.keccak import keccak256
from medledger.store import CorruptContent, NotFound, OffchainStore, TooLarge


@pytest.fixture
def store(tmp_path):
    return OffchainStore(tmp_path / "store")


def test_put_get_roundtrip(store):
    addr = store.put(b"prescription text", "report/text")
    doc = store.get(addr)
    assert doc.data == b"prescription text"
    assert doc.media_type == "report/text"
    assert doc.content_address == keccak256(b"prescription text")


def test_put_is_idempotent(store):
    a1 = store.put(b"same bytes", "report/text")
    before = len(store)
    a2 = store.put(b"same bytes", "media/image")
    assert a1 == a2
    assert len(store) == before


def test_empty_payload_address_is_keccak_of_empty(store):
    addr = store.put(b"", "report/text")
    assert addr.hex() == "c5d2460186f7233c927e7db2dcc703c0e500b653ca82273b7bfad8045d85a470"


def test_too_large(tmp_path):
    small = OffchainStore(tmp_path / "s", max_bytes=8)
    with pytest.raises(TooLarge):
        small.put(b"123456789", "report/text")


def test_unknown_address(store):
    with pytest.raises(NotFound):
        store.get(keccak256(b"never stored"))


def test_corrupt_content_detected(store):
    addr = store.put(b"original bytes here", "report/text")
    path = store._path_for(addr)
    raw = bytearray(path.read_bytes())
    raw[3] ^= 0xFF
    path.write_bytes(bytes(raw))
    with pytest.raises(CorruptContent):
        store.get(addr)


def test_verify_all_reports_exactly_the_tampered_address(store):
    good = store.put(b"kept intact", "report/text")
    bad = store.put(b"to be tampered", "report/text")
    assert store.verify_all() == []
    path = store._path_for(bad)
    raw = bytearray(path.read_bytes())
    raw[0] ^= 0x01
    path.write_bytes(bytes(raw))
    assert store.verify_all() == [bad]
    assert store.get(good).data == b"kept intact"


def test_empty_store_verifies_clean(store):
    assert store.verify_all() == []


def test_index_survives_reopen(tmp_path):
    store = OffchainStore(tmp_path / "store")
    addr = store.put(b"persisted", "media/image")
    reopened = OffchainStore(tmp_path / "store")
    assert reopened.get(addr).media_type == "media/image"


@settings(max_examples=50, deadline=None)
@given(st.binary(max_size=300))
def test_property_roundtrip(tmp_path_factory, data):
    store = OffchainStore(tmp_path_factory.mktemp("cas") / "store")
    assert store.get(store.put(data, "report/text")).data == data
