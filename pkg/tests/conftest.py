import pytest

from medledger.node import Node, demo_genesis
from medledger.store import OffchainStore
from medledger.wallet import keypair_from_passphrase_seed

PASSPHRASE = "correct horse battery staple"


@pytest.fixture
def account_keys():
    """Ten deterministic funded accounts, like the reference genesis."""
    return [keypair_from_passphrase_seed(f"account:{i}") for i in range(10)]


@pytest.fixture
def genesis_setup(account_keys):
    config, vkeys = demo_genesis(account_keys, n_validators=4, committee_size=4)
    return config, vkeys


@pytest.fixture
def fresh_node(genesis_setup, tmp_path):
    config, vkeys = genesis_setup
    store = OffchainStore(tmp_path / "store")
    return Node(config=config, validator_keys=vkeys, store=store,
                chain_path=tmp_path / "chain.dat")
