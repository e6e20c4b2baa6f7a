"""medledger: a permissioned medical-data-asset ledger with PoS committee
finalization, patient-owned consent control, content-addressed off-chain
record storage, and built-in disease-risk classifiers."""

__version__ = "0.1.0"
