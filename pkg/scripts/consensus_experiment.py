#!/usr/bin/env python3
"""Sweep committee selection over several stake distributions and print how
closely proposer frequencies track stake shares.

Usage: python scripts/consensus_experiment.py [slots]
"""

import sys

from medledger import consensus
from medledger.keccak import keccak256
from medledger.wallet import keypair_from_passphrase_seed


def sweep(stakes, slots, label):
    entries = {}
    for i, stake in enumerate(stakes, start=1):
        vid = f"v{i}"
        pair = keypair_from_passphrase_seed(f"exp:{label}:{vid}")
        entries[vid] = consensus.Validator(id=vid, public_key=pair.public_bytes, stake=stake)
    table = consensus.StakeTable(entries=entries)
    seed = keccak256(f"experiment:{label}".encode())
    counts = {vid: 0 for vid in entries}
    for slot in range(slots):
        counts[consensus.select_committee(table, slot, seed, 1).proposer] += 1
    total = sum(stakes)
    print(f"\nstakes {stakes} over {slots} slots:")
    for vid in sorted(entries):
        expected = entries[vid].stake / total
        observed = counts[vid] / slots
        print(f"  {vid}: expected {expected:.4f}  observed {observed:.4f}  "
              f"delta {observed - expected:+.4f}")


def main():
    slots = int(sys.argv[1]) if len(sys.argv) > 1 else 5000
    for stakes in ([1, 1, 1, 1], [1, 2, 3, 4], [1, 1, 1, 97], [5, 10, 85]):
        sweep(stakes, slots, label="-".join(map(str, stakes)))


if __name__ == "__main__":
    main()
