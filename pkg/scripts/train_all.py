#!/usr/bin/env python3
"""Train the four classifiers on all five disease schemas (synthetic data
unless a CSV directory is given) and write the selected models.

Usage: python scripts/train_all.py <out_dir> [csv_dir]

With csv_dir given, each disease loads <csv_dir>/<disease>.csv when present
and falls back to the synthetic generator otherwise.
"""

import sys
from pathlib import Path

from medledger import ml


def main():
    if len(sys.argv) < 2:
        print(__doc__)
        sys.exit(2)
    out_dir = Path(sys.argv[1])
    csv_dir = Path(sys.argv[2]) if len(sys.argv) > 2 else None
    out_dir.mkdir(parents=True, exist_ok=True)
    for disease in sorted(ml.SCHEMAS):
        csv_path = csv_dir / f"{disease}.csv" if csv_dir else None
        if csv_path and csv_path.exists():
            dataset = ml.load_csv(csv_path, ml.get_schema(disease))
        else:
            dataset = ml.synth_dataset(disease, n=300, seed=11)
        report = ml.train_and_select(dataset)
        (out_dir / f"{disease}.model").write_bytes(ml.save_model(report.models[report.best]))
        row = "  ".join(f"{a}={report.accuracies[a]:.3f}" for a in ml.models.ALGORITHMS)
        print(f"{disease:>15}: {row}  -> {report.best} "
              f"(baseline {report.baseline:.3f}, {dataset.provenance})")


if __name__ == "__main__":
    main()
