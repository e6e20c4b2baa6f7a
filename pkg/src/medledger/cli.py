"""The medledger command line: run the node, drive scenario scripts, train
and evaluate predictors, and simulate committee selection.

Every failure path exits nonzero with a machine-parsable last line of the
form ``ERROR code=<CODE> ...``; successful runs end with ``OK ...``.
"""

from __future__ import annotations

import json
import math
import sys
import tempfile
from fractions import Fraction
from pathlib import Path

import click

from . import consensus, ml
from .api import create_app
from .genesis import GenesisConfig, load_genesis, write_genesis
from .keccak import keccak256
from .ledger import ChainFileError, load_chain, validate_chain
from .ml.schemas import SCHEMAS
from .node import Node, NodeError, demo_validators
from .scenario import ScenarioError, run_scenario
from .store import OffchainStore
from .wallet import keypair_from_passphrase_seed, load_keystore, save_keystore

DEMO_PASSPHRASE = "medledger-demo"


def _fail(code: str, message: str) -> None:
    click.echo(message, err=True)
    click.echo(f"ERROR code={code}")
    sys.exit(1)


@click.group()
def main():
    """Permissioned medical-data ledger with PoS finalization and
    built-in disease-risk predictors."""


# -- node -----------------------------------------------------------------------


@main.command()
@click.option("--genesis", "genesis_path", envvar="MEDLEDGER_GENESIS", required=True,
              type=click.Path(exists=True, path_type=Path))
@click.option("--store-dir", envvar="MEDLEDGER_STORE_DIR", default="./store",
              type=click.Path(path_type=Path))
@click.option("--keystore", envvar="MEDLEDGER_KEYSTORE", default="./keystore",
              type=click.Path(path_type=Path))
@click.option("--listen", envvar="MEDLEDGER_LISTEN", default="127.0.0.1:8540")
@click.option("--slot-ms", envvar="MEDLEDGER_SLOT_MS", default=None, type=int,
              help="Override the genesis slot duration (e.g. 20 for demos).")
@click.option("--models-dir", envvar="MEDLEDGER_MODELS_DIR", default="./models",
              type=click.Path(path_type=Path))
@click.option("--chain", "chain_path", envvar="MEDLEDGER_CHAIN", default="./chain.dat",
              type=click.Path(path_type=Path))
@click.option("--passphrase", envvar="MEDLEDGER_KEYSTORE_PASSPHRASE",
              default=DEMO_PASSPHRASE)
def node(genesis_path, store_dir, keystore, listen, slot_ms, models_dir, chain_path,
         passphrase):
    """Run the HTTP node over the given genesis."""
    import uvicorn

    config = load_genesis(genesis_path)
    if slot_ms is not None:
        config.slot_duration_ms = slot_ms
    validator_keys = {}
    keystore = Path(keystore)
    if keystore.is_dir():
        for path in sorted(keystore.glob("*.store")):
            validator_keys[path.stem] = load_keystore(path, passphrase)
    try:
        running = Node(config=config, validator_keys=validator_keys,
                       store=OffchainStore(Path(store_dir)), chain_path=Path(chain_path))
    except (NodeError, ChainFileError) as e:
        _fail("CORRUPT_CHAIN", str(e))
    app = create_app(running, models_dir=models_dir)
    host, _, port = listen.partition(":")

    # wall-clock slot pacing: grants expire in real time even without traffic
    import threading
    import time as time_mod

    def tick():
        while True:
            time_mod.sleep(running.config.slot_duration_ms / 1000.0)
            running.advance_slots(1)

    threading.Thread(target=tick, daemon=True).start()
    click.echo(f"medledger node on {listen}, head height {running.head().height}, "
               f"slot every {running.config.slot_duration_ms} ms")
    uvicorn.run(app, host=host, port=int(port or 8540), log_level="warning")


@main.command("init-demo")
@click.option("--dir", "target", default=".", type=click.Path(path_type=Path))
@click.option("--validators", "n_validators", default=4, type=int)
@click.option("--accounts", default=10, type=int)
@click.option("--passphrase", envvar="MEDLEDGER_KEYSTORE_PASSPHRASE",
              default=DEMO_PASSPHRASE)
def init_demo(target, n_validators, accounts, passphrase):
    """Write a runnable demo genesis, account keystores, and validator keys."""
    target = Path(target)
    (target / "keystore").mkdir(parents=True, exist_ok=True)
    (target / "wallets").mkdir(parents=True, exist_ok=True)
    validators, vkeys = demo_validators(n_validators)
    account_keys = [keypair_from_passphrase_seed(f"demo-account:{i}") for i in range(accounts)]
    config = GenesisConfig(
        accounts=[(k.address, 100) for k in account_keys],
        validators=validators,
        committee_size=n_validators,
        seed=keccak256(b"genesis-seed:demo"),
    )
    write_genesis(target / "genesis.txt", config)
    for vid, key in vkeys.items():
        save_keystore(target / "keystore" / f"{vid}.store", key, passphrase)
    for i, key in enumerate(account_keys):
        save_keystore(target / "wallets" / f"account-{i}.store", key, passphrase)
    click.echo(f"wrote {target / 'genesis.txt'}, {n_validators} validator keys, "
               f"{accounts} wallets")
    click.echo("OK")


# -- scenario ----------------------------------------------------------------------


@main.group()
def scenario():
    """Scripted end-to-end workflows against a fresh in-process node."""


@scenario.command("run")
@click.argument("script", type=click.Path(exists=True, path_type=Path))
@click.option("--work-dir", default=None, type=click.Path(path_type=Path),
              help="Where the chain file and store land (default: a temp dir).")
@click.option("--seed-label", default="demo")
@click.option("--json", "as_json", is_flag=True)
def scenario_run(script, work_dir, seed_label, as_json):
    """Execute SCRIPT, print each tx hash, validate the chain, exit 0 on success."""
    if work_dir is None:
        work_dir = Path(tempfile.mkdtemp(prefix="medledger-scenario-"))
    try:
        result = run_scenario(script, Path(work_dir), seed_label=seed_label)
    except ScenarioError as e:
        if as_json:
            click.echo(json.dumps({"ok": False, "step": e.step, "code": e.code,
                                   "message": str(e)}))
        _fail(e.code, str(e))
    if as_json:
        click.echo(json.dumps({
            "ok": result.chain_valid,
            "tx_count": result.tx_count,
            "head_height": result.head_height,
            "head_hash": result.head_hash,
            "steps": [
                {"step": o.step, "text": o.text, "tx_hash": o.tx_hash, "info": o.info}
                for o in result.outcomes
            ],
        }))
    else:
        for o in result.outcomes:
            suffix = f" tx={o.tx_hash}" if o.tx_hash else (f" [{o.info}]" if o.info else "")
            click.echo(f"step {o.step}: {o.text}{suffix}")
        click.echo(f"chain height {result.head_height}, {result.tx_count} transactions, "
                   f"validate_chain={'pass' if result.chain_valid else 'FAIL'}")
    if not result.chain_valid:
        _fail("INVALID_CHAIN", "chain failed validation after the scenario")
    click.echo(f"OK height={result.head_height} head={result.head_hash}")


# -- training ----------------------------------------------------------------------


@main.command()
@click.option("--disease", required=True,
              type=click.Choice(sorted(SCHEMAS), case_sensitive=False))
@click.option("--data", "data_path", default=None,
              type=click.Path(exists=True, path_type=Path),
              help="CSV with schema headers; omitted = shipped synthetic data.")
@click.option("--out", "out_dir", required=True, type=click.Path(path_type=Path))
@click.option("--seed", default=20230425, type=int)
@click.option("--synth-rows", default=300, type=int)
@click.option("--json", "as_json", is_flag=True)
def train(disease, data_path, out_dir, seed, synth_rows, as_json):
    """Train all four algorithms, report the selection, write model files."""
    try:
        if data_path is not None:
            dataset = ml.load_csv(data_path, ml.get_schema(disease))
        else:
            dataset = ml.synth_dataset(disease, n=synth_rows, seed=seed)
        report = ml.train_and_select(dataset, ml.TrainConfig(seed=seed))
    except ml.schemas.SchemaMismatch as e:
        _fail("SCHEMA_MISMATCH", str(e))
    except (ValueError, KeyError) as e:
        _fail("BAD_DATA", str(e))
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    key = report.disease.lower()
    for algorithm, model in report.models.items():
        (out_dir / f"{key}.{algorithm}.model").write_bytes(ml.save_model(model))
    best_blob = ml.save_model(report.models[report.best])
    (out_dir / f"{key}.model").write_bytes(best_blob)
    if as_json:
        click.echo(json.dumps({
            "disease": report.disease, "baseline": report.baseline,
            "accuracies": report.accuracies, "best": report.best,
            "provenance": dataset.provenance,
        }))
    else:
        click.echo(f"dataset: {dataset.provenance} ({len(dataset)} rows)")
        click.echo(f"majority baseline: {report.baseline:.3f}")
        for algorithm in ml.models.ALGORITHMS:
            marker = " <- selected" if algorithm == report.best else ""
            click.echo(f"  {algorithm:>6}: {report.accuracies[algorithm]:.3f}{marker}")
        click.echo(f"wrote 5 model files to {out_dir}")
    click.echo(f"OK best={report.best}")


@main.command("eval")
@click.option("--model", "model_path", required=True,
              type=click.Path(exists=True, path_type=Path))
@click.option("--data", "data_path", required=True,
              type=click.Path(exists=True, path_type=Path))
@click.option("--json", "as_json", is_flag=True)
def eval_cmd(model_path, data_path, as_json):
    """Confusion matrix and accuracy of a saved model on a CSV."""
    try:
        model = ml.load_model(model_path.read_bytes())
        dataset = ml.load_csv(data_path, model.schema)
        cm = ml.evaluate(model, dataset)
    except (ValueError, KeyError) as e:
        _fail("BAD_DATA", str(e))
    if as_json:
        click.echo(json.dumps({
            "algorithm": model.algorithm, "disease": model.schema.disease,
            "accuracy": cm.accuracy, "classes": list(cm.classes),
            "counts": cm.counts.tolist(), "total": cm.total,
        }))
    else:
        click.echo(f"{model.algorithm} on {dataset.provenance}: "
                   f"{cm.total} rows, accuracy {cm.accuracy:.3f}")
        click.echo(cm.render())
    click.echo(f"OK accuracy={cm.accuracy:.4f}")


# -- consensus statistics --------------------------------------------------------------


@main.command("consensus-stats")
@click.option("--slots", required=True, type=int)
@click.option("--stakes", default="1,2,3,4", help="Comma-separated validator stakes.")
@click.option("--committee-size", default=1, type=int)
@click.option("--seed-label", default="stats")
@click.option("--slash", "slashed", default=None,
              help="Validator id to mark slashed before the sweep (e.g. v2).")
@click.option("--trace", is_flag=True, help="One line per slot instead of the summary.")
@click.option("--json", "as_json", is_flag=True)
def consensus_stats(slots, stakes, committee_size, seed_label, slashed, trace, as_json):
    """Monte-Carlo committee simulation: selection frequencies + chi-squared."""
    from scipy.stats import chi2

    stake_values = [int(s) for s in stakes.split(",") if s.strip()]
    validators, _ = demo_validators(len(stake_values))
    entries = {}
    for validator, stake in zip(validators, stake_values):
        entries[validator.id] = consensus.Validator(
            id=validator.id, public_key=validator.public_key, stake=stake,
        )
    if slashed is not None:
        if slashed not in entries:
            _fail("UNKNOWN_VALIDATOR", f"no validator {slashed!r}")
        entries[slashed] = consensus.Validator(
            id=slashed, public_key=entries[slashed].public_key, stake=0,
            status=consensus.ValidatorStatus.SLASHED,
        )
    table = consensus.StakeTable(entries=entries)
    seed = keccak256(b"consensus-stats:" + seed_label.encode())
    counts = {vid: 0 for vid in entries}
    for slot in range(slots):
        committee = consensus.select_committee(table, slot, seed, committee_size)
        counts[committee.proposer] += 1
        if trace:
            click.echo(f"slot={slot} proposer={committee.proposer} "
                       f"attests={len(committee.members)} finalized=yes block=-")
    total_stake = table.total_active_stake
    active = {vid: v.effective_stake for vid, v in entries.items()}
    statistic = 0.0
    dof = 0
    for vid, stake in active.items():
        if stake == 0:
            continue
        expected = slots * stake / total_stake
        statistic += (counts[vid] - expected) ** 2 / expected if expected else 0.0
        dof += 1
    dof = max(dof - 1, 1)
    critical = float(chi2.ppf(0.99, dof))
    rejected = statistic > critical
    rows = []
    for vid in sorted(entries):
        share = active[vid] / total_stake if total_stake else 0.0
        freq = counts[vid] / slots if slots else 0.0
        rows.append({"validator": vid, "stake": entries[vid].stake,
                     "expected": share, "observed": freq, "count": counts[vid]})
    if as_json:
        click.echo(json.dumps({
            "slots": slots, "rows": rows, "chi2": statistic,
            "critical_p01": critical, "rejected": rejected,
        }))
    elif not trace:
        click.echo(f"{'validator':>10} {'stake':>6} {'expected':>9} {'observed':>9} {'count':>8}")
        for row in rows:
            click.echo(f"{row['validator']:>10} {row['stake']:>6} "
                       f"{row['expected']:>9.4f} {row['observed']:>9.4f} {row['count']:>8}")
        if slots:
            click.echo(f"chi-squared {statistic:.3f} vs critical(p=0.01, dof={dof}) "
                       f"{critical:.3f} -> {'REJECTED' if rejected else 'not rejected'}")
    click.echo(f"OK chi2={statistic:.4f} rejected={'yes' if rejected else 'no'}")


@main.command("validate")
@click.option("--genesis", "genesis_path", required=True,
              type=click.Path(exists=True, path_type=Path))
@click.option("--chain", "chain_path", required=True,
              type=click.Path(exists=True, path_type=Path))
def validate_cmd(genesis_path, chain_path):
    """Validate a persisted chain file from genesis."""
    config = load_genesis(genesis_path)
    try:
        blocks = load_chain(chain_path)
    except ChainFileError as e:
        _fail("CORRUPT_CHAIN", str(e))
    report = validate_chain(blocks, config)
    if not report.ok:
        _fail(report.reason or "INVALID", f"height {report.height}: {report.detail}")
    click.echo(f"OK height={blocks[-1].header.height}")


if __name__ == "__main__":
    main()
