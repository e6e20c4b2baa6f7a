"""Scenario scripts: plain text, one step per line, space-delimited.

    register <role> <name> [key=value ...]
    grant <patient> <requester> <Kind[,Kind...]> <slots|permanent>
    revoke <patient> <requester>            # latest grant to that requester
    append <author> <patient> <Kind> <media_type> <payload text...>
    records <requester> <patient>           # read-only listing
    predict <doctor> <disease> key=value[,key=value...]
    advance-slots <n>

Entity names own deterministic seeded keys, the genesis funds every name
that registers (topped up to the default ten accounts), and timestamps
are nominal slot starts, so one script always produces one chain,
hash for hash.
"""

from __future__ import annotations

import shlex
from dataclasses import dataclass, field
from pathlib import Path

from .ml import TrainConfig, predict as ml_predict, synth_dataset, train_and_select
from .ml.preprocess import deidentify
from .ml.schemas import get_schema
from .node import (
    Node,
    NodeError,
    build_grant_tx,
    build_record_tx,
    build_register_tx,
    build_revoke_tx,
    demo_genesis,
)
from .registry import RECORD_KIND_BY_NAME, Role
from .store import OffchainStore
from .wallet import KeyPair, keypair_from_passphrase_seed

_ROLES = {r.value.lower(): r for r in Role}

_DEFAULT_ATTRS = {
    Role.PATIENT: {
        "name": "-", "phone": "0000000000", "location": "-",
        "aadhar": "123412341234", "email": "patient@example.org",
        "medical_history": "-", "symptoms": "-", "age": "30",
    },
    Role.DOCTOR: {
        "name": "-", "phone": "0000000000", "location": "-",
        "email": "doctor@example.org", "registration_number": "REG-1",
        "registration_council": "-", "specialization": "-", "experience_years": "1",
    },
    Role.HOSPITAL: {
        "name": "-", "email": "hospital@example.org", "phone": "0000000000",
        "address": "-", "year_of_establishment": "1990",
    },
    Role.PATHLAB: {"name": "-", "email": "lab@example.org", "phone": "0000000000"},
    Role.PHARMACY: {"name": "-", "email": "pharmacy@example.org", "phone": "0000000000"},
}

_PREDICT_CONFIG = TrainConfig(forest_trees=21, forest_depth=5, boost_rounds=30,
                              svm_epochs=200)


class ScenarioError(Exception):
    def __init__(self, step: int, code: str, message: str):
        super().__init__(f"step {step}: [{code}] {message}")
        self.step = step
        self.code = code


@dataclass
class StepOutcome:
    step: int
    text: str
    tx_hash: str | None = None
    info: str = ""


@dataclass
class ScenarioResult:
    outcomes: list[StepOutcome] = field(default_factory=list)
    tx_count: int = 0
    head_height: int = 0
    head_hash: str = ""
    chain_valid: bool = False


def _key_for(name: str, label: str) -> KeyPair:
    return keypair_from_passphrase_seed(f"scenario:{label}:{name}")


def parse_script(text: str) -> list[tuple[int, list[str]]]:
    steps = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        steps.append((lineno, shlex.split(line)))
    return steps


def _registered_names(steps) -> list[str]:
    return [parts[2] for _, parts in steps if parts[0] == "register" and len(parts) >= 3]


def run_scenario(
    script_path: Path,
    work_dir: Path,
    seed_label: str = "demo",
) -> ScenarioResult:
    """Execute a script against a fresh in-process node in ``work_dir``."""
    steps = parse_script(Path(script_path).read_text())
    names = _registered_names(steps)
    account_keys = [_key_for(n, seed_label) for n in names]
    filler = max(0, 10 - len(account_keys))
    account_keys += [
        keypair_from_passphrase_seed(f"scenario:{seed_label}:filler:{i}")
        for i in range(filler)
    ]
    config, vkeys = demo_genesis(account_keys, n_validators=4, committee_size=4,
                                 seed_label=f"scenario:{seed_label}")
    work_dir.mkdir(parents=True, exist_ok=True)
    node = Node(config=config, validator_keys=vkeys,
                store=OffchainStore(work_dir / "store"),
                chain_path=work_dir / "chain.dat")

    entity_ids: dict[str, str] = {}
    models = {}
    result = ScenarioResult()

    def require_entity(step, name):
        if name not in entity_ids:
            raise ScenarioError(step, "UNKNOWN_NAME", f"{name!r} was not registered yet")
        return entity_ids[name]

    for index, (lineno, parts) in enumerate(steps, start=1):
        action = parts[0]
        try:
            if action == "register":
                role = _ROLES.get(parts[1].lower())
                if role is None:
                    raise ScenarioError(index, "BAD_STEP", f"unknown role {parts[1]!r}")
                name = parts[2]
                attrs = dict(_DEFAULT_ATTRS[role])
                attrs["name"] = name
                for kv in parts[3:]:
                    k, _, v = kv.partition("=")
                    attrs[k] = v
                key = _key_for(name, seed_label)
                tx = build_register_tx(key, node.next_nonce(key.address),
                                       config.fee, role, attrs)
                node.submit_tx(tx)
                entity_ids[name] = node.state.registry.entity_by_address(key.address).entity_id
                result.tx_count += 1
                result.outcomes.append(StepOutcome(
                    index, f"register {role.value} {name} -> {entity_ids[name]}",
                    tx_hash=tx.hash().hex(),
                ))
            elif action == "grant":
                patient, requester = parts[1], parts[2]
                scope = frozenset(RECORD_KIND_BY_NAME[k] for k in parts[3].split(","))
                duration = None if parts[4].lower() == "permanent" else int(parts[4])
                key = _key_for(patient, seed_label)
                tx = build_grant_tx(
                    key, node.next_nonce(key.address), config.fee,
                    require_entity(index, patient), require_entity(index, requester),
                    scope, duration,
                )
                node.submit_tx(tx)
                result.tx_count += 1
                result.outcomes.append(StepOutcome(
                    index, f"grant {patient} -> {requester} {parts[3]} {parts[4]}",
                    tx_hash=tx.hash().hex(),
                ))
            elif action == "revoke":
                patient, requester = parts[1], parts[2]
                pid = require_entity(index, patient)
                rid = require_entity(index, requester)
                grants = [g for g in node.state.registry.grants_for_patient(pid)
                          if g.requester == rid and not g.revoked]
                if not grants:
                    raise ScenarioError(index, "UNKNOWN_GRANT",
                                        f"no active grant {patient} -> {requester}")
                key = _key_for(patient, seed_label)
                tx = build_revoke_tx(key, node.next_nonce(key.address), config.fee,
                                     grants[-1].grant_id)
                node.submit_tx(tx)
                result.tx_count += 1
                result.outcomes.append(StepOutcome(
                    index, f"revoke {grants[-1].grant_id}", tx_hash=tx.hash().hex(),
                ))
            elif action == "append":
                author, patient, kind_name, media_type = parts[1:5]
                payload = " ".join(parts[5:]).encode()
                kind = RECORD_KIND_BY_NAME[kind_name]
                address = node.put_document(payload, media_type)
                key = _key_for(author, seed_label)
                from .blocks import TxKind

                tx_kind = {
                    "Prescription": TxKind.PRESCRIPTION, "TestReferral": TxKind.REFERRAL,
                    "Treatment": TxKind.TREATMENT, "Comment": TxKind.COMMENT,
                }.get(kind_name, TxKind.APPEND_RECORD)
                tx = build_record_tx(
                    key, node.next_nonce(key.address), config.fee, tx_kind,
                    require_entity(index, patient), kind, address, media_type,
                )
                node.submit_tx(tx)
                result.tx_count += 1
                result.outcomes.append(StepOutcome(
                    index, f"append {kind_name} by {author} for {patient}",
                    tx_hash=tx.hash().hex(),
                ))
            elif action == "records":
                requester, patient = parts[1], parts[2]
                listed = node.state.registry.list_records(
                    require_entity(index, requester), require_entity(index, patient),
                    node.current_slot(),
                )
                result.outcomes.append(StepOutcome(
                    index, f"records {requester} sees {len(listed)} of {patient}",
                    info=",".join(r.record_id for r in listed),
                ))
            elif action == "predict":
                doctor, disease = parts[1], parts[2]
                doc_id = require_entity(index, doctor)
                if node.state.registry.entities[doc_id].role is not Role.DOCTOR:
                    raise ScenarioError(index, "ROLE_FORBIDDEN",
                                        "predict is a clinician action")
                features = {}
                for kv in " ".join(parts[3:]).split(","):
                    k, _, v = kv.partition("=")
                    features[k.strip()] = v.strip()
                schema = get_schema(disease)
                if disease not in models:
                    report = train_and_select(
                        synth_dataset(disease, n=150, seed=5), _PREDICT_CONFIG
                    )
                    models[disease] = report.models[report.best]
                label, _created = ml_predict(models[disease], deidentify(features, schema))
                result.outcomes.append(StepOutcome(
                    index, f"predict {disease} by {doctor} -> {label}", info=label,
                ))
            elif action == "advance-slots":
                node.advance_slots(int(parts[1]))
                result.outcomes.append(StepOutcome(index, f"advance-slots {parts[1]}"))
            else:
                raise ScenarioError(index, "BAD_STEP", f"unknown action {action!r} "
                                                       f"(line {lineno})")
        except NodeError as e:
            raise ScenarioError(index, e.code, str(e)) from e
        except ScenarioError:
            raise
        except (KeyError, IndexError, ValueError) as e:
            raise ScenarioError(index, "BAD_STEP", f"line {lineno}: {e!r}") from e

    report = node.validate()
    result.chain_valid = bool(report)
    result.head_height = node.head().height
    result.head_hash = node.head().hash().hex()
    return result
