"""The /v1 HTTP facade over one node: registration, challenge-response
sessions, consent management, records with off-chain payloads, chain
inspection, and the disease predictors.

Every mutating endpoint needs a bearer session AND a client-signed
transaction; the session's entity must own the transaction's sender
address. Request bodies are never logged, so identifiers cannot leak
through the log stream.
"""

from __future__ import annotations

import base64
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import Depends, FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel

from . import ml
from .blocks import Transaction, TxKind
from .encoding import DecodeError, Reader
from .keccak import keccak256
from .ledger import LedgerError
from .ml.models import TrainConfig
from .ml.preprocess import MissingClinicalField, deidentify
from .ml.schemas import get_schema, UnknownDisease
from .node import Node, NodeError
from .registry import RegistryError, Role
from .store import CorruptContent, NotFound
from .wallet import verify_sig

CHALLENGE_TTL_S = 300  # 5 minutes
SESSION_TTL_S = 24 * 3600

# Machine codes are a closed set; see README for the full table.
_LEDGER_STATUS = {
    "NonceReplay": 409,
    "InsufficientBalance": 402,
    "DUPLICATE_ADDRESS": 409,
    "INVALID_AADHAR": 400,
    "MISSING_FIELD": 400,
    "NOT_OWNER": 403,
    "ACCESS_DENIED": 403,
    "MISSING_CONTENT": 400,
    "UNKNOWN_PATIENT": 404,
    "UNKNOWN_REQUESTER": 404,
    "UNKNOWN_GRANT": 404,
    "UNKNOWN_ENTITY": 404,
    "ALREADY_REVOKED": 409,
    "BAD_SCOPE": 400,
    "BadEvidence": 400,
}


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


def _code_of(reason: str) -> str:
    if reason.isupper() or "_" in reason:
        return reason
    out = [reason[0]]
    for ch in reason[1:]:
        if ch.isupper():
            out.append("_")
        out.append(ch)
    return "".join(out).upper()  # NonceReplay -> NONCE_REPLAY


@dataclass
class ApiSession:
    token: str
    entity_id: str
    address: bytes
    role: Role
    issued_at: float
    expires_at: float


@dataclass
class ApiState:
    node: Node
    models_dir: Path
    challenges: dict[str, tuple[bytes, float]] = field(default_factory=dict)
    sessions: dict[str, ApiSession] = field(default_factory=dict)
    models: dict[str, tuple[ml.TrainedModel, str]] = field(default_factory=dict)

    def model_for(self, disease: str) -> tuple[ml.TrainedModel, str]:
        schema = get_schema(disease)  # raises UnknownDisease first
        key = schema.disease.lower()
        if key not in self.models:
            path = self.models_dir / f"{key}.model"
            if not path.exists():
                # lazy bootstrap: train on the synthetic stand-in and persist
                self.models_dir.mkdir(parents=True, exist_ok=True)
                report = ml.train_and_select(
                    ml.synth_dataset(key, n=240, seed=13),
                    TrainConfig(forest_trees=31, forest_depth=6, boost_rounds=40),
                )
                path.write_bytes(ml.save_model(report.models[report.best]))
            blob = path.read_bytes()
            self.models[key] = (ml.load_model(blob), keccak256(blob)[:4].hex())
        return self.models[key]


# -- request bodies -------------------------------------------------------------


class RegisterBody(BaseModel):
    tx: str  # canonical transaction encoding, hex


class SessionBody(BaseModel):
    address: str
    signature: str  # over the issued challenge bytes, hex


class TxOnlyBody(BaseModel):
    tx: str


class RecordBody(BaseModel):
    tx: str
    payload_b64: str
    media_type: str = "report/text"


class PredictBody(BaseModel):
    features: dict[str, float | int | str]


def _decode_tx(tx_hex: str) -> Transaction:
    try:
        reader = Reader(bytes.fromhex(tx_hex))
        tx = Transaction.decode(reader)
        reader.expect_end()
    except (DecodeError, ValueError) as e:
        raise ApiError(400, "BAD_TX", f"undecodable transaction: {e}") from e
    if not tx.verify_signature():
        raise ApiError(401, "BAD_SIGNATURE", "transaction signature does not verify")
    return tx


def create_app(node: Node, models_dir: Path | str = "models") -> FastAPI:
    app = FastAPI(title="medledger", version="0.1.0", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    state = ApiState(node=node, models_dir=Path(models_dir))
    app.state.medledger = state

    @app.exception_handler(ApiError)
    async def api_error_handler(_req: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status,
            content={"error": {"code": exc.code, "message": exc.message}},
        )

    def submit(tx: Transaction):
        try:
            return state.node.submit_tx(tx)
        except NodeError as e:
            code = _code_of(e.code)
            raise ApiError(_LEDGER_STATUS.get(e.code, 400), code, str(e)) from e
        except (LedgerError, RegistryError) as e:  # pragma: no cover - node wraps these
            raise ApiError(400, "BAD_TX", str(e)) from e

    def current_session(request: Request) -> ApiSession:
        auth = request.headers.get("authorization", "")
        token = auth.removeprefix("Bearer ").strip()
        session = state.sessions.get(token)
        if session is None or session.expires_at < time.time():
            raise ApiError(401, "UNAUTHORIZED", "missing, unknown, or expired token")
        return session

    # -- entities and sessions --------------------------------------------------

    @app.post("/v1/entities", status_code=201)
    def register_entity(body: RegisterBody):
        tx = _decode_tx(body.tx)
        if tx.kind is not TxKind.REGISTER:
            raise ApiError(400, "BAD_TX", "expected a Register transaction")
        block = submit(tx)
        entity = state.node.state.registry.entity_by_address(tx.sender)
        return {"entity_id": entity.entity_id, "tx_hash": tx.hash().hex(),
                "height": block.header.height}

    @app.get("/v1/sessions/challenge")
    def issue_challenge(address: str):
        challenge = os.urandom(32)
        state.challenges[address.lower()] = (challenge, time.time())
        return {"address": address.lower(), "challenge": challenge.hex()}

    @app.post("/v1/sessions")
    def open_session(body: SessionBody):
        address = body.address.lower()
        entity = state.node.state.registry.entity_by_address(bytes.fromhex(address))
        if entity is None:
            raise ApiError(404, "UNKNOWN_ADDRESS", f"no entity at address {address}")
        issued = state.challenges.get(address)
        if issued is None:
            raise ApiError(401, "CHALLENGE_EXPIRED", "no outstanding challenge")
        challenge, at = issued
        if time.time() - at > CHALLENGE_TTL_S:
            del state.challenges[address]
            raise ApiError(401, "CHALLENGE_EXPIRED", "challenge older than 5 minutes")
        profile = state.node.state.registry.entities[entity.entity_id]
        try:
            signature = bytes.fromhex(body.signature)
        except ValueError as e:
            raise ApiError(401, "BAD_SIGNATURE", "signature is not hex") from e
        # find the registered public key: it rides on every tx from this address
        pub = _public_key_for(state.node, bytes.fromhex(address))
        if pub is None or not verify_sig(pub, challenge, signature):
            raise ApiError(401, "BAD_SIGNATURE", "challenge signature does not verify")
        del state.challenges[address]
        token = os.urandom(32).hex()
        now = time.time()
        state.sessions[token] = ApiSession(
            token=token, entity_id=entity.entity_id, address=profile.address,
            role=profile.role, issued_at=now, expires_at=now + SESSION_TTL_S,
        )
        return {"token": token, "entity_id": entity.entity_id, "role": profile.role.value}

    # -- consents ----------------------------------------------------------------

    @app.post("/v1/consents", status_code=201)
    def grant_consent(body: TxOnlyBody, session: ApiSession = Depends(current_session)):
        tx = _decode_tx(body.tx)
        if tx.kind is not TxKind.GRANT_CONSENT:
            raise ApiError(400, "BAD_TX", "expected a GrantConsent transaction")
        if tx.sender != session.address:
            raise ApiError(403, "NOT_OWNER", "session does not own the signing address")
        submit(tx)
        registry = state.node.state.registry
        events = registry.consent_events.get(session.entity_id, [])
        grant = registry.grants[events[-1].grant_id]
        return _grant_json(grant, events[-1].tx_hash)

    @app.delete("/v1/consents/{grant_id}")
    def revoke_consent(grant_id: str, body: TxOnlyBody,
                       session: ApiSession = Depends(current_session)):
        tx = _decode_tx(body.tx)
        if tx.kind is not TxKind.REVOKE_CONSENT:
            raise ApiError(400, "BAD_TX", "expected a RevokeConsent transaction")
        if tx.sender != session.address:
            raise ApiError(403, "NOT_OWNER", "session does not own the signing address")
        submit(tx)
        grant = state.node.state.registry.grants[grant_id]
        return _grant_json(grant, tx.hash())

    @app.get("/v1/grants/incoming")
    def incoming_grants(session: ApiSession = Depends(current_session)):
        """Active grants naming the session's entity as requester: the
        doctor/pharmacy/lab view of who has consented to them."""
        registry = state.node.state.registry
        now = state.node.current_slot()
        grants = [
            _grant_json(g)
            for g in registry.grants.values()
            if g.requester == session.entity_id and g.active_at(now)
        ]
        grants.sort(key=lambda g: g["grant_id"])
        return {"requester": session.entity_id, "grants": grants}

    @app.get("/v1/patients/{patient_id}/consents")
    def consent_log(patient_id: str, session: ApiSession = Depends(current_session)):
        registry = state.node.state.registry
        if session.entity_id != patient_id:
            raise ApiError(403, "NOT_OWNER", "only the patient sees their consent log")
        try:
            events = registry.audit_consent_log(patient_id, state.node.current_slot())
        except RegistryError as e:
            raise ApiError(404, e.code, str(e)) from e
        return {
            "patient": patient_id,
            "events": [
                {"slot": e.slot, "action": e.action, "grant_id": e.grant_id,
                 "tx_hash": e.tx_hash.hex()}
                for e in events
            ],
            "grants": [_grant_json(g) for g in registry.grants_for_patient(patient_id)],
        }

    # -- records -----------------------------------------------------------------

    @app.post("/v1/records", status_code=201)
    def append_record(body: RecordBody, session: ApiSession = Depends(current_session)):
        tx = _decode_tx(body.tx)
        if tx.kind not in (
            TxKind.APPEND_RECORD, TxKind.REFERRAL, TxKind.PRESCRIPTION,
            TxKind.TREATMENT, TxKind.COMMENT,
        ):
            raise ApiError(400, "BAD_TX", "expected a record-creating transaction")
        if tx.sender != session.address:
            raise ApiError(403, "NOT_OWNER", "session does not own the signing address")
        try:
            payload = base64.b64decode(body.payload_b64, validate=True)
        except Exception as e:
            raise ApiError(400, "BAD_TX", f"payload is not base64: {e}") from e
        if keccak256(payload) != tx.payload_hash:
            raise ApiError(400, "BAD_TX", "payload does not hash to the signed address")
        state.node.put_document(payload, body.media_type)
        submit(tx)
        registry = state.node.state.registry
        newest = max(registry.records.values(), key=lambda r: int(r.record_id.split("-")[1]))
        return _record_json(newest, state.node)

    @app.get("/v1/patients/{patient_id}/records")
    def list_records(patient_id: str, session: ApiSession = Depends(current_session)):
        registry = state.node.state.registry
        if patient_id not in registry.entities:
            raise ApiError(404, "UNKNOWN_PATIENT", f"no entity {patient_id}")
        records = registry.list_records(
            session.entity_id, patient_id, state.node.current_slot()
        )
        return {"patient": patient_id, "records": [_record_json(r, state.node) for r in records]}

    @app.get("/v1/records/{record_id}/content")
    def record_content(record_id: str, session: ApiSession = Depends(current_session)):
        registry = state.node.state.registry
        record = registry.records.get(record_id)
        if record is None:
            raise ApiError(404, "NOT_FOUND", f"no record {record_id}")
        if not registry.check_access(
            session.entity_id, record.patient, record.kind, state.node.current_slot()
        ):
            raise ApiError(403, "ACCESS_DENIED", "no active consent covers this record")
        try:
            doc = state.node.store.get(record.content_address)
        except NotFound as e:
            raise ApiError(404, "NOT_FOUND", "content missing from the store") from e
        except CorruptContent as e:
            raise ApiError(502, "CORRUPT_CONTENT", str(e)) from e
        return Response(content=doc.data, media_type="application/octet-stream",
                        headers={"x-media-type": doc.media_type})

    # -- chain inspection -----------------------------------------------------------

    @app.get("/v1/chain/head")
    def chain_head():
        head = state.node.head()
        return {
            "height": head.height, "hash": head.hash().hex(),
            "state_root": head.state_root.hex(), "slot": state.node.current_slot(),
        }

    @app.get("/v1/chain/blocks/{height}")
    def chain_block(height: int):
        try:
            block = state.node.get_block(height)
        except NodeError as e:
            raise ApiError(404, "NOT_FOUND", str(e)) from e
        h = block.header
        return {
            "height": h.height, "hash": block.hash().hex(),
            "parent_hash": h.parent_hash.hex(), "tx_root": h.tx_root.hex(),
            "state_root": h.state_root.hex(), "timestamp": h.timestamp,
            "proposer": h.proposer,
            "transactions": [
                {"hash": tx.hash().hex(), "kind": tx.kind.name, "sender": tx.sender.hex(),
                 "nonce": tx.nonce, "fee": tx.fee, "payload_hash": tx.payload_hash.hex()}
                for tx in block.transactions
            ],
            "attestations": [
                {"slot": a.slot, "validator": a.validator} for a in block.attestations
            ],
        }

    @app.get("/v1/chain/blocks/{height}/proof/{tx_index}")
    def chain_proof(height: int, tx_index: int):
        try:
            proof, root = state.node.tx_proof(height, tx_index)
            block = state.node.get_block(height)
        except NodeError as e:
            raise ApiError(404, "NOT_FOUND", str(e)) from e
        return {
            "height": height, "tx_index": tx_index,
            "leaf": block.transactions[tx_index].leaf().hex(),
            "tx_root": root.hex(),
            "siblings": [
                {"hash": h.hex(), "right": side} for h, side in proof.siblings
            ],
        }

    @app.get("/v1/accounts/{address}")
    def account(address: str):
        try:
            raw = bytes.fromhex(address)
        except ValueError as e:
            raise ApiError(400, "BAD_TX", "address is not hex") from e
        acct = state.node.account_info(raw)
        return {"address": address.lower(), "balance": acct.balance,
                "nonce": acct.nonce, "fee": state.node.config.fee}

    # -- prediction -------------------------------------------------------------------

    @app.post("/v1/predict/{disease}")
    def predict_disease(disease: str, body: PredictBody,
                        session: ApiSession = Depends(current_session)):
        if session.role is not Role.DOCTOR:
            raise ApiError(403, "ROLE_FORBIDDEN", "prediction is a clinician action")
        try:
            model, version = state.model_for(disease)
        except UnknownDisease as e:
            raise ApiError(404, "UNKNOWN_DISEASE", f"no predictor for {disease}") from e
        try:
            vector = deidentify(body.features, model.schema)
        except MissingClinicalField as e:
            raise ApiError(400, "MISSING_FIELD", str(e)) from e
        label, scores = ml.predict(model, vector)
        return {"disease": model.schema.disease, "label": label,
                "scores": scores, "model_version": version}

    return app


def _public_key_for(node: Node, address: bytes) -> bytes | None:
    """Registered entities put their key on-chain with their first tx."""
    for block in node.state.blocks:
        for tx in block.transactions:
            if tx.sender == address:
                return tx.public_key
    return None


def _grant_json(grant, tx_hash: bytes | None = None) -> dict:
    from .registry import RECORD_KIND_NAMES

    out = {
        "grant_id": grant.grant_id, "patient": grant.patient,
        "requester": grant.requester,
        "scope": sorted(RECORD_KIND_NAMES[k] for k in grant.scope),
        "granted_at": grant.granted_at,
        "expires_at": grant.expires_at, "permanent": grant.expires_at is None,
        "revoked": grant.revoked,
    }
    if tx_hash is not None:
        out["tx_hash"] = tx_hash.hex()
    return out


def _record_json(record, node: Node | None = None) -> dict:
    from .registry import RECORD_KIND_NAMES

    out = {
        "record_id": record.record_id, "patient": record.patient,
        "author": record.author, "kind": RECORD_KIND_NAMES[record.kind],
        "content_address": record.content_address.hex(),
        "media_type": record.media_type, "created_at": record.created_at,
        "tx_hash": record.tx_hash.hex(),
    }
    if node is not None:
        located = node.locate_tx(record.tx_hash)
        if located is not None:
            out["height"], out["tx_index"] = located
    return out
