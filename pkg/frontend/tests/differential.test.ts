/**
 * Differential and end-to-end tests against the real ledger node.
 *
 * The differential part pins the client/server validation agreement: for
 * every covered rule (aadhar shape, required fields) the client accepts an
 * input if and only if the server does. The end-to-end part drives the
 * full patient journey through the typed client: register, challenge
 * login, grant, append a record, fetch and verify it against the chain,
 * and run a doctor-gated prediction.
 */

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import {
  RecordKind,
  TxKind,
  ZERO_HASH,
  encodeTx,
  grantBody,
  recordBody,
  registerBody,
  txLeaf,
  verifyMerkleProof,
} from "../src/encoding.js";
import { validateRegistration } from "../src/forms.js";
import { fromHex, keccak256, toHex } from "../src/keccak.js";
import { decryptKeystore, parseKeystore, signMessage, signTx } from "../src/wallet.js";
import { LiveServer, startLiveServer } from "./live_server.js";

import fixture from "./fixtures/parity.json";

let server: LiveServer;

beforeAll(async () => {
  server = await startLiveServer();
}, 60_000);

afterAll(() => {
  server?.stop();
});

const GOOD_PROFILE: Record<string, string> = {
  name: "Asha", phone: "9", location: "T", aadhar: "123412341234",
  email: "a@x", medical_history: "-", symptoms: "-", age: "34",
};

async function fillerKey(index: number) {
  const keystore = parseKeystore(server.readKeystore(`filler-${index}.store`));
  const priv = await decryptKeystore(keystore, "filler-pass");
  return { keystore, priv };
}

async function tryRegister(index: number, profile: Record<string, string>) {
  const api = new ApiClient(server.baseUrl);
  const { keystore, priv } = await fillerKey(index);
  const account = await api.account(keystore.address);
  const signed = signTx(priv, {
    sender: fromHex(keystore.address),
    nonce: account.nonce,
    kind: TxKind.Register,
    body: registerBody("Patient", profile),
    payloadHash: ZERO_HASH,
    fee: account.fee,
    publicKey: keystore.publicKey,
  });
  try {
    await api.registerEntity(toHex(encodeTx(signed)));
    return { ok: true as const, code: null };
  } catch (e) {
    if (e instanceof ApiError) return { ok: false as const, code: e.code };
    throw e;
  }
}

describe("client validation is exactly as strict as the server", () => {
  it("aadhar shapes: client and server verdicts agree case by case", async () => {
    const cases: [string, string][] = [
      ["123412341234", "ok"],
      ["12345", "bad"],
      ["1234123412345", "bad"],
      ["12341234123x", "bad"],
      ["", "bad"],
    ];
    for (let i = 0; i < cases.length; i++) {
      const [aadhar] = cases[i];
      const profile = { ...GOOD_PROFILE, aadhar };
      const clientOk = Object.keys(validateRegistration("Patient", profile)).length === 0;
      const serverResult = await tryRegister(i, profile);
      expect(clientOk, `aadhar ${JSON.stringify(aadhar)}`).toBe(serverResult.ok);
      if (!serverResult.ok) {
        expect(["INVALID_AADHAR", "MISSING_FIELD"]).toContain(serverResult.code);
      }
    }
  });

  it("each omitted required field is rejected by both sides", async () => {
    const fields = Object.keys(GOOD_PROFILE);
    for (let i = 0; i < fields.length; i++) {
      const profile = { ...GOOD_PROFILE };
      delete profile[fields[i]];
      const clientProblems = validateRegistration("Patient", profile);
      expect(clientProblems[fields[i]], fields[i]).toBeDefined();
      const serverResult = await tryRegister(5 + i, profile);
      expect(serverResult.ok, fields[i]).toBe(false);
      expect(serverResult.code).toBe("MISSING_FIELD");
    }
  });
});

describe("end-to-end patient journey through the typed client", () => {
  it("register, login, grant, append, verify, predict", async () => {
    const api = new ApiClient(server.baseUrl);
    const keystore = parseKeystore(fixture.keystore);
    const priv = await decryptKeystore(keystore, fixture.passphrase);

    // register the parity key as a patient
    const account = await api.account(keystore.address);
    expect(account.balance).toBe(100);
    const registerTx = signTx(priv, {
      sender: fromHex(keystore.address), nonce: account.nonce, kind: TxKind.Register,
      body: registerBody("Patient", GOOD_PROFILE), payloadHash: ZERO_HASH,
      fee: account.fee, publicKey: keystore.publicKey,
    });
    const created = await api.registerEntity(toHex(encodeTx(registerTx)));
    const patientId = created.entity_id;
    expect(patientId).toMatch(/^pat-\d+$/);

    // challenge-response login
    const { challenge } = await api.challenge(keystore.address);
    const session = await api.openSession(
      keystore.address, toHex(signMessage(priv, fromHex(challenge))),
    );
    expect(session.role).toBe("Patient");

    // the fee was charged
    expect((await api.account(keystore.address)).balance).toBe(99);

    // grant the pre-registered doctor access, then self-append a record
    const grantTx = signTx(priv, {
      sender: fromHex(keystore.address), nonce: 1, kind: TxKind.GrantConsent,
      body: grantBody(patientId, "doc-1", [RecordKind.Report, RecordKind.Prescription], 1000),
      payloadHash: ZERO_HASH, fee: 1, publicKey: keystore.publicKey,
    });
    const grant = await api.grantConsent(toHex(encodeTx(grantTx)));
    expect(grant.revoked).toBe(false);

    const payload = new TextEncoder().encode("my prior scan results");
    const recordTx = signTx(priv, {
      sender: fromHex(keystore.address), nonce: 2, kind: TxKind.AppendRecord,
      body: recordBody(patientId, RecordKind.Report, "report/text"),
      payloadHash: keccak256(payload), fee: 1, publicKey: keystore.publicKey,
    });
    const record = await api.appendRecord(
      toHex(encodeTx(recordTx)),
      Buffer.from(payload).toString("base64"), "report/text",
    );

    // fetch content and verify hash + inclusion proof client-side
    const content = await api.recordContent(record.record_id);
    expect(toHex(keccak256(content))).toBe(record.content_address);
    const proof = await api.proof(record.height, record.tx_index);
    expect(proof.leaf).toBe(toHex(txLeaf(encodeTx(recordTx))));
    const verified = verifyMerkleProof(
      fromHex(proof.leaf),
      proof.siblings.map((s) => ({ hash: fromHex(s.hash), right: s.right })),
      fromHex(proof.tx_root),
    );
    expect(verified).toBe(true);

    // doctor session: prediction is doctor-gated and works end to end
    const doctorStore = parseKeystore(server.readKeystore("doctor.store"));
    const doctorPriv = await decryptKeystore(doctorStore, "doctor-pass");
    const doctorApi = new ApiClient(server.baseUrl);
    const doctorChallenge = await doctorApi.challenge(doctorStore.address);
    await doctorApi.openSession(
      doctorStore.address,
      toHex(signMessage(doctorPriv, fromHex(doctorChallenge.challenge))),
    );
    const prediction = await doctorApi.predict("diabetes", {
      Pregnancies: 2, Glucose: 148, BloodPressure: 72, SkinThickness: 35,
      Insulin: 0, BMI: 33.6, "Diabetes Pedegree Function": 0.627, Age: 50,
    });
    expect(["Diabetic", "Not"]).toContain(prediction.label);

    // and the patient session must NOT reach the predictor
    await expect(
      api.predict("diabetes", { Pregnancies: 1 }),
    ).rejects.toMatchObject({ code: "ROLE_FORBIDDEN" });
  }, 120_000);
});
