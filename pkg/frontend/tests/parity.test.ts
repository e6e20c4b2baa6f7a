/**
 * Byte-exact parity with the ledger: hashing, keystore decryption, and
 * transaction encoding/signing must reproduce server-generated fixtures.
 */

import { describe, expect, it } from "vitest";

import { fromHex, keccak256, toHex } from "../src/keccak.js";
import {
  RecordKind,
  TxKind,
  ZERO_HASH,
  encodeTx,
  grantBody,
  recordBody,
  registerBody,
  txHash,
} from "../src/encoding.js";
import { decryptKeystore, parseKeystore, signMessage, signTx, KeystoreError } from "../src/wallet.js";

import fixture from "./fixtures/parity.json";

describe("keccak-256", () => {
  it("matches the published vectors", () => {
    expect(toHex(keccak256(new Uint8Array(0)))).toBe(fixture.keccak_empty);
    expect(toHex(keccak256(new TextEncoder().encode("abc")))).toBe(fixture.keccak_abc);
  });

  it("hashes the record payload to its content address", () => {
    const payload = new TextEncoder().encode(fixture.record_payload_utf8);
    expect(toHex(keccak256(payload))).toBe(fixture.record_payload_keccak);
  });
});

describe("keystore", () => {
  it("decrypts with the right passphrase and rejects the wrong one", async () => {
    const keystore = parseKeystore(fixture.keystore);
    expect(keystore.address).toBe(fixture.address);
    const priv = await decryptKeystore(keystore, fixture.passphrase);
    expect(priv.length).toBe(32);
    await expect(decryptKeystore(keystore, "not-the-passphrase")).rejects.toThrow(
      KeystoreError,
    );
  });

  it("signs the session challenge identically to the server-side wallet", async () => {
    const keystore = parseKeystore(fixture.keystore);
    const priv = await decryptKeystore(keystore, fixture.passphrase);
    const signature = signMessage(priv, fromHex(fixture.challenge_hex));
    expect(toHex(signature)).toBe(fixture.challenge_signature_hex);
  });
});

describe("transaction encoding", () => {
  async function privKey(): Promise<Uint8Array> {
    return decryptKeystore(parseKeystore(fixture.keystore), fixture.passphrase);
  }

  it("reproduces the register transaction byte for byte", async () => {
    const priv = await privKey();
    const signed = signTx(priv, {
      sender: fromHex(fixture.address),
      nonce: 0,
      kind: TxKind.Register,
      body: registerBody("Patient", {
        name: "Asha", phone: "9", location: "T", aadhar: "123412341234",
        email: "a@x", medical_history: "-", symptoms: "-", age: "34",
      }),
      payloadHash: ZERO_HASH,
      fee: 1,
      publicKey: fromHex(fixture.public_key),
    });
    expect(toHex(encodeTx(signed))).toBe(fixture.register_tx_hex);
    expect(toHex(txHash(signed))).toBe(fixture.register_tx_hash);
  });

  it("reproduces the grant transaction byte for byte", async () => {
    const priv = await privKey();
    const signed = signTx(priv, {
      sender: fromHex(fixture.address),
      nonce: 1,
      kind: TxKind.GrantConsent,
      body: grantBody("pat-1", "doc-1", [RecordKind.Prescription, RecordKind.Report], 100),
      payloadHash: ZERO_HASH,
      fee: 1,
      publicKey: fromHex(fixture.public_key),
    });
    expect(toHex(encodeTx(signed))).toBe(fixture.grant_tx_hex);
    expect(toHex(txHash(signed))).toBe(fixture.grant_tx_hash);
  });

  it("reproduces the prescription transaction byte for byte", async () => {
    const priv = await privKey();
    const payload = new TextEncoder().encode(fixture.record_payload_utf8);
    const signed = signTx(priv, {
      sender: fromHex(fixture.address),
      nonce: 2,
      kind: TxKind.Prescription,
      body: recordBody("pat-1", RecordKind.Prescription, "report/text"),
      payloadHash: keccak256(payload),
      fee: 1,
      publicKey: fromHex(fixture.public_key),
    });
    expect(toHex(encodeTx(signed))).toBe(fixture.record_tx_hex);
  });
});
