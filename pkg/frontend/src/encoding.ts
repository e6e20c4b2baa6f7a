/**
 * Canonical transaction encoding: length-prefixed fields in declared
 * order, integers big-endian. Byte-compatible with the ledger's wire
 * format; the parity test suite pins this against server-produced bytes.
 */

import { keccak256 } from "./keccak.js";

export enum TxKind {
  Register = 0,
  GrantConsent = 1,
  RevokeConsent = 2,
  AppendRecord = 3,
  Referral = 4,
  Prescription = 5,
  Treatment = 6,
  Comment = 7,
}

export enum RecordKind {
  Report = 0,
  Prescription = 1,
  TestReferral = 2,
  Treatment = 3,
  Comment = 4,
  Media = 5,
}

export const RECORD_KIND_NAMES: Record<RecordKind, string> = {
  [RecordKind.Report]: "Report",
  [RecordKind.Prescription]: "Prescription",
  [RecordKind.TestReferral]: "TestReferral",
  [RecordKind.Treatment]: "Treatment",
  [RecordKind.Comment]: "Comment",
  [RecordKind.Media]: "Media",
};

export const ZERO_HASH = new Uint8Array(32);

const encoder = new TextEncoder();

export function concat(...parts: Uint8Array[]): Uint8Array {
  const out = new Uint8Array(parts.reduce((n, p) => n + p.length, 0));
  let pos = 0;
  for (const part of parts) {
    out.set(part, pos);
    pos += part.length;
  }
  return out;
}

export function encU8(n: number): Uint8Array {
  return new Uint8Array([n & 0xff]);
}

export function encU32(n: number): Uint8Array {
  const out = new Uint8Array(4);
  new DataView(out.buffer).setUint32(0, n, false);
  return out;
}

export function encU64(n: number | bigint): Uint8Array {
  const out = new Uint8Array(8);
  new DataView(out.buffer).setBigUint64(0, BigInt(n), false);
  return out;
}

export function encBytes(b: Uint8Array): Uint8Array {
  return concat(encU32(b.length), b);
}

export function encStr(s: string): Uint8Array {
  return encBytes(encoder.encode(s));
}

export interface UnsignedTx {
  sender: Uint8Array;
  nonce: number;
  kind: TxKind;
  body: Uint8Array;
  payloadHash: Uint8Array;
  fee: number;
  publicKey: Uint8Array;
}

export interface SignedTx extends UnsignedTx {
  signature: Uint8Array;
}

export function signingPayload(tx: UnsignedTx): Uint8Array {
  return concat(
    encBytes(tx.sender),
    encU64(tx.nonce),
    encU8(tx.kind),
    encBytes(tx.body),
    encBytes(tx.payloadHash),
    encU64(tx.fee),
    encBytes(tx.publicKey),
  );
}

export function encodeTx(tx: SignedTx): Uint8Array {
  return concat(signingPayload(tx), encBytes(tx.signature));
}

export function txHash(tx: SignedTx): Uint8Array {
  return keccak256(encodeTx(tx));
}

// -- body encoders (must match the registry's decoders byte for byte) --------

export function registerBody(role: string, attributes: Record<string, string>): Uint8Array {
  const items = Object.entries(attributes).sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0));
  return concat(
    encStr(role),
    encU32(items.length),
    ...items.flatMap(([k, v]) => [encStr(k), encStr(v)]),
  );
}

export function grantBody(
  patient: string,
  requester: string,
  scope: RecordKind[],
  durationSlots: number | null,
): Uint8Array {
  const kinds = [...new Set(scope)].sort((a, b) => a - b);
  return concat(
    encStr(patient),
    encStr(requester),
    encU32(kinds.length),
    ...kinds.map((k) => encU8(k)),
    encU8(durationSlots === null ? 1 : 0),
    encU64(durationSlots === null ? 0 : durationSlots),
  );
}

export function revokeBody(grantId: string): Uint8Array {
  return encStr(grantId);
}

export function recordBody(
  patient: string,
  kind: RecordKind,
  mediaType: string,
): Uint8Array {
  return concat(encStr(patient), encU8(kind), encStr(mediaType));
}

/** Fold a Merkle inclusion proof exactly as the chain does. */
export function verifyMerkleProof(
  leaf: Uint8Array,
  siblings: { hash: Uint8Array; right: boolean }[],
  root: Uint8Array,
): boolean {
  let acc = leaf;
  for (const { hash, right } of siblings) {
    acc = right
      ? keccak256(concat(new Uint8Array([1]), acc, hash))
      : keccak256(concat(new Uint8Array([1]), hash, acc));
  }
  return toEqual(acc, root);
}

export function txLeaf(txBytes: Uint8Array): Uint8Array {
  return keccak256(concat(new Uint8Array([0]), txBytes));
}

function toEqual(a: Uint8Array, b: Uint8Array): boolean {
  if (a.length !== b.length) return false;
  let diff = 0;
  for (let i = 0; i < a.length; i++) diff |= a[i] ^ b[i];
  return diff === 0;
}

export { toEqual as bytesEqual };
