/**
 * Client-side keys: parse the ledger keystore text format, decrypt the
 * private key with the passphrase (scrypt + AES-GCM), sign transactions
 * and session challenges. The passphrase and decrypted key never leave
 * this module's call frames; nothing here touches the network.
 */

import * as ed from "@noble/ed25519";
import { sha512 } from "@noble/hashes/sha2.js";
import { scrypt } from "@noble/hashes/scrypt.js";

import { fromHex, keccak256, toHex } from "./keccak.js";
import { SignedTx, UnsignedTx, signingPayload } from "./encoding.js";

ed.hashes.sha512 = sha512;

export class KeystoreError extends Error {}

/** Copy into a fresh plain ArrayBuffer (WebCrypto's BufferSource type). */
function plainBuffer(view: Uint8Array): ArrayBuffer {
  const out = new ArrayBuffer(view.length);
  new Uint8Array(out).set(view);
  return out;
}

export interface Keystore {
  address: string;
  publicKey: Uint8Array;
  ciphertext: Uint8Array;
  salt: Uint8Array;
  nonce: Uint8Array;
  scryptN: number;
  scryptR: number;
  scryptP: number;
}

export function parseKeystore(text: string): Keystore {
  const fields: Record<string, string> = {};
  for (const raw of text.split("\n")) {
    const line = raw.trim();
    if (!line || line.startsWith("#")) continue;
    const eq = line.indexOf("=");
    if (eq < 0) throw new KeystoreError(`malformed keystore line: ${line}`);
    fields[line.slice(0, eq).trim()] = line.slice(eq + 1).trim();
  }
  for (const required of ["address", "public_key", "ciphertext", "salt", "nonce", "kdf"]) {
    if (!(required in fields)) throw new KeystoreError(`keystore missing ${required}`);
  }
  const kdf = fields["kdf"];
  if (!kdf.startsWith("scrypt")) throw new KeystoreError(`unsupported kdf: ${kdf}`);
  const params: Record<string, number> = {};
  for (const part of kdf.split(/\s+/).slice(1)) {
    const [k, v] = part.split("=");
    params[k] = parseInt(v, 10);
  }
  return {
    address: fields["address"],
    publicKey: fromHex(fields["public_key"]),
    ciphertext: fromHex(fields["ciphertext"]),
    salt: fromHex(fields["salt"]),
    nonce: fromHex(fields["nonce"]),
    scryptN: params["n"],
    scryptR: params["r"],
    scryptP: params["p"],
  };
}

export async function decryptKeystore(
  keystore: Keystore,
  passphrase: string,
): Promise<Uint8Array> {
  const key = scrypt(passphrase, keystore.salt, {
    N: keystore.scryptN,
    r: keystore.scryptR,
    p: keystore.scryptP,
    dkLen: 32,
  });
  const subtle = globalThis.crypto.subtle;
  const aesKey = await subtle.importKey("raw", plainBuffer(key), "AES-GCM", false, ["decrypt"]);
  let plain: ArrayBuffer;
  try {
    plain = await subtle.decrypt(
      { name: "AES-GCM", iv: plainBuffer(keystore.nonce) },
      aesKey,
      plainBuffer(keystore.ciphertext),
    );
  } catch {
    throw new KeystoreError("wrong passphrase or corrupted keystore");
  }
  const priv = new Uint8Array(plain);
  const pub = ed.getPublicKey(priv);
  if (toHex(pub) !== toHex(keystore.publicKey)) {
    throw new KeystoreError("public key does not match decrypted private key");
  }
  return priv;
}

export function deriveAddress(publicKey: Uint8Array): Uint8Array {
  return keccak256(publicKey).slice(-20);
}

export function signMessage(privateKey: Uint8Array, message: Uint8Array): Uint8Array {
  return ed.sign(message, privateKey);
}

export function signTx(privateKey: Uint8Array, tx: UnsignedTx): SignedTx {
  const pub = ed.getPublicKey(privateKey);
  if (toHex(deriveAddress(pub)) !== toHex(tx.sender)) {
    throw new KeystoreError("transaction sender is not this key's address");
  }
  const unsigned = { ...tx, publicKey: pub };
  return { ...unsigned, signature: ed.sign(signingPayload(unsigned), privateKey) };
}
