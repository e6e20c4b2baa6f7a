/**
 * Keccak-256 (original 0x01 padding, matching the chain), BigInt lanes.
 * Used client-side to verify record content addresses and Merkle proofs
 * against what the ledger signed.
 */

const MASK = (1n << 64n) - 1n;

const ROUND_CONSTANTS: bigint[] = [
  0x0000000000000001n, 0x0000000000008082n, 0x800000000000808an, 0x8000000080008000n,
  0x000000000000808bn, 0x0000000080000001n, 0x8000000080008081n, 0x8000000000008009n,
  0x000000000000008an, 0x0000000000000088n, 0x0000000080008009n, 0x000000008000000an,
  0x000000008000808bn, 0x800000000000008bn, 0x8000000000008089n, 0x8000000000008003n,
  0x8000000000008002n, 0x8000000000000080n, 0x000000000000800an, 0x800000008000000an,
  0x8000000080008081n, 0x8000000000008080n, 0x0000000080000001n, 0x8000000080008008n,
];

const ROTATION = [
  [0, 36, 3, 41, 18],
  [1, 44, 10, 45, 2],
  [62, 6, 43, 15, 61],
  [28, 55, 25, 21, 56],
  [27, 20, 39, 8, 14],
];

const RATE = 136;

function rol(v: bigint, r: number): bigint {
  if (r === 0) return v;
  const br = BigInt(r);
  return ((v << br) | (v >> (64n - br))) & MASK;
}

function keccakF(a: bigint[][]): void {
  for (const rc of ROUND_CONSTANTS) {
    const c = [0n, 0n, 0n, 0n, 0n];
    for (let x = 0; x < 5; x++) {
      c[x] = a[x][0] ^ a[x][1] ^ a[x][2] ^ a[x][3] ^ a[x][4];
    }
    const d = [0n, 0n, 0n, 0n, 0n];
    for (let x = 0; x < 5; x++) {
      d[x] = c[(x + 4) % 5] ^ rol(c[(x + 1) % 5], 1);
    }
    for (let x = 0; x < 5; x++) {
      for (let y = 0; y < 5; y++) a[x][y] ^= d[x];
    }
    const b: bigint[][] = [[], [], [], [], []];
    for (let x = 0; x < 5; x++) {
      for (let y = 0; y < 5; y++) {
        b[y][(2 * x + 3 * y) % 5] = rol(a[x][y], ROTATION[x][y]);
      }
    }
    for (let x = 0; x < 5; x++) {
      for (let y = 0; y < 5; y++) {
        a[x][y] = b[x][y] ^ (~b[(x + 1) % 5][y] & MASK & b[(x + 2) % 5][y]);
      }
    }
    a[0][0] ^= rc;
  }
}

export function keccak256(data: Uint8Array): Uint8Array {
  const pad = RATE - (data.length % RATE);
  const buf = new Uint8Array(data.length + pad);
  buf.set(data);
  if (pad === 1) {
    buf[buf.length - 1] = 0x81;
  } else {
    buf[data.length] = 0x01;
    buf[buf.length - 1] = 0x80;
  }
  const a: bigint[][] = Array.from({ length: 5 }, () => [0n, 0n, 0n, 0n, 0n]);
  const view = new DataView(buf.buffer, buf.byteOffset);
  for (let off = 0; off < buf.length; off += RATE) {
    for (let i = 0; i < 17; i++) {
      const lane = view.getBigUint64(off + 8 * i, true);
      a[i % 5][Math.floor(i / 5)] ^= lane;
    }
    keccakF(a);
  }
  const out = new Uint8Array(32);
  const outView = new DataView(out.buffer);
  for (let i = 0; i < 4; i++) {
    outView.setBigUint64(8 * i, a[i % 5][Math.floor(i / 5)], true);
  }
  return out;
}

export function toHex(bytes: Uint8Array): string {
  return Array.from(bytes, (b) => b.toString(16).padStart(2, "0")).join("");
}

export function fromHex(hex: string): Uint8Array {
  if (hex.length % 2 !== 0 || !/^[0-9a-fA-F]*$/.test(hex)) {
    throw new Error(`not hex: ${hex.slice(0, 16)}...`);
  }
  const out = new Uint8Array(hex.length / 2);
  for (let i = 0; i < out.length; i++) {
    out[i] = parseInt(hex.slice(2 * i, 2 * i + 2), 16);
  }
  return out;
}
