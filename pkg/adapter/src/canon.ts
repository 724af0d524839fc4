/**
 * Canonical serialization shared with the pipeline: decimal float formatting
 * with exact integer arithmetic, insertion-order JSON with pinned escapes,
 * and checkpoint hashing. Any byte of divergence from the reference
 * implementation is a conformance bug.
 */

import { createHash } from "node:crypto";

/** Serialize a finite double as decimal with 17 significant digits,
 * round-half-even, exponential form like "6.9999999999999996e-1". */
export function formatFloat(x: number): string {
  if (Number.isNaN(x) || !Number.isFinite(x)) {
    throw new Error("non-finite float is not serializable");
  }
  if (x === 0) return "0.0000000000000000e+0";
  const sign = x < 0 ? "-" : "";
  const abs = x < 0 ? -x : x;
  const view = new DataView(new ArrayBuffer(8));
  view.setFloat64(0, abs, true);
  const bits = view.getBigUint64(0, true);
  const expBits = Number((bits >> 52n) & 0x7ffn);
  const frac = bits & 0xfffffffffffffn;
  let mant: bigint;
  let e2: number;
  if (expBits === 0) {
    mant = frac;
    e2 = -1074;
  } else {
    mant = frac | (1n << 52n);
    e2 = expBits - 1075;
  }
  let num: bigint;
  let den: bigint;
  if (e2 >= 0) {
    num = mant << BigInt(e2);
    den = 1n;
  } else {
    num = mant;
    den = 1n << BigInt(-e2);
  }
  const gePow10 = (d: number): boolean =>
    d >= 0 ? num >= den * 10n ** BigInt(d) : num * 10n ** BigInt(-d) >= den;
  let d10 = num.toString().length - den.toString().length;
  while (!gePow10(d10)) d10 -= 1;
  while (gePow10(d10 + 1)) d10 += 1;
  const shift = 16 - d10;
  let p: bigint;
  let q: bigint;
  if (shift >= 0) {
    p = num * 10n ** BigInt(shift);
    q = den;
  } else {
    p = num;
    q = den * 10n ** BigInt(-shift);
  }
  let digits = p / q;
  const rem = p % q;
  if (2n * rem > q || (2n * rem === q && digits % 2n === 1n)) digits += 1n;
  if (digits === 10n ** 17n) {
    digits /= 10n;
    d10 += 1;
  }
  const s = digits.toString();
  const exp = d10 >= 0 ? `+${d10}` : `${d10}`;
  return `${sign}${s[0]}.${s.slice(1)}e${exp}`;
}

/** Pre-formatted JSON fragment; floats must be wrapped via jf(). */
export class Raw {
  constructor(public readonly text: string) {}
}

export const jf = (x: number): Raw => new Raw(formatFloat(x));

const ESCAPES: Record<string, string> = {
  '"': '\\"',
  "\\": "\\\\",
  "\n": "\\n",
  "\r": "\\r",
  "\t": "\\t",
  "\b": "\\b",
  "\f": "\\f",
};

function escapeString(s: string): string {
  let out = '"';
  for (let i = 0; i < s.length; i++) {
    const ch = s[i];
    const esc = ESCAPES[ch];
    if (esc !== undefined) {
      out += esc;
      continue;
    }
    const code = s.charCodeAt(i);
    if (code >= 0x20 && code <= 0x7e) out += ch;
    else out += "\\u" + code.toString(16).padStart(4, "0");
  }
  return out + '"';
}

export type Canon =
  | null
  | boolean
  | number
  | string
  | Raw
  | Canon[]
  | { [key: string]: Canon };

/** Compact JSON with insertion-order keys; integers only for bare numbers. */
export function canonicalJson(value: Canon): string {
  if (value === null) return "null";
  if (value === true) return "true";
  if (value === false) return "false";
  if (value instanceof Raw) return value.text;
  if (typeof value === "number") {
    if (!Number.isSafeInteger(value)) {
      throw new Error("non-integer numbers must be wrapped with jf()");
    }
    return String(value);
  }
  if (typeof value === "string") return escapeString(value);
  if (Array.isArray(value)) {
    return "[" + value.map(canonicalJson).join(",") + "]";
  }
  const parts: string[] = [];
  for (const [k, item] of Object.entries(value)) {
    parts.push(escapeString(k) + ":" + canonicalJson(item));
  }
  return "{" + parts.join(",") + "}";
}

export function sha256Hex(data: string): string {
  return createHash("sha256").update(data, "utf8").digest("hex");
}
