/**
 * Deterministic numeric kernel mirrored from the pipeline: portable exp with
 * pinned evaluation order, max-shifted softmax with left-to-right sums, and
 * the seedable shuffle used by training. Do not substitute Math.exp or any
 * library RNG; results must match the reference bit for bit.
 */

const INV_LN2 = 1.4426950408889634;
const LN2_HI = 0.6931471803691238;
const LN2_LO = 1.9082149292705877e-10;
const EXP_OVERFLOW = 709.782712893384;
const EXP_UNDERFLOW = -745.1332191019412;
const EXP_COEFFS = [
  0.5,
  0.16666666666666666,
  0.041666666666666664,
  0.008333333333333333,
  0.001388888888888889,
  0.0001984126984126984,
  2.48015873015873e-5,
  2.7557319223985893e-6,
  2.755731922398589e-7,
  2.505210838544172e-8,
  2.08767569878681e-9,
  1.6059043836821613e-10,
  1.1470745597729725e-11,
];

export function twoPow(k: number): number {
  if (k < -1022 || k > 1023) throw new Error(`exponent outside normal range: ${k}`);
  const view = new DataView(new ArrayBuffer(8));
  view.setBigUint64(0, BigInt(k + 1023) << 52n, true);
  return view.getFloat64(0, true);
}

export function portableExp(x: number): number {
  if (Number.isNaN(x)) return x;
  if (x >= EXP_OVERFLOW) return Infinity;
  if (x <= EXP_UNDERFLOW) return 0.0;
  const k = Math.floor(x * INV_LN2 + 0.5);
  const kd = k;
  const r = x - kd * LN2_HI - kd * LN2_LO;
  let acc = EXP_COEFFS[EXP_COEFFS.length - 1];
  for (let i = EXP_COEFFS.length - 2; i >= 0; i--) {
    acc = acc * r + EXP_COEFFS[i];
  }
  const er = 1.0 + r * (1.0 + r * acc);
  if (k === 1024) return er * twoPow(1023) * 2.0;
  if (k >= -1021) return er * twoPow(k);
  return er * twoPow(k + 1000) * twoPow(-1000);
}

export function softmax(scores: number[]): number[] {
  if (scores.length === 0) return [];
  let m = scores[0];
  for (const s of scores) if (s > m) m = s;
  const exps = scores.map((s) => portableExp(s - m));
  let denom = 0.0;
  for (const e of exps) denom += e;
  return exps.map((e) => e / denom);
}

const MASK64 = (1n << 64n) - 1n;

export class SplitMix64 {
  private state: bigint;

  constructor(seed: number | bigint) {
    this.state = BigInt(seed) & MASK64;
  }

  nextU64(): bigint {
    this.state = (this.state + 0x9e3779b97f4a7c15n) & MASK64;
    let z = this.state;
    z = ((z ^ (z >> 30n)) * 0xbf58476d1ce4e5b9n) & MASK64;
    z = ((z ^ (z >> 27n)) * 0x94d049bb133111ebn) & MASK64;
    return z ^ (z >> 31n);
  }

  randbelow(n: number): number {
    return Number(this.nextU64() % BigInt(n));
  }

  shuffle<T>(xs: T[]): void {
    for (let i = xs.length - 1; i > 0; i--) {
      const j = this.randbelow(i + 1);
      const tmp = xs[i];
      xs[i] = xs[j];
      xs[j] = tmp;
    }
  }
}
