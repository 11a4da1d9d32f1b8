/**
 * Arbitrary-precision binary floating point on BigInt.
 *
 * Mirrors the engine inside the mpcore shared library: every operation is
 * correctly rounded to the requested significand width with round half to
 * even, division and square root included (guard bits plus a sticky bit).
 * Correct rounding has a unique answer, so values computed here match the
 * library's own long-precision arithmetic bit for bit, which the scripted
 * refinement relies on for exact iteration-count parity.
 *
 * A value is sign * man * 2^exp with man > 0 normalized to odd (trailing
 * zero bits folded into exp); zero is sign 0. prec records the width the
 * value was last rounded to and does not affect comparisons.
 */

export interface BigFloat {
  readonly sign: -1 | 0 | 1;
  readonly man: bigint;
  readonly exp: number;
  readonly prec: number;
}

export class BigFloatError extends Error {}

const HEX_BITS: Record<string, number> = {
  "0": 0, "1": 1, "2": 2, "3": 2, "4": 3, "5": 3, "6": 3, "7": 3,
  "8": 4, "9": 4, a: 4, b: 4, c: 4, d: 4, e: 4, f: 4,
};

export function bitLength(v: bigint): number {
  if (v === 0n) return 0;
  if (v < 0n) v = -v;
  const hex = v.toString(16);
  return (hex.length - 1) * 4 + HEX_BITS[hex[0]];
}

function zero(p: number): BigFloat {
  return { sign: 0, man: 0n, exp: 0, prec: p };
}

function mk(sign: -1 | 1, man: bigint, exp: number, prec: number): BigFloat {
  // fold trailing zero bits into the exponent (canonical odd mantissa)
  const lsb = man & -man;
  const shift = bitLength(lsb) - 1;
  if (shift > 0) {
    man >>= BigInt(shift);
    exp += shift;
  }
  return { sign, man, exp, prec };
}

/** Round sign*man*2^exp to p bits, half to even; sticky marks a nonzero
 *  discarded tail strictly below the mantissa's last bit. */
export function round(
  sign: -1 | 1, man: bigint, exp: number, p: number, sticky = false,
): BigFloat {
  if (man === 0n) return zero(p);
  if (sticky) {
    man = (man << 1n) | 1n;
    exp -= 1;
  }
  const drop = bitLength(man) - p;
  if (drop <= 0) return mk(sign, man, exp, p);
  const d = BigInt(drop);
  const rem = man & ((1n << d) - 1n);
  let keep = man >> d;
  const half = 1n << (d - 1n);
  if (rem > half || (rem === half && (keep & 1n) === 1n)) keep += 1n;
  if (bitLength(keep) > p) {
    keep >>= 1n; // carry produced 10...0; exact shift
    exp += 1;
  }
  return mk(sign, keep, exp + drop, p);
}

export function roundTo(a: BigFloat, p: number): BigFloat {
  if (a.sign === 0) return zero(p);
  return round(a.sign, a.man, a.exp, p);
}

function signedMan(a: BigFloat, shift: number): bigint {
  const m = a.man << BigInt(shift);
  return a.sign < 0 ? -m : m;
}

export function bfAdd(a: BigFloat, b: BigFloat, p: number): BigFloat {
  if (a.sign === 0) return roundTo(b, p);
  if (b.sign === 0) return roundTo(a, p);
  const e0 = Math.min(a.exp, b.exp);
  const v = signedMan(a, a.exp - e0) + signedMan(b, b.exp - e0);
  if (v === 0n) return zero(p);
  return round(v < 0n ? -1 : 1, v < 0n ? -v : v, e0, p);
}

export function bfNeg(a: BigFloat): BigFloat {
  if (a.sign === 0) return a;
  return { sign: -a.sign as -1 | 1, man: a.man, exp: a.exp, prec: a.prec };
}

export function bfAbs(a: BigFloat): BigFloat {
  return a.sign < 0 ? bfNeg(a) : a;
}

export function bfSub(a: BigFloat, b: BigFloat, p: number): BigFloat {
  return bfAdd(a, bfNeg(b), p);
}

export function bfMul(a: BigFloat, b: BigFloat, p: number): BigFloat {
  if (a.sign === 0 || b.sign === 0) return zero(p);
  const sign = (a.sign * b.sign) as -1 | 1;
  return round(sign, a.man * b.man, a.exp + b.exp, p);
}

export function bfDiv(a: BigFloat, b: BigFloat, p: number): BigFloat {
  if (b.sign === 0) throw new BigFloatError("division by zero");
  if (a.sign === 0) return zero(p);
  let s = p + 2 + bitLength(b.man) - bitLength(a.man);
  if (s < 0) s = 0;
  const num = a.man << BigInt(s);
  const q = num / b.man;
  const r = num % b.man;
  const sign = (a.sign * b.sign) as -1 | 1;
  return round(sign, q, a.exp - b.exp - s, p, r !== 0n);
}

function isqrt(v: bigint): bigint {
  if (v < 2n) return v;
  let x = 1n << BigInt((bitLength(v) >> 1) + 1);
  for (;;) {
    const nx = (x + v / x) >> 1n;
    if (nx >= x) break;
    x = nx;
  }
  while (x * x > v) x -= 1n;
  while ((x + 1n) * (x + 1n) <= v) x += 1n;
  return x;
}

export function bfSqrt(a: BigFloat, p: number): BigFloat {
  if (a.sign < 0) throw new BigFloatError("sqrt of a negative value");
  if (a.sign === 0) return zero(p);
  let t = 2 * (p + 2) - bitLength(a.man);
  if (t < 0) t = 0;
  if ((a.exp - t) % 2 !== 0) t += 1;
  const m2 = a.man << BigInt(t);
  const r = isqrt(m2);
  return round(1, r, (a.exp - t) / 2, p, r * r !== m2);
}

export function bfCmp(a: BigFloat, b: BigFloat): number {
  if (a.sign !== b.sign) return a.sign < b.sign ? -1 : 1;
  if (a.sign === 0) return 0;
  const ta = a.exp + bitLength(a.man);
  const tb = b.exp + bitLength(b.man);
  let mag: number;
  if (ta !== tb) {
    mag = ta < tb ? -1 : 1;
  } else {
    const e0 = Math.min(a.exp, b.exp);
    const ma = a.man << BigInt(a.exp - e0);
    const mb = b.man << BigInt(b.exp - e0);
    mag = ma === mb ? 0 : ma < mb ? -1 : 1;
  }
  if (mag === 0) return 0;
  return a.sign < 0 ? -mag : mag;
}

export function bfIsZero(a: BigFloat): boolean {
  return a.sign === 0;
}

export function bfFromInt(v: number | bigint, p: number): BigFloat {
  let m = typeof v === "bigint" ? v : BigInt(Math.trunc(v));
  if (m === 0n) return zero(p);
  const sign = m < 0n ? -1 : 1;
  if (m < 0n) m = -m;
  return round(sign as -1 | 1, m, 0, p);
}

/** Exact (no rounding beyond the value itself) decomposition of a double. */
export function bfFromNumber(x: number): BigFloat {
  if (!Number.isFinite(x)) throw new BigFloatError(`non-finite value ${x}`);
  if (x === 0) return zero(53);
  const buf = new DataView(new ArrayBuffer(8));
  buf.setFloat64(0, x);
  const bits = buf.getBigUint64(0);
  const sign = bits >> 63n === 1n ? -1 : 1;
  const biased = Number((bits >> 52n) & 0x7ffn);
  const frac = bits & 0xfffffffffffffn;
  let man: bigint;
  let exp: number;
  if (biased === 0) {
    man = frac; // subnormal
    exp = -1074;
  } else {
    man = frac | (1n << 52n);
    exp = biased - 1075;
  }
  return mk(sign as -1 | 1, man, exp, 53);
}

function scaleByPow2(x: number, e: number): number {
  // chunked so each factor is an exactly representable power of two
  while (e > 0) {
    const step = Math.min(e, 1000);
    x *= Math.pow(2, step);
    e -= step;
  }
  while (e < 0) {
    const step = Math.max(e, -1000);
    x *= Math.pow(2, step);
    e -= step;
  }
  return x;
}

/** Nearest double (half to even), subnormals included; throws above the
 *  binary64 range. */
export function bfToNumber(a: BigFloat): number {
  if (a.sign === 0) return 0;
  const top = a.exp + bitLength(a.man);
  if (top >= -1021) {
    const r = roundTo(a, 53);
    if (r.exp + bitLength(r.man) > 1024) {
      throw new BigFloatError("overflow converting to number");
    }
    return scaleByPow2(Number(r.man) * a.sign, r.exp);
  }
  // below 2^-1021: round at the fixed 2^-1074 ulp position (subnormal)
  const shift = a.exp + 1074;
  let q: bigint;
  if (shift >= 0) {
    q = a.man << BigInt(shift);
  } else {
    const s = BigInt(-shift);
    const rem = a.man & ((1n << s) - 1n);
    q = a.man >> s;
    const half = 1n << (s - 1n);
    if (rem > half || (rem === half && (q & 1n) === 1n)) q += 1n;
  }
  return scaleByPow2(Number(q) * a.sign, -1074);
}

/** Exact sum of doubles (components of one multi-component value). */
export function bfFromComponents(comps: ArrayLike<number>): BigFloat {
  let acc = zero(2);
  for (let i = 0; i < comps.length; i++) {
    const c = bfFromNumber(comps[i]);
    if (c.sign === 0) continue;
    if (acc.sign === 0) {
      acc = c;
      continue;
    }
    const e0 = Math.min(acc.exp, c.exp);
    const v = signedMan(acc, acc.exp - e0) + signedMan(c, c.exp - e0);
    acc = v === 0n ? zero(2)
      : mk(v < 0n ? -1 : 1, v < 0n ? -v : v, e0, 2);
  }
  return acc;
}

const DEC_RE = /^([+-]?)(?:(\d+)(?:\.(\d*))?|\.(\d+))(?:[eE]([+-]?\d+))?$/;

export function bfParseDecimal(text: string, p: number): BigFloat {
  const m = DEC_RE.exec(text.trim());
  if (!m) throw new BigFloatError(`malformed decimal literal ${JSON.stringify(text)}`);
  const [, signS, intS = "", fracRaw, bareFrac, expS] = m;
  const fracS = bareFrac ?? fracRaw ?? "";
  const digits = BigInt((intS || "0") + fracS);
  if (digits === 0n) return zero(p);
  const sign = signS === "-" ? -1 : 1;
  const e10 = (expS ? parseInt(expS, 10) : 0) - fracS.length;
  if (e10 >= 0) {
    return round(sign as -1 | 1, digits * 10n ** BigInt(e10), 0, p);
  }
  const den = 10n ** BigInt(-e10);
  let s = p + 3 + bitLength(den) - bitLength(digits);
  if (s < 0) s = 0;
  const num = digits << BigInt(s);
  const q = num / den;
  const r = num % den;
  return round(sign as -1 | 1, q, -s, p, r !== 0n);
}

const HEX_RE = /^([+-]?)0[xX]([0-9a-fA-F]+)(?:\.([0-9a-fA-F]*))?[pP]([+-]?\d+)$/;

/** Parse a hex float literal exactly (no rounding). */
export function bfParseHex(text: string, p?: number): BigFloat {
  const m = HEX_RE.exec(text.trim());
  if (!m) throw new BigFloatError(`malformed hex literal ${JSON.stringify(text)}`);
  const [, signS, intS, fracS = "", expS] = m;
  const man = BigInt("0x" + intS + fracS);
  if (man === 0n) return zero(p ?? 2);
  const sign = signS === "-" ? -1 : 1;
  const exp = parseInt(expS, 10) - 4 * fracS.length;
  const exact = mk(sign as -1 | 1, man, exp, Math.max(bitLength(man), 2));
  return p === undefined ? exact : roundTo(exact, p);
}

/** Canonical hex form (+-)0x1.<nibbles>p(+-)E, matching the library's own
 *  formatter; exact round trip through bfParseHex. */
export function bfFormatHex(a: BigFloat): string {
  if (a.sign === 0) return "0x0.0p+0";
  const nbits = bitLength(a.man) - 1;
  const e = a.exp + nbits;
  const signS = a.sign < 0 ? "-" : "";
  const expS = e < 0 ? `${e}` : `+${e}`;
  if (nbits === 0) return `${signS}0x1p${expS}`;
  const pad = ((-nbits) % 4 + 4) % 4;
  const frac = (a.man - (1n << BigInt(nbits))) << BigInt(pad);
  const width = (nbits + pad) / 4;
  return `${signS}0x1.${frac.toString(16).padStart(width, "0")}p${expS}`;
}

/** Python float.hex() clone: fixed 13-nibble fraction, signed exponent. */
export function doubleToHex(x: number): string {
  if (!Number.isFinite(x)) throw new BigFloatError(`non-finite value ${x}`);
  const signS = x < 0 || Object.is(x, -0) ? "-" : "";
  if (x === 0) return `${signS}0x0.0p+0`;
  const buf = new DataView(new ArrayBuffer(8));
  buf.setFloat64(0, x);
  const bits = buf.getBigUint64(0);
  const biased = Number((bits >> 52n) & 0x7ffn);
  const frac = (bits & 0xfffffffffffffn).toString(16).padStart(13, "0");
  if (biased === 0) return `${signS}0x0.${frac}p-1022`;
  const e = biased - 1023;
  return `${signS}0x1.${frac}p${e < 0 ? e : `+${e}`}`;
}

/** Inverse of doubleToHex; accepts any float.hex-style token. */
export function hexToDouble(text: string): number {
  const v = bfParseHex(text);
  if (v.sign === 0) {
    // the engine has no signed zero; recover it from the text
    return /^\s*-/.test(text) ? -0 : 0;
  }
  return bfToNumber(v);
}
