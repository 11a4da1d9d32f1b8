import { describe, expect, it } from "vitest";

import {
  BigFloat,
  bfAdd,
  bfCmp,
  bfDiv,
  bfFormatHex,
  bfFromComponents,
  bfFromInt,
  bfFromNumber,
  bfMul,
  bfParseDecimal,
  bfParseHex,
  bfSqrt,
  bfSub,
  bfToNumber,
  bitLength,
  doubleToHex,
  hexToDouble,
  roundTo,
} from "../src/bigfloat";

// mulberry32: deterministic light-weight generator for the property loops
function rng(seed: number): () => number {
  let s = seed >>> 0;
  return () => {
    s = (s + 0x6d2b79f5) >>> 0;
    let t = s;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function randDouble(r: () => number, maxExp: number): number {
  const m = r() * 2 - 1;
  const e = Math.floor(r() * (2 * maxExp + 1)) - maxExp;
  return m * Math.pow(2, e);
}

// exact dyadic comparison: num1*2^e1 vs num2*2^e2
function cmpDyadic(n1: bigint, e1: number, n2: bigint, e2: number): number {
  const e0 = Math.min(e1, e2);
  const a = n1 << BigInt(e1 - e0);
  const b = n2 << BigInt(e2 - e0);
  return a === b ? 0 : a < b ? -1 : 1;
}

function signedMan(a: BigFloat): bigint {
  return a.sign < 0 ? -a.man : a.man;
}

describe("rounding", () => {
  it("breaks ties to the even mantissa", () => {
    // 11 sits exactly between 10 and 12 at 3 bits; 12 has the even form
    expect(bfToNumber(bfFromInt(11, 3))).toBe(12);
    // 13 sits between 12 and 14; keeps 12
    expect(bfToNumber(bfFromInt(13, 3))).toBe(12);
    expect(bfToNumber(bfFromInt(-11, 3))).toBe(-12);
    // carry across a binade: 15 -> 16 at 2 bits
    expect(bfToNumber(bfFromInt(15, 2))).toBe(16);
  });

  it("is identity when the value already fits", () => {
    const v = bfFromInt(1234567, 60);
    const r = roundTo(v, 40);
    expect(bfToNumber(r)).toBe(1234567);
  });
});

describe("binary64 bridge", () => {
  it("round-trips random doubles exactly", () => {
    const r = rng(101);
    for (let i = 0; i < 4000; i++) {
      const x = randDouble(r, 300);
      expect(bfToNumber(bfFromNumber(x))).toBe(x);
    }
  });

  it("matches hardware arithmetic at 53 bits", () => {
    // +, -, *, / and sqrt are correctly rounded in binary64, so the
    // engine at p=53 must reproduce them bit for bit
    const r = rng(202);
    for (let i = 0; i < 3000; i++) {
      const x = randDouble(r, 40);
      const y = randDouble(r, 40) || 1.0;
      const bx = bfFromNumber(x);
      const by = bfFromNumber(y);
      expect(bfToNumber(bfAdd(bx, by, 53))).toBe(x + y);
      expect(bfToNumber(bfSub(bx, by, 53))).toBe(x - y);
      expect(bfToNumber(bfMul(bx, by, 53))).toBe(x * y);
      expect(bfToNumber(bfDiv(bx, by, 53))).toBe(x / y);
      expect(bfToNumber(bfSqrt(bfFromNumber(Math.abs(x)), 53)))
        .toBe(Math.sqrt(Math.abs(x)));
    }
  });

  it("rounds into the subnormal range like the platform", () => {
    expect(bfToNumber(bfParseHex("0x1p-1074"))).toBe(Number.MIN_VALUE);
    expect(bfToNumber(bfParseHex("0x1p-1075"))).toBe(0); // tie to even
    expect(bfToNumber(bfParseHex("0x1.1p-1075"))).toBe(Number.MIN_VALUE);
    expect(bfToNumber(bfParseHex("0x1.8p-1074"))).toBe(2 * Number.MIN_VALUE);
  });
});

describe("division", () => {
  it("stays within half an ulp of the exact quotient", () => {
    // |a/b - q| <= 2^(top(q)-p-1), checked in exact integers:
    // |a*2^x - q*b*2^y| vs half-ulp * b
    const r = rng(303);
    for (let i = 0; i < 400; i++) {
      const p = 24 + Math.floor(r() * 400);
      const a = bfFromNumber(randDouble(r, 60) || 1.0);
      const b = bfFromNumber(randDouble(r, 60) || 2.0);
      const q = bfDiv(a, b, p);
      const topQ = q.exp + bitLength(q.man);
      // err = a - q*b (exact dyadic), bound = 2^(topQ-p-1) * |b|
      const prodMan = signedMan(q) * signedMan(b);
      const e0 = Math.min(a.exp, q.exp + b.exp);
      const errAbs = (signedMan(a) << BigInt(a.exp - e0))
        - (prodMan << BigInt(q.exp + b.exp - e0));
      const absErr = errAbs < 0n ? -errAbs : errAbs;
      expect(
        cmpDyadic(absErr, e0, b.man, topQ - p - 1 + b.exp),
      ).toBeLessThanOrEqual(0);
    }
  });
});

describe("square root", () => {
  it("stays within half an ulp of the exact root", () => {
    // (v - h)^2 <= a <= (v + h)^2 with h = half ulp, exact in integers
    const r = rng(404);
    for (let i = 0; i < 400; i++) {
      const p = 24 + Math.floor(r() * 400);
      const a = bfFromNumber(Math.abs(randDouble(r, 60)) || 1.0);
      const v = bfSqrt(a, p);
      const topV = v.exp + bitLength(v.man);
      const he = topV - p - 1; // half-ulp exponent
      // lo = v - h, hi = v + h as exact dyadics at exponent e0
      const e0 = Math.min(v.exp, he);
      const vm = v.man << BigInt(v.exp - e0);
      const hm = 1n << BigInt(he - e0);
      const lo = vm - hm;
      const hi = vm + hm;
      expect(cmpDyadic(lo * lo, 2 * e0, a.man, a.exp)).toBeLessThanOrEqual(0);
      expect(cmpDyadic(hi * hi, 2 * e0, a.man, a.exp)).toBeGreaterThanOrEqual(0);
    }
  });
});

describe("decimal parsing", () => {
  it("parses 1e-100 correctly rounded at 424 bits", () => {
    const p = 424;
    const q = bfParseDecimal("1e-100", p);
    // |10^-100 - q| <= 2^(top-p-1): scale by 10^100 and compare exactly
    const topQ = q.exp + bitLength(q.man);
    const den = 10n ** 100n;
    // err*2^-e0 = |2^(-q.exp) - man*den| with e0 = q.exp
    const lhs = (1n << BigInt(-q.exp)) - q.man * den;
    const absErr = lhs < 0n ? -lhs : lhs;
    expect(
      cmpDyadic(absErr, q.exp, den, topQ - p - 1),
    ).toBeLessThanOrEqual(0);
  });

  it("handles plain and fractional forms", () => {
    expect(bfToNumber(bfParseDecimal("0", 100))).toBe(0);
    expect(bfToNumber(bfParseDecimal("0.000", 100))).toBe(0);
    expect(bfToNumber(bfParseDecimal("-2.5", 100))).toBe(-2.5);
    expect(bfToNumber(bfParseDecimal(".5", 100))).toBe(0.5);
    expect(bfToNumber(bfParseDecimal("+12e2", 100))).toBe(1200);
    expect(bfToNumber(bfParseDecimal("1.25e-2", 100))).toBe(0.0125);
    expect(() => bfParseDecimal("12f", 100)).toThrow();
    expect(() => bfParseDecimal("", 100)).toThrow();
  });

  it("agrees with double literals at 53 bits", () => {
    const r = rng(505);
    for (let i = 0; i < 500; i++) {
      const x = randDouble(r, 30);
      const text = x.toExponential(); // shortest-ish, still exact reparse
      expect(bfToNumber(bfParseDecimal(text, 53))).toBe(Number(text));
    }
  });
});

describe("hex text", () => {
  it("round-trips arbitrary-precision values exactly", () => {
    const r = rng(606);
    for (let i = 0; i < 500; i++) {
      const p = 2 + Math.floor(r() * 400);
      let v = bfFromNumber(randDouble(r, 200) || 1.0);
      v = bfDiv(v, bfFromNumber(3), p); // fill all p bits
      const text = bfFormatHex(v);
      const back = bfParseHex(text);
      expect(bfCmp(back, v)).toBe(0);
      expect(bfFormatHex(back)).toBe(text);
    }
  });

  it("prints the canonical grammar", () => {
    expect(bfFormatHex(bfFromInt(0, 10))).toBe("0x0.0p+0");
    expect(bfFormatHex(bfFromInt(1, 10))).toBe("0x1p+0");
    expect(bfFormatHex(bfFromInt(-2, 10))).toBe("-0x1p+1");
    expect(bfFormatHex(bfFromNumber(1.5))).toBe("0x1.8p+0");
    expect(bfFormatHex(bfFromNumber(0.375))).toBe("0x1.8p-2");
  });

  it("mirrors the platform fixed-width double format", () => {
    // tokens exactly as CPython's float.hex emits them
    expect(doubleToHex(1.0)).toBe("0x1.0000000000000p+0");
    expect(doubleToHex(0.5)).toBe("0x1.0000000000000p-1");
    expect(doubleToHex(-0.1)).toBe("-0x1.999999999999ap-4");
    expect(doubleToHex(Number.MIN_VALUE)).toBe("0x0.0000000000001p-1022");
    expect(doubleToHex(0)).toBe("0x0.0p+0");
    expect(doubleToHex(-0)).toBe("-0x0.0p+0");
    const r = rng(707);
    for (let i = 0; i < 2000; i++) {
      const x = randDouble(r, 300);
      expect(hexToDouble(doubleToHex(x))).toBe(x);
    }
  });
});

describe("component lift", () => {
  it("sums components exactly regardless of spread", () => {
    const v = bfFromComponents([Math.pow(2, 80), 1.0, Math.pow(2, -80)]);
    const expect80 = bfAdd(
      bfAdd(bfFromNumber(Math.pow(2, 80)), bfFromNumber(1), 200),
      bfFromNumber(Math.pow(2, -80)), 200,
    );
    expect(bfCmp(v, expect80)).toBe(0);
    expect(bitLength(v.man)).toBe(161);
  });

  it("treats zero components as absent", () => {
    const v = bfFromComponents([3.5, 0.0, 0.0]);
    expect(bfToNumber(v)).toBe(3.5);
    expect(bfFromComponents([0, 0]).sign).toBe(0);
  });
});
