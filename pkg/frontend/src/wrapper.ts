/**
 * High-level veneer over the raw libmpcore bindings, plus a scripted
 * refinement driver that re-runs the library's long-precision iteration
 * host-side.
 *
 * Parity contract: the library's long arithmetic and this package's
 * BigFloat engine are both correctly rounded, hex text crosses the
 * boundary exactly in both directions, and the short-precision factor and
 * solves run inside the library itself. scriptedRefine therefore performs
 * the same correction count and stop decision as the library's own
 * refinement, value for value, not approximately.
 */

import {
  BigFloat,
  bfAbs,
  bfAdd,
  bfCmp,
  bfDiv,
  bfFormatHex,
  bfFromComponents,
  bfFromInt,
  bfIsZero,
  bfMul,
  bfParseDecimal,
  bfSqrt,
  bfSub,
  bfToNumber,
  roundTo,
} from "./bigfloat";
import { check, RawLibrary, textOut } from "./ffi";
import { BfMatrix, bfGet } from "./matfile";

const RELEASED = -1;

class Handle {
  protected lib: RawLibrary;
  protected h: number;

  constructor(lib: RawLibrary, h: number) {
    this.lib = lib;
    this.h = h;
  }

  get handle(): number {
    return this.h;
  }

  release(): void {
    if (this.h !== RELEASED) {
      check(this.lib.release(this.h), "mpcore_release");
      this.h = RELEASED;
    }
  }
}

export class McMatrixHandle extends Handle {
  readonly k: number;
  readonly rows: number;
  readonly cols: number;

  constructor(lib: RawLibrary, k: number, rows: number, cols: number) {
    const out = [0];
    check(lib.matrixNew(k, rows, cols, out), "mpcore_matrix_new");
    super(lib, out[0]);
    this.k = k;
    this.rows = rows;
    this.cols = cols;
  }

  /** Accepts decimal or hex float text; hex is parsed exactly. */
  setText(i: number, j: number, text: string): void {
    check(
      this.lib.setElementFromDecimal(this.h, i, j, text),
      "mpcore_set_element_from_decimal",
    );
  }

  setBig(i: number, j: number, v: BigFloat): void {
    this.setText(i, j, bfFormatHex(v));
  }

  getComponents(i: number, j: number): Float64Array {
    const out = new Float64Array(this.k);
    check(
      this.lib.getElementComponents(this.h, i, j, out, this.k),
      "mpcore_get_element_components",
    );
    return out;
  }
}

export class McVectorHandle extends Handle {
  readonly k: number;
  readonly n: number;

  constructor(lib: RawLibrary, k: number, n: number) {
    const out = [0];
    check(lib.vectorNew(k, n, out), "mpcore_vector_new");
    super(lib, out[0]);
    this.k = k;
    this.n = n;
  }

  setText(i: number, text: string): void {
    check(
      this.lib.setElementFromDecimal(this.h, i, 0, text),
      "mpcore_set_element_from_decimal",
    );
  }

  setBig(i: number, v: BigFloat): void {
    this.setText(i, bfFormatHex(v));
  }

  getComponents(i: number): Float64Array {
    const out = new Float64Array(this.k);
    check(
      this.lib.getElementComponents(this.h, i, 0, out, this.k),
      "mpcore_get_element_components",
    );
    return out;
  }
}

export class PivotHandle extends Handle {}

export function luFactor(lib: RawLibrary, m: McMatrixHandle): PivotHandle {
  const out = [0];
  check(lib.luFactor(m.handle, out), "mpcore_lu_factor");
  return new PivotHandle(lib, out[0]);
}

export function luSolve(
  lib: RawLibrary, lu: McMatrixHandle, piv: PivotHandle,
  b: McVectorHandle, x: McVectorHandle,
): void {
  check(lib.luSolve(lu.handle, piv.handle, b.handle, x.handle), "mpcore_lu_solve");
}

export function libVersion(lib: RawLibrary): string {
  return textOut((buf, cap) => lib.version(buf, cap), "mpcore_version", 64);
}

export interface RefineParams {
  shortK: number;
  longBits: number;
  rtol: string;
  atol: string;
  maxIter: number;
}

export const DEFAULT_REFINE: RefineParams = {
  shortK: 3, longBits: 424, rtol: "1e-100", atol: "0", maxIter: 50,
};

export interface LibraryRefineResult {
  iterations: number;
  stopReason: string;
  /** Residual norms as decimal strings at the requested digit count. */
  residuals: string[];
  /** Solution entries as decimal strings at the requested digit count. */
  solution: string[];
}

/** Run the library's own refinement on a pair of .mpmat files. */
export function refineFiles(
  lib: RawLibrary, aPath: string, bPath: string,
  params: RefineParams = DEFAULT_REFINE, digits = 40,
): LibraryRefineResult {
  const out = [0];
  check(
    lib.refine(
      aPath, bPath, params.shortK, params.longBits,
      params.rtol, params.atol, params.maxIter, out,
    ),
    "mpcore_refine",
  );
  const h = out[0];
  try {
    const iter = [0];
    check(lib.reportIterations(h, iter), "mpcore_report_iterations");
    const stopReason = textOut(
      (buf, cap) => lib.reportStopReason(h, buf, cap),
      "mpcore_report_stop_reason", 64,
    );
    const rc = [0];
    check(lib.reportResidualCount(h, rc), "mpcore_report_residual_count");
    const residuals: string[] = [];
    for (let i = 0; i < rc[0]; i++) {
      residuals.push(textOut(
        (buf, cap) => lib.reportResidualEntry(h, i, digits, buf, cap),
        "mpcore_report_residual_entry", digits + 16,
      ));
    }
    const sc = [0];
    check(lib.reportSolutionCount(h, sc), "mpcore_report_solution_count");
    const solution: string[] = [];
    for (let i = 0; i < sc[0]; i++) {
      solution.push(textOut(
        (buf, cap) => lib.reportSolutionEntry(h, i, digits, buf, cap),
        "mpcore_report_solution_entry", digits + 16,
      ));
    }
    return { iterations: iter[0], stopReason, residuals, solution };
  } finally {
    check(lib.release(h), "mpcore_release");
  }
}

export interface ScriptedRefineResult {
  x: BigFloat[];
  iterations: number;
  stopReason: string;
  history: BigFloat[];
}

function vecNorm2(v: BigFloat[], p: number): BigFloat {
  let acc = bfFromInt(0, p);
  for (const s of v) acc = bfAdd(acc, bfMul(s, s, p), p);
  return bfSqrt(acc, p);
}

function matNormFro(a: BigFloat[][], p: number): BigFloat {
  let acc = bfFromInt(0, p);
  for (const row of a) {
    for (const s of row) acc = bfAdd(acc, bfMul(s, s, p), p);
  }
  return bfSqrt(acc, p);
}

function checkStop(
  resNorm: BigFloat, xNorm: BigFloat, aFro: BigFloat,
  n: number, rtol: BigFloat, atol: BigFloat, p: number,
): boolean {
  let t = bfSqrt(bfFromInt(n, p), p);
  t = bfMul(t, rtol, p);
  t = bfMul(t, aFro, p);
  t = bfMul(t, xNorm, p);
  t = bfAdd(t, atol, p);
  return bfCmp(resNorm, t) < 0;
}

function rows(m: BfMatrix): BigFloat[][] {
  const out: BigFloat[][] = [];
  for (let i = 0; i < m.rows; i++) {
    const row: BigFloat[] = [];
    for (let j = 0; j < m.cols; j++) row.push(bfGet(m, i, j));
    out.push(row);
  }
  return out;
}

/** Re-round into the working precision the way the library's domain
 *  transfer does: a wide intermediate round, then the target round. */
function transfer(v: BigFloat, srcBits: number, dstBits: number): BigFloat {
  const wide = Math.max(srcBits, dstBits) + 8;
  return roundTo(roundTo(v, wide), dstBits);
}

/**
 * Host-side mirror of the library's mixed-precision refinement.
 *
 * The short factorization and every short triangular solve run inside the
 * library through matrix and vector handles; operands cross as exact hex
 * text and come back as raw binary64 components. All long-precision work
 * (residuals, norms, the stop test, normalization, the update) is redone
 * here with correctly rounded BigFloat arithmetic at params.longBits, in
 * the same operation order the library uses, so iteration counts, stop
 * reasons, and every intermediate value agree exactly.
 */
export function scriptedRefine(
  lib: RawLibrary, aMat: BfMatrix, bMat: BfMatrix,
  params: RefineParams = DEFAULT_REFINE,
): ScriptedRefineResult {
  if (aMat.rows !== aMat.cols) throw new Error("matrix must be square");
  if (bMat.cols !== 1 || bMat.rows !== aMat.rows) {
    throw new Error("rhs shape does not match the matrix");
  }
  const n = aMat.rows;
  const k = params.shortK;
  const p = params.longBits;
  const liftWide = Math.max(p, 53 * k + 64) + 8;

  let a = rows(aMat);
  let b = bMat.data.slice();
  if (aMat.bits !== p) {
    a = a.map((row) => row.map((v) => transfer(v, aMat.bits, p)));
  }
  if (bMat.bits !== p) b = b.map((v) => transfer(v, bMat.bits, p));

  const rtol = bfParseDecimal(params.rtol, p);
  const atol = bfParseDecimal(params.atol, p);

  const lift = (comps: Float64Array): BigFloat =>
    roundTo(roundTo(bfFromComponents(comps), liftWide), p);

  const aShort = new McMatrixHandle(lib, k, n, n);
  const bShort = new McVectorHandle(lib, k, n);
  const work = new McVectorHandle(lib, k, n);
  const zShort = new McVectorHandle(lib, k, n);
  let piv: PivotHandle | null = null;
  try {
    for (let i = 0; i < n; i++) {
      for (let j = 0; j < n; j++) aShort.setBig(i, j, a[i][j]);
      bShort.setBig(i, b[i]);
    }
    piv = luFactor(lib, aShort);
    luSolve(lib, aShort, piv, bShort, zShort);
    let x: BigFloat[] = [];
    for (let i = 0; i < n; i++) x.push(lift(zShort.getComponents(i)));

    const aFro = matNormFro(a, p);
    const one = bfFromInt(1, p);
    const history: BigFloat[] = [];
    let reason = "max_iter";
    let corrections = 0;
    for (let pass = 0; pass < params.maxIter; pass++) {
      const res: BigFloat[] = [];
      for (let i = 0; i < n; i++) {
        let acc = bfFromInt(0, p);
        for (let j = 0; j < n; j++) acc = bfAdd(acc, bfMul(a[i][j], x[j], p), p);
        res.push(bfSub(b[i], acc, p));
      }
      const resNorm = vecNorm2(res, p);
      history.push(resNorm);
      if (bfIsZero(resNorm)) {
        reason = "converged";
        break;
      }
      const xNorm = vecNorm2(x, p);
      if (checkStop(resNorm, xNorm, aFro, n, rtol, atol, p)) {
        reason = "converged";
        break;
      }
      if (history.length >= 4
          && bfCmp(history[history.length - 1], history[history.length - 2]) >= 0
          && bfCmp(history[history.length - 2], history[history.length - 3]) >= 0
          && bfCmp(history[history.length - 3], history[history.length - 4]) >= 0) {
        reason = "stagnated";
        break;
      }
      const coef = bfDiv(one, resNorm, p);
      for (let i = 0; i < n; i++) work.setBig(i, bfMul(res[i], coef, p));
      luSolve(lib, aShort, piv, work, zShort);
      const next: BigFloat[] = [];
      for (let i = 0; i < n; i++) {
        const z = lift(zShort.getComponents(i));
        next.push(bfAdd(x[i], bfMul(z, resNorm, p), p));
      }
      x = next;
      corrections += 1;
    }
    return { x, iterations: corrections, stopReason: reason, history };
  } finally {
    aShort.release();
    bShort.release();
    work.release();
    zShort.release();
    if (piv) piv.release();
  }
}

/**
 * Worst per-entry relative error against a reference, as a plain number.
 * Zero reference entries score by absolute error. Evaluated at 240 bits,
 * matching the library's reporting, so the result is the identical
 * binary64 the CLI writes.
 */
export function maxRelErr(x: BigFloat[], ref: BigFloat[]): number {
  if (x.length !== ref.length) throw new Error("length mismatch");
  const p = 240;
  let best: BigFloat | null = null;
  for (let i = 0; i < x.length; i++) {
    const r = roundTo(ref[i], p);
    const xi = roundTo(x[i], p);
    const q = bfIsZero(r)
      ? bfAbs(xi)
      : bfDiv(bfAbs(bfSub(xi, r, p)), bfAbs(r), p);
    if (best === null || bfCmp(q, best) > 0) best = q;
  }
  return bfToNumber(best as BigFloat);
}
