/**
 * Raw bindings to the libmpcore shared library.
 *
 * The library embeds an interpreter whose extension modules resolve
 * symbols from the process-global namespace, so the exact libpython it
 * was built against must be loaded with global visibility first. The
 * build drops a libmpcore.json sidecar next to the .so recording that
 * path; loadLibrary reads it and performs the two-step load.
 *
 * Every export returns an int32 status; the checked wrappers in
 * wrapper.ts turn nonzero statuses into MpcoreError.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import * as koffi from "koffi";

export const STATUS_NAMES: Record<number, string> = {
  0: "ok",
  1: "invalid handle",
  2: "dimension or argument mismatch",
  3: "singular matrix",
  4: "parse failure",
  5: "arithmetic overflow",
  6: "internal error",
};

export const OK = 0;
export const BAD_HANDLE = 1;
export const BAD_DIMENSION = 2;
export const SINGULAR = 3;
export const BAD_PARSE = 4;
export const OVERFLOW = 5;
export const INTERNAL = 6;

export class MpcoreError extends Error {
  readonly code: number;

  constructor(code: number, where: string) {
    super(`${where}: ${STATUS_NAMES[code] ?? "unknown status"} (status ${code})`);
    this.code = code;
  }
}

export interface Sidecar {
  libpython_soname: string;
  libpython_path: string | null;
  python_version: string;
  mpcore_version: string;
}

export interface RawLibrary {
  sidecar: Sidecar;
  libraryPath: string;
  version(out: Buffer, cap: number): number;
  simdEnabled(): number;
  matrixNew(k: number, rows: number, cols: number, out: number[]): number;
  vectorNew(k: number, n: number, out: number[]): number;
  release(h: number): number;
  setElementFromDecimal(h: number, i: number, j: number, text: string): number;
  getElementComponents(
    h: number, i: number, j: number, out: Float64Array, cap: number,
  ): number;
  luFactor(h: number, pivOut: number[]): number;
  luSolve(luH: number, pivH: number, bH: number, xH: number): number;
  refine(
    aPath: string, bPath: string, shortK: number, longBits: number,
    rtol: string, atol: string, maxIter: number, reportOut: number[],
  ): number;
  reportIterations(h: number, out: number[]): number;
  reportStopReason(h: number, out: Buffer, cap: number): number;
  reportResidualCount(h: number, out: number[]): number;
  reportResidualEntry(
    h: number, idx: number, digits: number, out: Buffer, cap: number,
  ): number;
  reportSolutionCount(h: number, out: number[]): number;
  reportSolutionEntry(
    h: number, idx: number, digits: number, out: Buffer, cap: number,
  ): number;
}

export interface LoadOptions {
  /** Path to libmpcore.so; falls back to MPCORE_LIBRARY_PATH. */
  libraryPath?: string;
}

let cached: RawLibrary | null = null;

export function loadLibrary(opts: LoadOptions = {}): RawLibrary {
  const libraryPath = opts.libraryPath ?? process.env.MPCORE_LIBRARY_PATH;
  if (!libraryPath) {
    throw new Error(
      "no library path: pass libraryPath or set MPCORE_LIBRARY_PATH",
    );
  }
  if (cached && cached.libraryPath === path.resolve(libraryPath)) return cached;

  const sidecarPath = path.join(path.dirname(libraryPath), "libmpcore.json");
  const sidecar = JSON.parse(fs.readFileSync(sidecarPath, "utf8")) as Sidecar;
  if (!sidecar.libpython_path) {
    throw new Error(`${sidecarPath}: sidecar does not record a libpython path`);
  }
  // interpreter symbols must be globally visible before the embedding
  // library's extension modules initialize
  koffi.load(sidecar.libpython_path, { global: true });
  const lib = koffi.load(path.resolve(libraryPath));

  const raw: RawLibrary = {
    sidecar,
    libraryPath: path.resolve(libraryPath),
    version: lib.func("int32_t mpcore_version(_Out_ char *out, int32_t cap)") as
      (out: Buffer, cap: number) => number,
    simdEnabled: lib.func("int32_t mpcore_simd_enabled()") as () => number,
    matrixNew: lib.func(
      "int32_t mpcore_matrix_new(int32_t k, int32_t rows, int32_t cols, _Out_ uint64_t *out)",
    ) as RawLibrary["matrixNew"],
    vectorNew: lib.func(
      "int32_t mpcore_vector_new(int32_t k, int32_t n, _Out_ uint64_t *out)",
    ) as RawLibrary["vectorNew"],
    release: lib.func("int32_t mpcore_release(uint64_t h)") as
      RawLibrary["release"],
    setElementFromDecimal: lib.func(
      "int32_t mpcore_set_element_from_decimal(uint64_t h, int32_t i, int32_t j, const char *text)",
    ) as RawLibrary["setElementFromDecimal"],
    getElementComponents: lib.func(
      "int32_t mpcore_get_element_components(uint64_t h, int32_t i, int32_t j, _Out_ double *out, int32_t cap)",
    ) as RawLibrary["getElementComponents"],
    luFactor: lib.func(
      "int32_t mpcore_lu_factor(uint64_t h, _Out_ uint64_t *piv_out)",
    ) as RawLibrary["luFactor"],
    luSolve: lib.func(
      "int32_t mpcore_lu_solve(uint64_t lu_h, uint64_t piv_h, uint64_t b_h, uint64_t x_h)",
    ) as RawLibrary["luSolve"],
    refine: lib.func(
      "int32_t mpcore_refine(const char *a_path, const char *b_path, int32_t short_k, int32_t long_bits, const char *rtol, const char *atol, int32_t max_iter, _Out_ uint64_t *report_out)",
    ) as RawLibrary["refine"],
    reportIterations: lib.func(
      "int32_t mpcore_report_iterations(uint64_t h, _Out_ int32_t *out)",
    ) as RawLibrary["reportIterations"],
    reportStopReason: lib.func(
      "int32_t mpcore_report_stop_reason(uint64_t h, _Out_ char *out, int32_t cap)",
    ) as RawLibrary["reportStopReason"],
    reportResidualCount: lib.func(
      "int32_t mpcore_report_residual_count(uint64_t h, _Out_ int32_t *out)",
    ) as RawLibrary["reportResidualCount"],
    reportResidualEntry: lib.func(
      "int32_t mpcore_report_residual_entry(uint64_t h, int32_t idx, int32_t digits, _Out_ char *out, int32_t cap)",
    ) as RawLibrary["reportResidualEntry"],
    reportSolutionCount: lib.func(
      "int32_t mpcore_report_solution_count(uint64_t h, _Out_ int32_t *out)",
    ) as RawLibrary["reportSolutionCount"],
    reportSolutionEntry: lib.func(
      "int32_t mpcore_report_solution_entry(uint64_t h, int32_t idx, int32_t digits, _Out_ char *out, int32_t cap)",
    ) as RawLibrary["reportSolutionEntry"],
  };
  cached = raw;
  return raw;
}

export function check(status: number, where: string): void {
  if (status !== OK) throw new MpcoreError(status, where);
}

/** Run a status call that fills a text buffer; returns the string. */
export function textOut(
  call: (buf: Buffer, cap: number) => number, where: string, cap = 256,
): string {
  const buf = Buffer.alloc(cap);
  check(call(buf, cap), where);
  const end = buf.indexOf(0);
  return buf.toString("ascii", 0, end < 0 ? cap : end);
}
