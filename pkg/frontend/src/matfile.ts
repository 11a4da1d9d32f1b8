/**
 * Reader and writer for the .mpmat text interchange format.
 *
 * Layout: a header line `mpmat <rows> <cols> <tag> <bits>` followed by one
 * line per row. Multi-component entries (tags dd, td, qd) are k hex float
 * tokens per element, most significant component first; big-float entries
 * (tag bf) are one hex token per element. Hex text is exact, so a load or
 * save never rounds.
 */

import * as fs from "node:fs";

import {
  BigFloat,
  bfFormatHex,
  bfParseHex,
  doubleToHex,
  hexToDouble,
} from "./bigfloat";

export const COMPONENT_COUNT: Record<string, number> = { dd: 2, td: 3, qd: 4 };

export class MatFileError extends Error {}

export interface McMatrix {
  kind: "mc";
  tag: "dd" | "td" | "qd";
  k: number;
  rows: number;
  cols: number;
  /** rows*cols*k doubles, element major then component. */
  data: Float64Array;
}

export interface BfMatrix {
  kind: "bf";
  bits: number;
  rows: number;
  cols: number;
  /** rows*cols values, row major. */
  data: BigFloat[];
}

export type AnyMatrix = McMatrix | BfMatrix;

export function mcGet(m: McMatrix, i: number, j: number): Float64Array {
  const base = (i * m.cols + j) * m.k;
  return m.data.subarray(base, base + m.k);
}

export function bfGet(m: BfMatrix, i: number, j: number): BigFloat {
  return m.data[i * m.cols + j];
}

function fail(path: string, lineNo: number, msg: string): never {
  throw new MatFileError(`${path}:${lineNo}: ${msg}`);
}

export function loadMatrix(path: string): AnyMatrix {
  const text = fs.readFileSync(path, "utf8");
  const lines = text.split("\n");
  if (lines.length > 0 && lines[lines.length - 1] === "") lines.pop();
  if (lines.length === 0) fail(path, 1, "empty file");
  const head = lines[0].trim().split(/\s+/);
  if (head.length !== 5 || head[0] !== "mpmat") {
    fail(path, 1, `bad header ${JSON.stringify(lines[0])}`);
  }
  const rows = parseInt(head[1], 10);
  const cols = parseInt(head[2], 10);
  const tag = head[3];
  const bits = parseInt(head[4], 10);
  if (!Number.isInteger(rows) || !Number.isInteger(cols) || rows < 1 || cols < 1) {
    fail(path, 1, "bad dimensions");
  }
  if (lines.length - 1 !== rows) {
    fail(path, 1, `expected ${rows} data rows, found ${lines.length - 1}`);
  }
  if (tag === "bf") {
    if (!Number.isInteger(bits) || bits < 2) fail(path, 1, `bad precision ${head[4]}`);
    const data: BigFloat[] = new Array(rows * cols);
    for (let i = 0; i < rows; i++) {
      const toks = lines[i + 1].trim().split(/\s+/);
      if (toks.length !== cols) {
        fail(path, i + 2, `expected ${cols} entries, found ${toks.length}`);
      }
      for (let j = 0; j < cols; j++) {
        try {
          data[i * cols + j] = bfParseHex(toks[j], bits);
        } catch (err) {
          fail(path, i + 2, `${(err as Error).message}`);
        }
      }
    }
    return { kind: "bf", bits, rows, cols, data };
  }
  const k = COMPONENT_COUNT[tag];
  if (k === undefined) fail(path, 1, `unknown precision tag ${JSON.stringify(tag)}`);
  if (bits !== 53 * k) fail(path, 1, `tag ${tag} carries ${53 * k} bits, header says ${bits}`);
  const data = new Float64Array(rows * cols * k);
  for (let i = 0; i < rows; i++) {
    const toks = lines[i + 1].trim().split(/\s+/);
    if (toks.length !== cols * k) {
      fail(path, i + 2, `expected ${cols * k} tokens, found ${toks.length}`);
    }
    for (let t = 0; t < toks.length; t++) {
      try {
        data[i * cols * k + t] = hexToDouble(toks[t]);
      } catch (err) {
        fail(path, i + 2, `${(err as Error).message}`);
      }
    }
  }
  return {
    kind: "mc", tag: tag as McMatrix["tag"], k, rows, cols, data,
  };
}

export function saveMatrix(path: string, m: AnyMatrix): void {
  const out: string[] = [];
  if (m.kind === "bf") {
    out.push(`mpmat ${m.rows} ${m.cols} bf ${m.bits}`);
    for (let i = 0; i < m.rows; i++) {
      const toks: string[] = [];
      for (let j = 0; j < m.cols; j++) toks.push(bfFormatHex(bfGet(m, i, j)));
      out.push(toks.join(" "));
    }
  } else {
    out.push(`mpmat ${m.rows} ${m.cols} ${m.tag} ${53 * m.k}`);
    for (let i = 0; i < m.rows; i++) {
      const toks: string[] = [];
      for (let t = 0; t < m.cols * m.k; t++) {
        toks.push(doubleToHex(m.data[i * m.cols * m.k + t]));
      }
      out.push(toks.join(" "));
    }
  }
  fs.writeFileSync(path, out.join("\n") + "\n");
}
