/**
 * One-time fixtures: build libmpcore into .cache/ and generate a test
 * system with the backend CLI. Both are skipped when already present, so
 * repeated runs stay fast; delete .cache to force a rebuild.
 */

import { execFileSync } from "node:child_process";
import * as fs from "node:fs";
import * as path from "node:path";

const cacheDir = path.join(__dirname, "..", ".cache");
const libPath = path.join(cacheDir, "libmpcore.so");
const sysDir = path.join(cacheDir, "sys100");

export default function setup(): void {
  fs.mkdirSync(cacheDir, { recursive: true });
  if (!fs.existsSync(libPath)) {
    execFileSync("python3", ["-m", "mpcore.build_lib", "--out", cacheDir], {
      stdio: "inherit",
    });
  }
  if (!fs.existsSync(path.join(sysDir, "A.mpmat"))) {
    execFileSync(
      "mpcore",
      ["gen", "--n", "100", "--seed", "1", "--out", sysDir],
      { stdio: "inherit" },
    );
  }
  process.env.MPCORE_LIBRARY_PATH = libPath;
}
