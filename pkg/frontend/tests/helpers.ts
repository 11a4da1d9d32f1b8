import * as path from "node:path";

import { loadLibrary, RawLibrary } from "../src/ffi";

export const cacheDir = path.join(__dirname, "..", ".cache");
export const libPath = path.join(cacheDir, "libmpcore.so");
export const sysDir = path.join(cacheDir, "sys100");

export function lib(): RawLibrary {
  return loadLibrary({ libraryPath: libPath });
}
