"""Build libmpcore, the C-ABI shared library, via cffi embedding.

    python3 -m mpcore.build_lib [--out DIR]

produces libmpcore.so (suffix per platform) plus a libmpcore.json sidecar
recording the exact libpython the library links against. Foreign hosts
must load that libpython with global symbol visibility (RTLD_GLOBAL or
equivalent) before loading libmpcore, because the embedded interpreter's
extension modules resolve interpreter symbols from the global namespace.

The embedded interpreter starts with the build environment's default
module path; set MPCORE_PYTHONPATH (os.pathsep separated) in the host
process to prepend extra directories when the package lives elsewhere.

Exported symbols all return an int32 status (see mpcore.ffi for the code
list); text crosses the boundary as NUL-terminated ascii in caller-owned
buffers and is truncated (status 2) when the buffer is too small.
"""

import argparse
import json
import os
import sys
import sysconfig
import tempfile

import cffi

from . import __version__

DECLS = """
int32_t mpcore_version(char *out, int32_t cap);
int32_t mpcore_simd_enabled(void);
int32_t mpcore_matrix_new(int32_t k, int32_t rows, int32_t cols,
                          uint64_t *out);
int32_t mpcore_vector_new(int32_t k, int32_t n, uint64_t *out);
int32_t mpcore_release(uint64_t h);
int32_t mpcore_set_element_from_decimal(uint64_t h, int32_t i, int32_t j,
                                        const char *text);
int32_t mpcore_get_element_components(uint64_t h, int32_t i, int32_t j,
                                      double *out, int32_t cap);
int32_t mpcore_lu_factor(uint64_t h, uint64_t *piv_out);
int32_t mpcore_lu_solve(uint64_t lu_h, uint64_t piv_h, uint64_t b_h,
                        uint64_t x_h);
int32_t mpcore_refine(const char *a_path, const char *b_path,
                      int32_t short_k, int32_t long_bits, const char *rtol,
                      const char *atol, int32_t max_iter,
                      uint64_t *report_out);
int32_t mpcore_report_iterations(uint64_t h, int32_t *out);
int32_t mpcore_report_stop_reason(uint64_t h, char *out, int32_t cap);
int32_t mpcore_report_residual_count(uint64_t h, int32_t *out);
int32_t mpcore_report_residual_entry(uint64_t h, int32_t idx,
                                     int32_t digits, char *out, int32_t cap);
int32_t mpcore_report_solution_count(uint64_t h, int32_t *out);
int32_t mpcore_report_solution_entry(uint64_t h, int32_t idx,
                                     int32_t digits, char *out, int32_t cap);
"""

INIT_CODE = r"""
from _mpcore_cabi import ffi
import os
import sys

extra = os.environ.get("MPCORE_PYTHONPATH")
if extra:
    sys.path[:0] = [p for p in extra.split(os.pathsep) if p]

import mpcore.ffi as impl

OK, TRUNC, PARSE, INTERNAL = 0, 2, 4, 6


def _copy_text(text, buf, cap):
    if buf == ffi.NULL or cap <= 0:
        return TRUNC
    data = text.encode("ascii", "replace")
    fit = data[:cap - 1]
    ffi.memmove(buf, fit + b"\x00", len(fit) + 1)
    return OK if len(fit) == len(data) else TRUNC


def _text_in(ptr):
    if ptr == ffi.NULL:
        return None
    return ffi.string(ptr).decode("ascii", "replace")


@ffi.def_extern()
def mpcore_version(out, cap):
    return _copy_text(impl.version(), out, cap)


@ffi.def_extern()
def mpcore_simd_enabled():
    return impl.simd_enabled()


@ffi.def_extern()
def mpcore_matrix_new(k, rows, cols, out):
    if out == ffi.NULL:
        return TRUNC
    st, h = impl.matrix_new(k, rows, cols)
    out[0] = h
    return st


@ffi.def_extern()
def mpcore_vector_new(k, n, out):
    if out == ffi.NULL:
        return TRUNC
    st, h = impl.vector_new(k, n)
    out[0] = h
    return st


@ffi.def_extern()
def mpcore_release(h):
    return impl.release(h)


@ffi.def_extern()
def mpcore_set_element_from_decimal(h, i, j, text):
    s = _text_in(text)
    if s is None:
        return PARSE
    return impl.set_element_from_decimal(h, i, j, s)


@ffi.def_extern()
def mpcore_get_element_components(h, i, j, out, cap):
    st, comps = impl.get_element_components(h, i, j)
    if st != OK:
        return st
    if out == ffi.NULL or cap < len(comps):
        return TRUNC
    for c, val in enumerate(comps):
        out[c] = val
    return OK


@ffi.def_extern()
def mpcore_lu_factor(h, piv_out):
    if piv_out == ffi.NULL:
        return TRUNC
    st, piv = impl.lu_factor(h)
    piv_out[0] = piv
    return st


@ffi.def_extern()
def mpcore_lu_solve(lu_h, piv_h, b_h, x_h):
    return impl.lu_solve_handles(lu_h, piv_h, b_h, x_h)


@ffi.def_extern()
def mpcore_refine(a_path, b_path, short_k, long_bits, rtol, atol,
                  max_iter, report_out):
    if report_out == ffi.NULL:
        return TRUNC
    a, b = _text_in(a_path), _text_in(b_path)
    rt, at = _text_in(rtol), _text_in(atol)
    if None in (a, b, rt, at):
        return PARSE
    st, h = impl.refine(a, b, short_k, long_bits, rt, at, max_iter)
    report_out[0] = h
    return st


def _int_out(pair, out):
    st, value = pair
    if out == ffi.NULL:
        return TRUNC
    out[0] = value
    return st


@ffi.def_extern()
def mpcore_report_iterations(h, out):
    return _int_out(impl.report_iterations(h), out)


@ffi.def_extern()
def mpcore_report_stop_reason(h, out, cap):
    st, text = impl.report_stop_reason(h)
    return st if st != OK else _copy_text(text, out, cap)


@ffi.def_extern()
def mpcore_report_residual_count(h, out):
    return _int_out(impl.report_residual_count(h), out)


@ffi.def_extern()
def mpcore_report_residual_entry(h, idx, digits, out, cap):
    st, text = impl.report_residual_entry(h, idx, digits)
    return st if st != OK else _copy_text(text, out, cap)


@ffi.def_extern()
def mpcore_report_solution_count(h, out):
    return _int_out(impl.report_solution_count(h), out)


@ffi.def_extern()
def mpcore_report_solution_entry(h, idx, digits, out, cap):
    st, text = impl.report_solution_entry(h, idx, digits)
    return st if st != OK else _copy_text(text, out, cap)
"""


def libpython_record():
    """Locate the shared libpython this build links against."""
    soname = sysconfig.get_config_var("INSTSONAME") or ""
    candidates = []
    for var in ("LIBDIR", "LIBPL"):
        base = sysconfig.get_config_var(var)
        if base and soname:
            candidates.append(os.path.join(base, soname))
    multiarch = sysconfig.get_config_var("MULTIARCH")
    if multiarch and soname:
        candidates.append(os.path.join("/usr/lib", multiarch, soname))
    path = next((c for c in candidates if os.path.exists(c)), None)
    return {"libpython_soname": soname, "libpython_path": path,
            "python_version": sys.version.split()[0],
            "mpcore_version": __version__}


def build(out_dir=".", tmpdir=None):
    """Compile the embedding library; returns the path to the .so."""
    out_dir = os.path.abspath(out_dir)
    os.makedirs(out_dir, exist_ok=True)
    ffibuilder = cffi.FFI()
    ffibuilder.embedding_api(DECLS)
    ffibuilder.set_source("_mpcore_cabi", "#include <stdint.h>")
    ffibuilder.embedding_init_code(INIT_CODE)
    with tempfile.TemporaryDirectory() as scratch:
        lib = ffibuilder.compile(target=os.path.join(out_dir, "libmpcore.*"),
                                 tmpdir=tmpdir or scratch, verbose=False)
    sidecar = os.path.join(out_dir, "libmpcore.json")
    with open(sidecar, "w", encoding="ascii") as fh:
        json.dump(libpython_record(), fh, indent=2)
        fh.write("\n")
    return lib


def main(argv=None):
    ap = argparse.ArgumentParser(
        prog="python3 -m mpcore.build_lib",
        description="build the libmpcore C-ABI shared library")
    ap.add_argument("--out", default=".", help="output directory")
    args = ap.parse_args(argv)
    lib = build(args.out)
    print(lib)
    print(os.path.join(os.path.dirname(lib), "libmpcore.json"))
    return 0


if __name__ == "__main__":
    sys.exit(main())
