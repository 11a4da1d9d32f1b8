"""Handle-based call surface backing the shared-library exports.

Every function here mirrors one exported C symbol (minus the mpcore_
prefix), takes and returns plain ints/floats/strings, and reports failure
through an integer status instead of an exception, so the embedded C
wrappers stay one-to-one and nothing can unwind across the ABI boundary.

Status codes:
    0  ok
    1  invalid handle (unknown, released, or wrong object kind)
    2  dimension or argument mismatch (shape, index, k, buffer size)
    3  singular matrix
    4  parse failure (element text, file contents, unreadable file)
    5  arithmetic overflow
    6  internal error (anything else; also concurrent mutation)

Handles are sequential uint64 ids (< 2**53, safe in hosts whose only
number type is binary64) and are never reused within a process, so a
released or stale handle is always detected. The table is lock
protected; mutating calls additionally latch their target entry, and a
second mutator hitting a latched entry gets status 6 instead of racing.
"""

import threading

from . import __version__
from .bigfloat import PrecisionContext, bf_format_decimal, bf_parse_decimal, \
    bf_parse_hex
from .errors import (
    ArithmeticOverflowError,
    DimensionError,
    ParseError,
    SingularMatrixError,
)
from .linalg import DenseMatrix, McDomain, Vector, lu_factor_pp, lu_solve
from .matfile import load_matrix, load_vector
from .refine import RefineConfig, iterative_refinement
from .simd import simd_enabled as _simd_enabled

OK = 0
BAD_HANDLE = 1
BAD_DIMENSION = 2
SINGULAR = 3
BAD_PARSE = 4
OVERFLOW = 5
INTERNAL = 6

_TAGS = {2: "dd", 3: "td", 4: "qd"}

__all__ = [
    "OK", "BAD_HANDLE", "BAD_DIMENSION", "SINGULAR", "BAD_PARSE",
    "OVERFLOW", "INTERNAL",
    "version", "simd_enabled",
    "matrix_new", "vector_new", "release",
    "set_element_from_decimal", "get_element_components",
    "lu_factor", "lu_solve_handles", "refine",
    "report_iterations", "report_stop_reason",
    "report_residual_count", "report_residual_entry",
    "report_solution_count", "report_solution_entry",
]


class _Entry:
    __slots__ = ("kind", "obj", "busy")

    def __init__(self, kind, obj):
        self.kind = kind
        self.obj = obj
        self.busy = False


class _Table:
    def __init__(self):
        self._lock = threading.Lock()
        self._next = 1
        self._entries = {}

    def put(self, kind, obj):
        with self._lock:
            h = self._next
            self._next += 1
            self._entries[h] = _Entry(kind, obj)
        return h

    def get(self, h, kind):
        with self._lock:
            e = self._entries.get(h)
        if e is None or e.kind != kind:
            return None
        return e

    def drop(self, h):
        with self._lock:
            return self._entries.pop(h, None) is not None

    def latch(self, h, kind):
        """Claim an entry for mutation: the entry, or an error status."""
        with self._lock:
            e = self._entries.get(h)
            if e is None or e.kind != kind:
                return None, BAD_HANDLE
            if e.busy:
                return None, INTERNAL
            e.busy = True
        return e, OK

    def unlatch(self, e):
        with self._lock:
            e.busy = False


_table = _Table()


def _status_for(exc):
    if isinstance(exc, DimensionError):
        return BAD_DIMENSION
    if isinstance(exc, SingularMatrixError):
        return SINGULAR
    if isinstance(exc, (ParseError, OSError, UnicodeError)):
        return BAD_PARSE
    if isinstance(exc, ArithmeticOverflowError):
        return OVERFLOW
    return INTERNAL


def version():
    return __version__


def simd_enabled():
    return 1 if _simd_enabled() else 0


def matrix_new(k, rows, cols):
    """-> (status, handle). Zero-filled k-component matrix."""
    if k not in _TAGS or rows < 1 or cols < 1:
        return BAD_DIMENSION, 0
    m = DenseMatrix.zeros(McDomain(_TAGS[k]), rows, cols)
    return OK, _table.put("matrix", m)


def vector_new(k, n):
    """-> (status, handle). Zero-filled k-component vector."""
    if k not in _TAGS or n < 1:
        return BAD_DIMENSION, 0
    v = Vector.zeros(McDomain(_TAGS[k]), n)
    return OK, _table.put("vector", v)


def release(h):
    """Free any handle kind; releasing twice reports BAD_HANDLE."""
    return OK if _table.drop(h) else BAD_HANDLE


def _container(h):
    e = _table.get(h, "matrix") or _table.get(h, "vector")
    return e.obj if e else None


def _locate(obj, i, j):
    if isinstance(obj, DenseMatrix):
        return 0 <= i < obj.rows and 0 <= j < obj.cols
    return 0 <= i < obj.n and j == 0


def set_element_from_decimal(h, i, j, text):
    """Parse decimal or hex-float text into element (i, j); -> status.

    Vectors address their entries as (i, 0).
    """
    obj = _container(h)
    if obj is None:
        return BAD_HANDLE
    if not _locate(obj, i, j):
        return BAD_DIMENSION
    try:
        s = text.strip()
        if s.lstrip("+-").lower().startswith("0x"):
            val = bf_parse_hex(s)
        else:
            val = bf_parse_decimal(s, PrecisionContext(53 * obj.domain.k + 64))
        if isinstance(obj, DenseMatrix):
            obj.set(i, j, val)
        else:
            obj.set(i, val)
    except Exception as exc:
        return _status_for(exc)
    return OK


def get_element_components(h, i, j):
    """-> (status, tuple of k binary64 components)."""
    obj = _container(h)
    if obj is None:
        return BAD_HANDLE, ()
    if not _locate(obj, i, j):
        return BAD_DIMENSION, ()
    raw = obj.get(i, j) if isinstance(obj, DenseMatrix) else obj.get(i)
    return OK, tuple(raw.components)


def lu_factor(h):
    """Factor the matrix in place; -> (status, pivot record handle)."""
    e, st = _table.latch(h, "matrix")
    if st != OK:
        return st, 0
    try:
        piv = lu_factor_pp(e.obj)
    except Exception as exc:
        return _status_for(exc), 0
    finally:
        _table.unlatch(e)
    return OK, _table.put("pivot", piv)


def lu_solve_handles(lu_h, piv_h, b_h, x_h):
    """Solve with a factored matrix; writes the solution into x_h."""
    lu_e = _table.get(lu_h, "matrix")
    piv_e = _table.get(piv_h, "pivot")
    b_e = _table.get(b_h, "vector")
    if lu_e is None or piv_e is None or b_e is None:
        return BAD_HANDLE
    x_e, st = _table.latch(x_h, "vector")
    if st != OK:
        return st
    try:
        lu, b, x = lu_e.obj, b_e.obj, x_e.obj
        if x.domain.k != lu.domain.k or b.domain.k != lu.domain.k:
            return BAD_DIMENSION
        if piv_e.obj.n != lu.rows or x.n != lu.rows:
            return BAD_DIMENSION
        sol = lu_solve(lu, piv_e.obj, b)
        for idx in range(x.n):
            x.set(idx, sol.get(idx))
    except Exception as exc:
        return _status_for(exc)
    finally:
        _table.unlatch(x_e)
    return OK


def refine(a_path, b_path, short_k, long_bits, rtol, atol, max_iter):
    """Load a long-precision system from files and refine it.

    -> (status, report handle). Tolerances are decimal strings so values
    like 1e-100 cross the boundary without binary64 truncation.
    """
    try:
        A = load_matrix(a_path)
        b = load_vector(b_path)
        cfg = RefineConfig(short_k=short_k, long_bits=long_bits,
                           rtol=rtol, atol=atol, max_iter=max_iter)
        report = iterative_refinement(A, b, cfg)
    except Exception as exc:
        return _status_for(exc), 0
    return OK, _table.put("report", report)


def _report(h):
    e = _table.get(h, "report")
    return e.obj if e else None


def report_iterations(h):
    r = _report(h)
    return (BAD_HANDLE, 0) if r is None else (OK, r.iterations)


def report_stop_reason(h):
    r = _report(h)
    return (BAD_HANDLE, "") if r is None else (OK, r.stop_reason)


def report_residual_count(h):
    r = _report(h)
    return (BAD_HANDLE, 0) if r is None else (OK, len(r.residual_history))


def _format_entry(value, digits):
    return bf_format_decimal(value, digits if digits > 0 else None)


def report_residual_entry(h, idx, digits):
    """-> (status, decimal text of residual norm idx at digits figures)."""
    r = _report(h)
    if r is None:
        return BAD_HANDLE, ""
    if not 0 <= idx < len(r.residual_history):
        return BAD_DIMENSION, ""
    return OK, _format_entry(r.residual_history[idx], digits)


def report_solution_count(h):
    r = _report(h)
    return (BAD_HANDLE, 0) if r is None else (OK, r.solution.n)


def report_solution_entry(h, idx, digits):
    """-> (status, decimal text of solution element idx at digits figures)."""
    r = _report(h)
    if r is None:
        return BAD_HANDLE, ""
    if not 0 <= idx < r.solution.n:
        return BAD_DIMENSION, ""
    return OK, _format_entry(r.solution.get(idx), digits)
