"""Dense linear algebra over multi-component and BigFloat scalars.

Containers carry a domain object that fixes the scalar type and its
arithmetic:

* McDomain: k-component binary64 values, stored as planar float64 arrays
  of shape (k, ...). These have two execution paths, a scalar loop and a
  vectorized lane path, built from the same kernel formulas so their
  results are bitwise identical; the lane path is selected per call
  (simd=None defers to the MPCORE_SIMD environment variable).
* BfDomain: arbitrary-precision BigFloat values at a fixed context,
  stored in nested lists; always executed as scalar loops.

LU uses partial pivoting on the magnitude of the leading component (exact
magnitude for BigFloat), smallest row index on ties, one reciprocal per
pivot step (multipliers are column times reciprocal, not per-element
divisions), and rank-1 trailing updates in y + (-m) * x form. Solves
traverse by column sweeps so the vectorized path preserves the scalar
operation order exactly.
"""

import math

import numpy as np

from . import mcfloat
from .bigfloat import (
    BigFloat,
    PrecisionContext,
    bf_abs,
    bf_add,
    bf_cmp,
    bf_div,
    bf_from_binary64,
    bf_from_int,
    bf_from_multicomp,
    bf_mul,
    bf_neg,
    bf_sqrt,
    bf_sub,
    bf_to_binary64,
    bf_to_multicomp,
)
from .errors import DimensionError, DomainError, SingularMatrixError
from .mcfloat import MultiComp, PrecisionTag
from .mcfloat import _add_t, _div_t, _mul_t, _neg, _sqrt_t  # noqa: F401
from .simd import planes_from_rows, planes_zeros, resolve_simd

__all__ = [
    "McDomain",
    "BfDomain",
    "Vector",
    "DenseMatrix",
    "PivotRecord",
    "lu_factor_pp",
    "lu_solve",
    "mat_vec",
    "mat_mul_blocked",
    "axpy_batch",
    "elementwise_add_batch",
    "elementwise_mul_batch",
    "vec_norm2",
    "mat_norm_fro",
    "max_rel_err",
    "convert_vector",
    "convert_matrix",
]


# ---------------------------------------------------------------------------
# domains
# ---------------------------------------------------------------------------

class McDomain:
    """Scalar domain of k-component values (internal scalar: k-tuple)."""

    kind = "mc"

    def __init__(self, tag):
        if isinstance(tag, str):
            tag = PrecisionTag.from_name(tag)
        self.tag = tag
        self.k = tag.k
        self.name = tag.name
        self.one = (1.0,) + (0.0,) * (tag.k - 1)
        self.zero = (0.0,) * tag.k

    def __repr__(self):
        return "McDomain(%s)" % self.name

    def compatible(self, other):
        return isinstance(other, McDomain) and other.k == self.k

    def add(self, a, b):
        return _add_t(a, b, self.k)

    def sub(self, a, b):
        return _add_t(a, _neg(b), self.k)

    def mul(self, a, b):
        return _mul_t(a, b, self.k)

    def div(self, a, b):
        return _div_t(a, b, self.k)

    def sqrt(self, a):
        return _sqrt_t(a, self.k)

    def neg(self, a):
        return _neg(a)

    def is_zero(self, a):
        return a[0] == 0.0

    def pivot_mag(self, a):
        # Pivot metric: magnitude of the leading component. Heads order
        # canonical values except exact head ties, where either row is an
        # acceptable partial pivot.
        return abs(a[0])

    def coerce(self, value):
        if isinstance(value, MultiComp):
            if value.k != self.k:
                raise DomainError("expected %d components, got %d"
                                  % (self.k, value.k))
            return value.components
        if isinstance(value, BigFloat):
            return bf_to_multicomp(value, self.k).components
        if isinstance(value, (int, float)):
            x = float(value)
            if not math.isfinite(x):
                raise DomainError("non-finite element %r" % (x,))
            return (x,) + (0.0,) * (self.k - 1)
        if isinstance(value, tuple) and len(value) == self.k:
            return value
        raise DomainError("cannot store %r in %r" % (value, self))

    def wrap(self, raw):
        return MultiComp(tuple(raw), validate=False)

    def to_bigfloat(self, raw, ctx=None):
        return bf_from_multicomp(MultiComp(tuple(raw), validate=False), ctx)

    def from_bigfloat(self, value):
        return bf_to_multicomp(value, self.k).components


class BfDomain:
    """Scalar domain of BigFloat values rounded at a fixed precision."""

    kind = "bf"

    def __init__(self, bits):
        self.ctx = bits if isinstance(bits, PrecisionContext) \
            else PrecisionContext(bits)
        self.name = "bf%d" % self.ctx.p
        self.one = bf_from_int(1, self.ctx)
        self.zero = bf_from_int(0, self.ctx)

    def __repr__(self):
        return "BfDomain(%d)" % self.ctx.p

    def compatible(self, other):
        return isinstance(other, BfDomain) and other.ctx.p == self.ctx.p

    def add(self, a, b):
        return bf_add(a, b, self.ctx)

    def sub(self, a, b):
        return bf_sub(a, b, self.ctx)

    def mul(self, a, b):
        return bf_mul(a, b, self.ctx)

    def div(self, a, b):
        return bf_div(a, b, self.ctx)

    def sqrt(self, a):
        return bf_sqrt(a, self.ctx)

    def neg(self, a):
        return bf_neg(a)

    def is_zero(self, a):
        return a.sign == 0

    def pivot_mag(self, a):
        return bf_abs(a)

    def coerce(self, value):
        if isinstance(value, BigFloat):
            from .bigfloat import _round_bf
            return _round_bf(value, self.ctx.p)
        if isinstance(value, MultiComp):
            return bf_from_multicomp(value, self.ctx)
        if isinstance(value, int):
            return bf_from_int(value, self.ctx)
        if isinstance(value, float):
            from .bigfloat import _round_bf
            return _round_bf(bf_from_binary64(value), self.ctx.p)
        raise DomainError("cannot store %r in %r" % (value, self))

    def wrap(self, raw):
        return raw

    def to_bigfloat(self, raw, ctx=None):
        if ctx is None:
            return raw
        from .bigfloat import _round_bf
        return _round_bf(raw, ctx.p)

    def from_bigfloat(self, value):
        from .bigfloat import _round_bf
        return _round_bf(value, self.ctx.p)


# ---------------------------------------------------------------------------
# containers
# ---------------------------------------------------------------------------

class Vector:
    """Dense column vector over a domain."""

    __slots__ = ("domain", "n", "data")

    def __init__(self, domain, n, data):
        self.domain = domain
        self.n = n
        self.data = data

    @classmethod
    def zeros(cls, domain, n):
        if n < 1:
            raise DimensionError("vector length must be positive")
        if domain.kind == "mc":
            return cls(domain, n, planes_zeros(domain.k, n))
        return cls(domain, n, [domain.zero] * n)

    @classmethod
    def from_values(cls, domain, values):
        values = list(values)
        v = cls.zeros(domain, len(values))
        for i, val in enumerate(values):
            v.set(i, val)
        return v

    def get(self, i):
        if self.domain.kind == "mc":
            return self.domain.wrap(tuple(self.data[:, i].tolist()))
        return self.data[i]

    def set(self, i, value):
        raw = self.domain.coerce(value)
        if self.domain.kind == "mc":
            self.data[:, i] = raw
        else:
            self.data[i] = raw

    def copy(self):
        if self.domain.kind == "mc":
            return Vector(self.domain, self.n, self.data.copy())
        return Vector(self.domain, self.n, list(self.data))

    def to_list(self):
        return [self.get(i) for i in range(self.n)]

    def _extract(self):
        if self.domain.kind == "mc":
            return [tuple(col) for col in zip(*self.data.tolist())]
        return list(self.data)

    def _store(self, values):
        if self.domain.kind == "mc":
            self.data = planes_from_rows(self.domain.k, values)
        else:
            self.data = list(values)


class DenseMatrix:
    """Dense row-major matrix over a domain."""

    __slots__ = ("domain", "rows", "cols", "data")

    def __init__(self, domain, rows, cols, data):
        self.domain = domain
        self.rows = rows
        self.cols = cols
        self.data = data

    @classmethod
    def zeros(cls, domain, rows, cols):
        if rows < 1 or cols < 1:
            raise DimensionError("matrix dimensions must be positive")
        if domain.kind == "mc":
            return cls(domain, rows, cols, planes_zeros(domain.k, (rows, cols)))
        return cls(domain, rows, cols,
                   [[domain.zero] * cols for _ in range(rows)])

    @classmethod
    def from_rows(cls, domain, rows):
        rows = [list(r) for r in rows]
        if not rows or any(len(r) != len(rows[0]) for r in rows):
            raise DimensionError("ragged or empty row data")
        m = cls.zeros(domain, len(rows), len(rows[0]))
        for i, r in enumerate(rows):
            for j, val in enumerate(r):
                m.set(i, j, val)
        return m

    def get(self, i, j):
        if self.domain.kind == "mc":
            return self.domain.wrap(tuple(self.data[:, i, j].tolist()))
        return self.data[i][j]

    def set(self, i, j, value):
        raw = self.domain.coerce(value)
        if self.domain.kind == "mc":
            self.data[:, i, j] = raw
        else:
            self.data[i][j] = raw

    def copy(self):
        if self.domain.kind == "mc":
            return DenseMatrix(self.domain, self.rows, self.cols,
                               self.data.copy())
        return DenseMatrix(self.domain, self.rows, self.cols,
                           [list(r) for r in self.data])

    def _extract_rows(self):
        if self.domain.kind == "mc":
            return [[tuple(e) for e in row]
                    for row in self.data.transpose(1, 2, 0).tolist()]
        return self.data

    def _store_rows(self, rows):
        if self.domain.kind == "mc":
            self.data = planes_from_rows(self.domain.k, rows)


def _require_same_domain(*objs):
    d = objs[0].domain
    for o in objs[1:]:
        if not d.compatible(o.domain):
            raise DomainError("domain mismatch: %r vs %r" % (d, o.domain))
    return d


class PivotRecord:
    """Row exchange sequence of one factorization.

    swaps[j] = r records that rows j and r (r >= j) were exchanged before
    elimination step j.
    """

    __slots__ = ("swaps",)

    def __init__(self, swaps):
        self.swaps = list(swaps)
        for j, r in enumerate(self.swaps):
            if r < j or r >= len(self.swaps):
                raise DomainError("invalid swap %d at step %d" % (r, j))

    @property
    def n(self):
        return len(self.swaps)

    def permutation(self):
        """Final row order: position i holds original row permutation()[i]."""
        order = list(range(self.n))
        for j, r in enumerate(self.swaps):
            if r != j:
                order[j], order[r] = order[r], order[j]
        return order

    def apply(self, v):
        """Apply the recorded exchanges to a vector, in factorization order."""
        out = v.copy()
        if v.domain.kind == "mc":
            for j, r in enumerate(self.swaps):
                if r != j:
                    out.data[:, [j, r]] = out.data[:, [r, j]]
        else:
            for j, r in enumerate(self.swaps):
                if r != j:
                    out.data[j], out.data[r] = out.data[r], out.data[j]
        return out


# ---------------------------------------------------------------------------
# factorization
# ---------------------------------------------------------------------------

def _lu_rows(rows, dom):
    n = len(rows)
    swaps = []
    for j in range(n):
        best = j
        bestmag = dom.pivot_mag(rows[j][j])
        for i in range(j + 1, n):
            m = dom.pivot_mag(rows[i][j])
            if m > bestmag:
                best, bestmag = i, m
        if best != j:
            rows[j], rows[best] = rows[best], rows[j]
        swaps.append(best)
        piv = rows[j][j]
        if dom.is_zero(piv):
            raise SingularMatrixError(
                "no nonzero pivot at elimination step %d" % j, step=j)
        recip = dom.div(dom.one, piv)
        rowj = rows[j]
        for i in range(j + 1, n):
            rowi = rows[i]
            m = dom.mul(rowi[j], recip)
            rowi[j] = m
            negm = dom.neg(m)
            for c in range(j + 1, n):
                rowi[c] = dom.add(rowi[c], dom.mul(negm, rowj[c]))
    return swaps


def _lu_lanes(d, k):
    n = d.shape[1]
    add = mcfloat.kernel_add(k)
    mul = mcfloat.kernel_mul(k)
    one = (1.0,) + (0.0,) * (k - 1)
    swaps = []
    for j in range(n):
        r = j + int(np.argmax(np.abs(d[0, j:, j])))
        if r != j:
            d[:, [j, r], :] = d[:, [r, j], :]
        swaps.append(r)
        piv = tuple(d[:, j, j].tolist())
        if piv[0] == 0.0:
            raise SingularMatrixError(
                "no nonzero pivot at elimination step %d" % j, step=j)
        if j + 1 == n:
            break
        recip = _div_t(one, piv, k)
        col = [d[c, j + 1:, j] for c in range(k)]
        mcol = mul(*col, *recip)
        for c in range(k):
            d[c, j + 1:, j] = mcol[c]
        t = mul(*[(-mcol[c])[:, None] for c in range(k)],
                *[d[c, j, j + 1:][None, :] for c in range(k)])
        upd = add(*[d[c, j + 1:, j + 1:] for c in range(k)], *t)
        for c in range(k):
            d[c, j + 1:, j + 1:] = upd[c]
    return swaps


def lu_factor_pp(A, simd=None):
    """Factor A in place as P*A = L*U with partial pivoting.

    After return A holds U on and above the diagonal and the unit-lower
    multipliers below it. Returns the PivotRecord of row exchanges. Raises
    SingularMatrixError (carrying .step) when a pivot column is exactly
    zero; the matrix contents are then unspecified.
    """
    if A.rows != A.cols:
        raise DimensionError("LU needs a square matrix, got %dx%d"
                             % (A.rows, A.cols))
    dom = A.domain
    if dom.kind == "mc" and resolve_simd(simd):
        return PivotRecord(_lu_lanes(A.data, dom.k))
    rows = A._extract_rows()
    swaps = _lu_rows(rows, dom)
    A._store_rows(rows)
    return PivotRecord(swaps)


# ---------------------------------------------------------------------------
# triangular solves
# ---------------------------------------------------------------------------

def _solve_rows(rows, swaps, x, dom):
    n = len(rows)
    for j, r in enumerate(swaps):
        if r != j:
            x[j], x[r] = x[r], x[j]
    # forward, unit lower triangle, column sweeps
    for j in range(n):
        xj = x[j]
        for i in range(j + 1, n):
            x[i] = dom.add(x[i], dom.mul(dom.neg(rows[i][j]), xj))
    # backward, column sweeps
    for j in range(n - 1, -1, -1):
        xj = dom.div(x[j], rows[j][j])
        x[j] = xj
        negxj = dom.neg(xj)
        for i in range(j):
            x[i] = dom.add(x[i], dom.mul(rows[i][j], negxj))
    return x


def _solve_lanes(d, swaps, xd, k):
    n = d.shape[1]
    add = mcfloat.kernel_add(k)
    mul = mcfloat.kernel_mul(k)
    one = (1.0,) + (0.0,) * (k - 1)
    for j, r in enumerate(swaps):
        if r != j:
            xd[:, [j, r]] = xd[:, [r, j]]
    for j in range(n - 1):
        xj = tuple(xd[:, j].tolist())
        t = mul(*[-d[c, j + 1:, j] for c in range(k)], *xj)
        upd = add(*[xd[c, j + 1:] for c in range(k)], *t)
        for c in range(k):
            xd[c, j + 1:] = upd[c]
    for j in range(n - 1, -1, -1):
        xj = _div_t(tuple(xd[:, j].tolist()),
                    tuple(d[:, j, j].tolist()), k)
        xd[:, j] = xj
        if j == 0:
            break
        negxj = _neg(xj)
        t = mul(*[d[c, :j, j] for c in range(k)], *negxj)
        upd = add(*[xd[c, :j] for c in range(k)], *t)
        for c in range(k):
            xd[c, :j] = upd[c]
    return xd


def lu_solve(lu, piv, b, simd=None):
    """Solve P*A = L*U against one right-hand side; b is not modified."""
    dom = _require_same_domain(lu, b)
    if lu.rows != lu.cols:
        raise DimensionError("factored matrix must be square")
    if piv.n != lu.rows or b.n != lu.rows:
        raise DimensionError("size mismatch: lu %d, pivots %d, rhs %d"
                             % (lu.rows, piv.n, b.n))
    x = b.copy()
    if dom.kind == "mc" and resolve_simd(simd):
        _solve_lanes(lu.data, piv.swaps, x.data, dom.k)
        return x
    vals = _solve_rows(lu._extract_rows(), piv.swaps, x._extract(), dom)
    x._store(vals)
    return x


# ---------------------------------------------------------------------------
# products
# ---------------------------------------------------------------------------

def mat_vec(A, x, simd=None):
    """Product A*x; accumulates strictly left to right over columns."""
    dom = _require_same_domain(A, x)
    if A.cols != x.n:
        raise DimensionError("mat_vec size mismatch: %dx%d times %d"
                             % (A.rows, A.cols, x.n))
    out = Vector.zeros(dom, A.rows)
    if dom.kind == "mc" and resolve_simd(simd):
        k = dom.k
        add = mcfloat.kernel_add(k)
        mul = mcfloat.kernel_mul(k)
        d, xd, od = A.data, x.data, out.data
        for j in range(A.cols):
            xj = tuple(xd[:, j].tolist())
            t = mul(*[d[c, :, j] for c in range(k)], *xj)
            acc = add(*[od[c] for c in range(k)], *t)
            for c in range(k):
                od[c] = acc[c]
        return out
    rows = A._extract_rows()
    xs = x._extract()
    vals = []
    for i in range(A.rows):
        acc = dom.zero
        rowi = rows[i]
        for j in range(A.cols):
            acc = dom.add(acc, dom.mul(rowi[j], xs[j]))
        vals.append(acc)
    out._store(vals)
    return out


def mat_mul_blocked(A, B, simd=None, block=64):
    """Product A*B accumulated rank-1 by rank-1 over the inner index.

    Traversal is deterministic: the inner index ascends globally (the block
    size only tiles the output for locality), so results do not depend on
    the blocking and the scalar path matches the lane path bit for bit.
    """
    dom = _require_same_domain(A, B)
    if A.cols != B.rows:
        raise DimensionError("mat_mul size mismatch: %dx%d times %dx%d"
                             % (A.rows, A.cols, B.rows, B.cols))
    out = DenseMatrix.zeros(dom, A.rows, B.cols)
    if dom.kind == "mc" and resolve_simd(simd):
        k = dom.k
        add = mcfloat.kernel_add(k)
        mul = mcfloat.kernel_mul(k)
        d, e, od = A.data, B.data, out.data
        for p in range(A.cols):
            t = mul(*[d[c, :, p][:, None] for c in range(k)],
                    *[e[c, p, :][None, :] for c in range(k)])
            acc = add(*[od[c] for c in range(k)], *t)
            for c in range(k):
                od[c] = acc[c]
        return out
    arows = A._extract_rows()
    brows = B._extract_rows()
    vals = [[dom.zero] * B.cols for _ in range(A.rows)]
    for i0 in range(0, A.rows, block):
        for j0 in range(0, B.cols, block):
            for p in range(A.cols):
                brow = brows[p]
                for i in range(i0, min(i0 + block, A.rows)):
                    aip = arows[i][p]
                    vi = vals[i]
                    for j in range(j0, min(j0 + block, B.cols)):
                        vi[j] = dom.add(vi[j], dom.mul(aip, brow[j]))
    if dom.kind == "mc":
        out._store_rows(vals)
    else:
        out.data = vals
    return out


# ---------------------------------------------------------------------------
# batched elementwise kernels
# ---------------------------------------------------------------------------

def axpy_batch(alpha, x, y, simd=None):
    """In-place y <- y + alpha * x (alpha applied from the right); returns y."""
    dom = _require_same_domain(x, y)
    if x.n != y.n:
        raise DimensionError("axpy size mismatch: %d vs %d" % (x.n, y.n))
    raw = dom.coerce(alpha)
    if dom.kind == "mc" and resolve_simd(simd):
        k = dom.k
        add = mcfloat.kernel_add(k)
        mul = mcfloat.kernel_mul(k)
        t = mul(*[x.data[c] for c in range(k)], *raw)
        acc = add(*[y.data[c] for c in range(k)], *t)
        for c in range(k):
            y.data[c] = acc[c]
        return y
    xs = x._extract()
    ys = y._extract()
    for i in range(y.n):
        ys[i] = dom.add(ys[i], dom.mul(xs[i], raw))
    y._store(ys)
    return y


def _elementwise(op_name, x, y, simd):
    dom = _require_same_domain(x, y)
    if x.n != y.n:
        raise DimensionError("size mismatch: %d vs %d" % (x.n, y.n))
    out = Vector.zeros(dom, x.n)
    if dom.kind == "mc" and resolve_simd(simd):
        k = dom.k
        kern = mcfloat.kernel_add(k) if op_name == "add" \
            else mcfloat.kernel_mul(k)
        res = kern(*[x.data[c] for c in range(k)],
                   *[y.data[c] for c in range(k)])
        for c in range(k):
            out.data[c] = np.asarray(res[c], dtype=np.float64)
        return out
    op = dom.add if op_name == "add" else dom.mul
    out._store([op(a, b) for a, b in zip(x._extract(), y._extract())])
    return out


def elementwise_add_batch(x, y, simd=None):
    """Elementwise x + y as a new vector."""
    return _elementwise("add", x, y, simd)


def elementwise_mul_batch(x, y, simd=None):
    """Elementwise x * y as a new vector."""
    return _elementwise("mul", x, y, simd)


# ---------------------------------------------------------------------------
# norms and error measures
# ---------------------------------------------------------------------------

def vec_norm2(v):
    """Euclidean norm computed in the vector's own domain arithmetic.

    Accumulation is a plain ascending-index scalar loop in both execution
    paths so the result never depends on the lane setting.
    """
    dom = v.domain
    acc = dom.zero
    for s in v._extract():
        acc = dom.add(acc, dom.mul(s, s))
    return dom.wrap(dom.sqrt(acc))


def mat_norm_fro(A):
    """Frobenius norm in the matrix's own domain, row-major accumulation."""
    dom = A.domain
    acc = dom.zero
    for row in A._extract_rows():
        for s in row:
            acc = dom.add(acc, dom.mul(s, s))
    return dom.wrap(dom.sqrt(acc))


_ERR_CTX = PrecisionContext(240)


def max_rel_err(x, ref, ctx=None):
    """Worst per-entry error of x against ref, as binary64.

    Entries are scored by |x_i - ref_i| / |ref_i|, except where the
    reference entry is exactly zero, which has no relative scale: there the
    absolute error |x_i| is used instead. Evaluated in 240-bit arithmetic
    unless a context is given.
    """
    if x.n != ref.n:
        raise DimensionError("size mismatch: %d vs %d" % (x.n, ref.n))
    ctx = ctx or _ERR_CTX
    best = None
    for i in range(x.n):
        r = _to_bf(ref, i, ctx)
        xi = _to_bf(x, i, ctx)
        if r.sign == 0:
            q = bf_abs(xi)
        else:
            q = bf_div(bf_abs(bf_sub(xi, r, ctx)), bf_abs(r), ctx)
        if best is None or bf_cmp(q, best) > 0:
            best = q
    return bf_to_binary64(best)


def _to_bf(v, i, ctx):
    return v.domain.to_bigfloat(
        v.data[i] if v.domain.kind == "bf" else tuple(v.data[:, i].tolist()),
        ctx)


# ---------------------------------------------------------------------------
# domain conversion
# ---------------------------------------------------------------------------

def _convert_scalar(raw, src, dst, ctx):
    return dst.from_bigfloat(src.to_bigfloat(raw, ctx))


def _transfer_ctx(src, dst):
    bits = 0
    for d in (src, dst):
        bits = max(bits, d.ctx.p if d.kind == "bf" else 53 * d.k + 64)
    return PrecisionContext(bits + 8)


def convert_vector(v, domain):
    """Re-represent a vector in another domain (rounding to its precision)."""
    ctx = _transfer_ctx(v.domain, domain)
    out = Vector.zeros(domain, v.n)
    vals = [_convert_scalar(s, v.domain, domain, ctx) for s in v._extract()]
    out._store(vals)
    return out


def convert_matrix(A, domain):
    """Re-represent a matrix in another domain (rounding to its precision)."""
    ctx = _transfer_ctx(A.domain, domain)
    out = DenseMatrix.zeros(domain, A.rows, A.cols)
    vals = [[_convert_scalar(s, A.domain, domain, ctx) for s in row]
            for row in A._extract_rows()]
    if domain.kind == "mc":
        out._store_rows(vals)
    else:
        out.data = vals
    return out
