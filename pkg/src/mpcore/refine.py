"""Mixed-precision iterative refinement.

Factor once in cheap multi-component short precision, then iterate
residual corrections computed in long BigFloat precision:

    x = lift(short_solve(b))
    loop:
        res = b - A*x                 (long)
        record ||res||; stop if below sqrt(n)*rtol*||A||_F*||x|| + atol
        res = res / ||res||           (normalization)
        z = lift(short_solve(round_short(res)))
        z = ||res|| * z               (reverse normalization)
        x = x + z                     (long)

The stop test is strict less-than. A residual of exactly zero converges
immediately. Three consecutive non-decreasing residual norms abort the
loop with stop_reason "stagnated" instead of looping to max_iter.
"""

from dataclasses import dataclass, field

from .bigfloat import (
    BigFloat,
    PrecisionContext,
    bf_add,
    bf_cmp,
    bf_div,
    bf_from_binary64,
    bf_from_int,
    bf_mul,
    bf_parse_decimal,
    bf_sqrt,
    bf_sub,
    _round_bf,
)
from .errors import DimensionError, DomainError
from .linalg import (
    BfDomain,
    McDomain,
    Vector,
    convert_matrix,
    convert_vector,
    lu_factor_pp,
    lu_solve,
    mat_norm_fro,
    mat_vec,
    vec_norm2,
)

__all__ = ["RefineConfig", "RefineReport", "check_stop", "iterative_refinement"]

STOP_CONVERGED = "converged"
STOP_MAX_ITER = "max_iter"
STOP_STAGNATED = "stagnated"


@dataclass(frozen=True)
class RefineConfig:
    """Refinement parameters.

    rtol/atol accept BigFloat, int, float, or a decimal string; they are
    coerced at long_bits. At least one of them must be positive.
    """

    short_k: int = 3
    long_bits: int = 424
    rtol: object = "1e-100"
    atol: object = 0
    max_iter: int = 50

    def __post_init__(self):
        if self.short_k not in (2, 3, 4):
            raise DomainError("short_k must be 2, 3, or 4")
        if self.long_bits <= 53 * self.short_k:
            raise DomainError("long_bits must exceed 53 * short_k")
        if self.max_iter < 1:
            raise DomainError("max_iter must be >= 1")


@dataclass
class RefineReport:
    solution: Vector
    iterations: int
    residual_history: list = field(default_factory=list)
    stop_reason: str = STOP_MAX_ITER


def _coerce_tol(value, ctx, name):
    if isinstance(value, BigFloat):
        out = _round_bf(value, ctx.p)
    elif isinstance(value, int):
        out = bf_from_int(value, ctx)
    elif isinstance(value, float):
        out = _round_bf(bf_from_binary64(value), ctx.p)
    elif isinstance(value, str):
        out = bf_parse_decimal(value, ctx)
    else:
        raise DomainError("%s must be a number or decimal string" % name)
    if out.sign < 0:
        raise DomainError("%s must be nonnegative" % name)
    return out


def check_stop(res_norm, x_norm, a_fro, n, rtol, atol, ctx=None):
    """True iff res_norm < sqrt(n) * rtol * a_fro * x_norm + atol.

    All quantities are BigFloat; the threshold is evaluated left to right
    in ctx (default: res_norm's own precision).
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    ctx = ctx or PrecisionContext(res_norm.prec)
    t = bf_sqrt(bf_from_int(n, ctx), ctx)
    t = bf_mul(t, rtol, ctx)
    t = bf_mul(t, a_fro, ctx)
    t = bf_mul(t, x_norm, ctx)
    t = bf_add(t, atol, ctx)
    return bf_cmp(res_norm, t) < 0


def iterative_refinement(A, b, cfg, simd=None, normalize=True):
    """Refine A*x = b per the module recipe; returns a RefineReport.

    A and b are BigFloat containers at any precision; both are re-rounded
    into the cfg.long_bits working context on entry. The short-precision
    factorization raises SingularMatrixError (with .step) if rounding to
    short_k components produces an exactly zero pivot. normalize=False
    skips the residual normalization pair (diagnostic switch; on well
    scaled systems it must not move the converged solution).
    """
    if not isinstance(A.domain, BfDomain) or not isinstance(b.domain, BfDomain):
        raise DomainError("refinement expects BigFloat matrix and vector")
    if A.rows != A.cols:
        raise DimensionError("matrix must be square")
    if b.n != A.rows:
        raise DimensionError("rhs length %d does not match n=%d"
                             % (b.n, A.rows))
    n = A.rows
    long_dom = BfDomain(cfg.long_bits)
    ctx = long_dom.ctx
    rtol = _coerce_tol(cfg.rtol, ctx, "rtol")
    atol = _coerce_tol(cfg.atol, ctx, "atol")
    if rtol.sign == 0 and atol.sign == 0:
        raise DomainError("rtol and atol cannot both be zero")

    if not A.domain.compatible(long_dom):
        A = convert_matrix(A, long_dom)
    if not b.domain.compatible(long_dom):
        b = convert_vector(b, long_dom)

    short_dom = McDomain({2: "dd", 3: "td", 4: "qd"}[cfg.short_k])
    a_short = convert_matrix(A, short_dom)
    b_short = convert_vector(b, short_dom)
    piv = lu_factor_pp(a_short, simd=simd)
    x = convert_vector(lu_solve(a_short, piv, b_short, simd=simd), long_dom)

    a_fro = mat_norm_fro(A)
    one = bf_from_int(1, ctx)
    history = []
    reason = STOP_MAX_ITER
    corrections = 0
    for _ in range(cfg.max_iter):
        ax = mat_vec(A, x)
        res = Vector(long_dom, n,
                     [bf_sub(bv, av, ctx)
                      for bv, av in zip(b.data, ax.data)])
        res_norm = vec_norm2(res)
        history.append(res_norm)
        if res_norm.sign == 0:
            reason = STOP_CONVERGED
            break
        x_norm = vec_norm2(x)
        if check_stop(res_norm, x_norm, a_fro, n, rtol, atol, ctx):
            reason = STOP_CONVERGED
            break
        if len(history) >= 4 and all(
                bf_cmp(history[-i], history[-i - 1]) >= 0 for i in (1, 2, 3)):
            reason = STOP_STAGNATED
            break
        if normalize:
            coef = bf_div(one, res_norm, ctx)
            work = Vector(long_dom, n,
                          [bf_mul(rv, coef, ctx) for rv in res.data])
        else:
            work = res
        z_short = lu_solve(a_short, piv, convert_vector(work, short_dom),
                           simd=simd)
        z = convert_vector(z_short, long_dom)
        if normalize:
            upd = [bf_mul(zv, res_norm, ctx) for zv in z.data]
        else:
            upd = z.data
        x = Vector(long_dom, n,
                   [bf_add(xv, uv, ctx) for xv, uv in zip(x.data, upd)])
        corrections += 1
    return RefineReport(solution=x, iterations=corrections,
                        residual_history=history, stop_reason=reason)
