"""Deterministic generator of ill-conditioned dense test systems.

Builds A = R * D * R^-1 where R is a random matrix with entries uniform on
[-1, 1) and D is the geometric diagonal d_i = 10^(-c*(i-1)/n), i = 1..n,
so kappa_2(A) is nominally 10^(c*(n-1)/n) (exact only for orthogonal R).
The true solution is x_true = [0, 1, ..., n-1] and b = A*x_true. All
arithmetic runs in BigFloat at gen_bits; every bit of the output is a
deterministic function of (n, seed, cond_exponent, gen_bits).

Randomness comes from xoshiro256** seeded by splitmix64 expansion of the
64-bit seed, so streams are reproducible across platforms and languages.
"""

from dataclasses import dataclass

from .bigfloat import (
    BigFloat,
    PrecisionContext,
    bf_abs,
    bf_add,
    bf_cmp,
    bf_div,
    bf_from_int,
    bf_mul,
    bf_sub,
)
from .errors import DomainError, GenerationError, SingularMatrixError
from .linalg import (
    BfDomain,
    DenseMatrix,
    Vector,
    lu_factor_pp,
    lu_solve,
    mat_mul_blocked,
    mat_vec,
)

__all__ = [
    "ProblemSpec",
    "GeneratedSystem",
    "Xoshiro256StarStar",
    "splitmix64",
    "int_nth_root",
    "gen_diag",
    "gen_random_matrix",
    "build_system",
]

_M64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(state):
    """One splitmix64 step: returns (next_state, output), both 64-bit."""
    state = (state + _GOLDEN) & _M64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
    return state, z ^ (z >> 31)


def _rotl(x, k):
    return ((x << k) | (x >> (64 - k))) & _M64


class Xoshiro256StarStar:
    """xoshiro256** with splitmix64 seeding.

    uniform() maps each 64-bit draw u to the binary64 value (u / 2^63) - 1,
    covering [-1, 1); both steps are single correctly rounded operations,
    so the stream of floats is platform-independent.
    """

    __slots__ = ("s",)

    def __init__(self, seed):
        if not isinstance(seed, int) or seed < 0 or seed > _M64:
            raise DomainError("seed must be a 64-bit unsigned integer")
        state = seed
        s = []
        for _ in range(4):
            state, z = splitmix64(state)
            s.append(z)
        if not any(s):
            s[0] = _GOLDEN  # the all-zero state is a fixed point; never seed it
        self.s = s

    def next_u64(self):
        s = self.s
        result = (_rotl((s[1] * 5) & _M64, 7) * 9) & _M64
        t = (s[1] << 17) & _M64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def uniform(self):
        return self.next_u64() / (1 << 63) - 1.0


@dataclass(frozen=True)
class ProblemSpec:
    """Generation parameters; see build_system.

    gen_bits should be at least twice the long precision used downstream;
    512 covers the default 424-bit consumers with 88 bits to spare.
    """

    n: int
    seed: int
    cond_exponent: int = 26
    gen_bits: int = 512

    def __post_init__(self):
        if self.n < 2:
            raise DomainError("n must be >= 2")
        if not isinstance(self.seed, int) or not 0 <= self.seed <= _M64:
            raise DomainError("seed must be a 64-bit unsigned integer")
        if not isinstance(self.cond_exponent, int) or self.cond_exponent < 0:
            raise DomainError("cond_exponent must be a nonnegative integer")
        if self.gen_bits < 512:
            raise DomainError("gen_bits must be >= 512")


@dataclass
class GeneratedSystem:
    A: DenseMatrix
    b: Vector
    x_true: Vector
    spec: ProblemSpec
    seed_used: int


def int_nth_root(x, n):
    """floor(x ** (1/n)) for nonnegative integer x, integer n >= 1."""
    if n < 1:
        raise DomainError("root order must be >= 1")
    if x < 0:
        raise DomainError("radicand must be nonnegative")
    if x == 0:
        return 0
    if n == 1:
        return x
    r = 1 << ((x.bit_length() + n - 1) // n + 1)
    while True:
        nr = ((n - 1) * r + x // r ** (n - 1)) // n
        if nr >= r:
            break
        r = nr
    while r ** n > x:
        r -= 1
    while (r + 1) ** n <= x:
        r += 1
    return r


def gen_diag(n, c, gen_bits):
    """Geometric diagonal d_i = 10^(-c*(i-1)/n) at gen_bits, i = 1..n.

    The base 10^(c/n) comes from an integer n-th root of 10^c scaled by
    2^(n*s), then the sequence is built by repeated multiplication; both
    run 64 bits above gen_bits, so each rounded d_i lands within 1 ulp.
    """
    if n < 2:
        raise DomainError("n must be >= 2")
    dom = BfDomain(gen_bits)
    out = Vector.zeros(dom, n)
    out.set(0, 1)
    if c == 0:
        for i in range(1, n):
            out.set(i, 1)
        return out
    work = PrecisionContext(gen_bits + 64)
    s = gen_bits + 80
    root = int_nth_root(10 ** c << (n * s), n)
    one = bf_from_int(1, work)
    base = bf_div(bf_from_int(root, work), bf_from_int(1 << s, work), work)
    inv = bf_div(one, base, work)
    cur = one
    for i in range(1, n):
        cur = bf_mul(cur, inv, work)
        out.set(i, cur)
    return out


def gen_random_matrix(n, seed, gen_bits):
    """n x n matrix of uniform [-1, 1) entries, filled row-major."""
    if n < 2:
        raise DomainError("n must be >= 2")
    dom = BfDomain(gen_bits)
    rng = Xoshiro256StarStar(seed)
    A = DenseMatrix.zeros(dom, n, n)
    for i in range(n):
        row = A.data[i]
        for j in range(n):
            row[j] = dom.coerce(rng.uniform())
    return A


def _verify(A, x, b, gen_bits):
    # recompute A*x_true with right-to-left accumulation 32 bits above
    # gen_bits; agreement within 2^-(gen_bits-10) of the row magnitude
    # certifies the construction
    ctx = PrecisionContext(gen_bits + 32)
    n = A.rows
    zero = bf_from_int(0, ctx)
    for i in range(n):
        row = A.data[i]
        acc = zero
        mag = zero
        for j in range(n - 1, -1, -1):
            t = bf_mul(row[j], x.data[j], ctx)
            acc = bf_add(acc, t, ctx)
            mag = bf_add(mag, bf_abs(t), ctx)
        err = bf_abs(bf_sub(acc, b.data[i], ctx))
        lim = bf_mul(mag, _two_pow(10 - gen_bits, ctx), ctx)
        if mag.sign != 0 and bf_cmp(err, lim) > 0:
            raise GenerationError(
                "construction residual exceeds 2^-(gen_bits-10) at row %d" % i)


def _two_pow(e, ctx):
    return BigFloat(1, 1, e, ctx.p)


def build_system(spec):
    """Generate the full system per the module recipe.

    R^-1 comes from one LU factorization of R plus n solves against
    identity columns; D is applied to R^-1 as row scaling; A = R*(D*R^-1).
    A singular R (exactly zero pivot) triggers a retry with seed+1, at
    most 8 times, after which GenerationError is raised. The returned
    record carries the seed that actually produced R.
    """
    n, gen_bits = spec.n, spec.gen_bits
    dom = BfDomain(gen_bits)
    seed = spec.seed
    for _ in range(9):
        R = gen_random_matrix(n, seed, gen_bits)
        lu = R.copy()
        try:
            piv = lu_factor_pp(lu)
        except SingularMatrixError:
            seed = (seed + 1) & _M64
            continue
        break
    else:
        raise GenerationError(
            "no invertible R found in 9 attempts from seed %d" % spec.seed)

    rinv = DenseMatrix.zeros(dom, n, n)
    for i in range(n):
        e = Vector.zeros(dom, n)
        e.set(i, 1)
        col = lu_solve(lu, piv, e)
        for r in range(n):
            rinv.data[r][i] = col.data[r]

    d = gen_diag(n, spec.cond_exponent, gen_bits)
    ctx = dom.ctx
    for i in range(n):
        di = d.data[i]
        row = rinv.data[i]
        for j in range(n):
            row[j] = bf_mul(di, row[j], ctx)

    A = mat_mul_blocked(R, rinv)
    x_true = Vector.from_values(dom, range(n))
    b = mat_vec(A, x_true)
    _verify(A, x_true, b, gen_bits)
    return GeneratedSystem(A=A, b=b, x_true=x_true, spec=spec, seed_used=seed)
