"""Multi-component binary64 arithmetic (double-double, triple-double, quad-double).

A value is carried as k binary64 components c[0] > ... > c[k-1] whose exact sum
is the represented number. k = 2, 3, 4 give roughly 106, 159 and 212 significant
bits. All kernels below are branch-free straight-line sequences built from
error-free transformations, written against the arithmetic operators only, so
the very same code runs on Python floats and on numpy arrays of any shape.
That sharing is what guarantees the scalar and vectorized execution paths agree
bit for bit.

Requires round-to-nearest-even binary64 arithmetic; verified at import.
"""

import math

from .errors import DivideByZeroError, DomainError

__all__ = [
    "PrecisionTag",
    "MultiComp",
    "two_sum",
    "quick_two_sum",
    "two_prod",
    "renormalize",
    "mc_add",
    "mc_sub",
    "mc_mul",
    "mc_div",
    "mc_sqrt",
    "mc_neg",
    "mc_abs",
    "mc_cmp",
    "from_binary64",
    "to_binary64",
]


def _check_rounding_mode():
    # two_sum/two_prod exactness requires round-to-nearest with even ties.
    one = 1.0
    tie = 2.0 ** -53
    if one + tie != one:
        raise RuntimeError("binary64 addition is not rounding ties to even")
    if one + tie * 1.0009765625 == one:
        raise RuntimeError("binary64 addition is not rounding to nearest")


_check_rounding_mode()


# ---------------------------------------------------------------------------
# error-free transformations
# ---------------------------------------------------------------------------

def two_sum(a, b):
    """Error-free addition: returns (s, e) with s = fl(a+b) and s + e = a + b.

    Knuth's branch-free 6-operation form; no ordering requirement on the
    inputs. Exact for all finite operands whose sum does not overflow.
    Accepts floats or same-shape numpy arrays.
    """
    s = a + b
    bb = s - a
    e = (a - (s - bb)) + (b - bb)
    return s, e


def quick_two_sum(a, b):
    """Error-free addition assuming |a| >= |b| or a == 0.

    Three operations instead of six. The precondition is the caller's
    responsibility; outside it the error term is no longer exact.
    """
    s = a + b
    e = b - (s - a)
    return s, e


_SPLIT = 134217729.0  # 2**27 + 1, Dekker splitting constant


def _split(a):
    # Splits a into hi + lo with hi carrying the top 26 bits of significand.
    # Exact for |a| < 2**996 (no overflow in the scaled product).
    t = _SPLIT * a
    hi = t - (t - a)
    lo = a - hi
    return hi, lo


def two_prod(a, b):
    """Error-free multiplication: returns (p, e) with p = fl(a*b), p + e = a*b.

    Dekker's splitting form. Exact when |a|, |b| < 2**996 and a*b neither
    overflows nor falls into the subnormal range. Accepts floats or
    same-shape numpy arrays.
    """
    p = a * b
    ahi, alo = _split(a)
    bhi, blo = _split(b)
    e = ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo
    return p, e


# ---------------------------------------------------------------------------
# renormalization
# ---------------------------------------------------------------------------

def _sweep(terms):
    # One bottom-up two_sum chain. Returns (head, residuals); the head plus
    # the residual terms carry exactly the same sum as the input terms.
    s = terms[-1]
    rest = [None] * (len(terms) - 1)
    for i in range(len(terms) - 2, -1, -1):
        s, e = two_sum(terms[i], s)
        rest[i] = e
    return s, rest


def _cascade(terms, k):
    # Peels k heads off the term list, one exact sweep per component. Only
    # the residuals of the final sweep are discarded, so nothing is rounded
    # away before the last component has been extracted.
    comps = []
    work = terms
    for _ in range(k - 1):
        head, work = _sweep(work)
        comps.append(head)
    head, _ = _sweep(work)
    comps.append(head)
    return comps


def _compress(comps):
    # Top-down quick_two_sum polish restoring |c[i+1]| <= 0.5 ulp(c[i]) after
    # a cascade, and lifting values past a zero head.
    out = []
    carry = comps[0]
    for i in range(1, len(comps)):
        s, carry = quick_two_sum(carry, comps[i])
        out.append(s)
    out.append(carry)
    return out


def renormalize(raw, k):
    """Compress arbitrary binary64 terms into k canonical components.

    Parameters
    ----------
    raw : sequence of float
        Terms whose exact sum is the value to represent. Any length >= 1 is
        accepted (short inputs are zero padded). No ordering is assumed.
    k : int
        Component count, 2 <= k <= 4.

    Returns a tuple of k floats summing to within one ulp of the last
    component of the exact input sum. Running it on an already canonical
    value returns the same components.
    """
    if k not in (2, 3, 4):
        raise DomainError("component count must be 2, 3 or 4, got %r" % (k,))
    terms = [float(t) for t in raw]
    if not terms:
        raise DomainError("renormalize needs at least one term")
    for t in terms:
        if not math.isfinite(t):
            raise DomainError("non-finite term %r" % (t,))
    while len(terms) < k:
        terms.append(0.0)
    # First round keeps two guard components so the final truncation drops
    # at most half an ulp of the last kept component even for long inputs;
    # the second round folds the guards away.
    j = min(len(terms), k + 2)
    comps = _cascade(terms, j)
    if j > k:
        comps = _cascade(comps, k)
    return tuple(_compress(comps))


# ---------------------------------------------------------------------------
# fixed-width kernels
#
# Every kernel is a fixed straight-line EFT sequence followed by the cascade
# and a compress polish. Error budgets in the comments are relative to the
# exact result magnitude; targets are 2^-99 (k=2), 2^-152 (k=3), 2^-205 (k=4).
# ---------------------------------------------------------------------------

def _add2(a0, a1, b0, b1):
    # Classic accurate double-double sum, error bound ~3*2^-106.
    s0, e0 = two_sum(a0, b0)
    s1, e1 = two_sum(a1, b1)
    e0 = e0 + s1
    s0, e0 = quick_two_sum(s0, e0)
    e0 = e0 + e1
    s0, e0 = quick_two_sum(s0, e0)
    return s0, e0


def _mul2(a0, a1, b0, b1):
    # Classic accurate double-double product, error bound ~5*2^-106.
    p, e = two_prod(a0, b0)
    e = e + (a0 * b1 + a1 * b0)
    return quick_two_sum(p, e)


def _add3(a0, a1, a2, b0, b1, b2):
    # Componentwise exact sums, then cascade. All six partial terms are kept
    # exact, so the only error is the final truncation: ~2^-155 worst case.
    s0, e0 = two_sum(a0, b0)
    s1, e1 = two_sum(a1, b1)
    s2, e2 = two_sum(a2, b2)
    c = _cascade([s0, s1, e0, s2, e1, e2], 3)
    return tuple(_compress(c))


def _mul3(a0, a1, a2, b0, b1, b2):
    # Exact products through level 2 (partial index sum i+j), level 3 folded
    # in working precision. Budget: folded roundings ~2^-209, dropped a2*b2
    # ~2^-212, truncation ~2^-212; total far inside 2^-152.
    p00, q00 = two_prod(a0, b0)
    p01, q01 = two_prod(a0, b1)
    p10, q10 = two_prod(a1, b0)
    p02, q02 = two_prod(a0, b2)
    p11, q11 = two_prod(a1, b1)
    p20, q20 = two_prod(a2, b0)
    t3 = (q02 + q11 + q20) + (a1 * b2 + a2 * b1)
    c = _cascade([p00, p01, p10, q00, p02, p11, p20, q01, q10, t3], 3)
    return tuple(_compress(c))


def _add4(a0, a1, a2, a3, b0, b1, b2, b3):
    # Componentwise exact sums; the deepest error term e3 sits at ~2^-212
    # relative and is kept anyway (it is already paid for). Truncation
    # ~2^-213; total well inside 2^-205.
    s0, e0 = two_sum(a0, b0)
    s1, e1 = two_sum(a1, b1)
    s2, e2 = two_sum(a2, b2)
    s3, e3 = two_sum(a3, b3)
    c = _cascade([s0, s1, e0, s2, e1, s3, e2, e3], 4)
    return tuple(_compress(c))


def _mul4(a0, a1, a2, a3, b0, b1, b2, b3):
    # Exact products through level 2; level-3 products and the level-2
    # product errors are folded in working precision (roundings ~2^-211),
    # level-4 products dropped (~2^-210). Total ~2^-209 against a 2^-205
    # target.
    p00, q00 = two_prod(a0, b0)
    p01, q01 = two_prod(a0, b1)
    p10, q10 = two_prod(a1, b0)
    p02, q02 = two_prod(a0, b2)
    p11, q11 = two_prod(a1, b1)
    p20, q20 = two_prod(a2, b0)
    t3 = (q02 + q11 + q20) + ((a0 * b3 + a3 * b0) + (a1 * b2 + a2 * b1))
    c = _cascade([p00, p01, p10, q00, p02, p11, p20, q01, q10, t3], 4)
    return tuple(_compress(c))


def _neg(comps):
    return tuple(-c for c in comps)


_ADD = {2: _add2, 3: _add3, 4: _add4}
_MUL = {2: _mul2, 3: _mul3, 4: _mul4}


def kernel_add(k):
    """Componentwise-argument addition kernel for width k (floats or arrays)."""
    return _ADD[k]


def kernel_mul(k):
    """Componentwise-argument multiplication kernel for width k."""
    return _MUL[k]


def _add_t(a, b, k):
    return _ADD[k](*a, *b)


def _mul_t(a, b, k):
    return _MUL[k](*a, *b)


def _mul_scalar_t(a, x, k):
    # Product of a k-component value with one binary64. Every partial product
    # is exact; only the cascade truncates.
    terms = []
    tails = []
    for c in a:
        p, q = two_prod(c, x)
        terms.append(p)
        tails.append(q)
    c = _cascade(terms + tails, k)
    return tuple(_compress(c))


def _is_zero_t(a):
    # Canonical form puts the whole value in the head when it is zero.
    return a[0] == 0.0


def _div_t(a, b, k):
    # Long division: k+1 head-quotient digits, each followed by an exact-ish
    # remainder update in full k-component arithmetic, then one compression.
    # Meets a <= 2 ulp error contract (checked against the big-float oracle).
    if _is_zero_t(b):
        raise DivideByZeroError("division by zero")
    digits = []
    r = a
    for i in range(k + 1):
        qi = r[0] / b[0]
        digits.append(qi)
        if i < k:
            r = _add_t(r, _neg(_mul_scalar_t(b, qi, k)), k)
    c = _cascade(digits, k)
    return tuple(_compress(c))


_SQRT_STEPS = {2: 2, 3: 2, 4: 3}


def _sqrt_t(a, k):
    if a[0] < 0.0:
        raise DomainError("square root of a negative value")
    if _is_zero_t(a):
        return (0.0,) * k
    one = (1.0,) + (0.0,) * (k - 1)
    # Newton on y ~ 1/sqrt(a): y <- y + y*(1 - a*y^2)/2, quadratic, seeded
    # from binary64. Steps chosen so the last iterate exceeds k*53 bits.
    y = (1.0 / math.sqrt(a[0]),) + (0.0,) * (k - 1)
    for _ in range(_SQRT_STEPS[k]):
        ayy = _mul_t(a, _mul_t(y, y, k), k)
        r = _add_t(one, _neg(ayy), k)
        y = _add_t(y, _mul_scalar_t(_mul_t(y, r, k), 0.5, k), k)
    s = _mul_t(a, y, k)
    # One Heron correction: s <- s + (a - s^2) * (y/2).
    e = _add_t(a, _neg(_mul_t(s, s, k)), k)
    return _add_t(s, _mul_t(e, _mul_scalar_t(y, 0.5, k), k), k)


def _cmp_t(a, b):
    # Exact comparison. A correctly rounded sum of the joint term list has
    # the sign of the exact difference (a nonzero sum of binary64 terms is
    # at least 2^-1074 in magnitude, which never rounds to zero).
    terms = list(a) + [-c for c in b]
    try:
        s = math.fsum(terms)
    except OverflowError:
        # Only reachable when the difference exceeds the binary64 range;
        # rescaling is then sign-safe even if it flushes subnormal terms.
        s = math.fsum(t * 2.0 ** -60 for t in terms)
    return (s > 0.0) - (s < 0.0)


# ---------------------------------------------------------------------------
# tagged widths and the value type
# ---------------------------------------------------------------------------

class PrecisionTag:
    """Named multi-component width: DD (k=2), TD (k=3), QD (k=4).

    bits is the significand budget 53*k; rel_bound is the guaranteed
    relative error envelope of one arithmetic operation at that width.
    """

    __slots__ = ("name", "k", "bits", "rel_bound")
    _REGISTRY = {}

    def __init__(self, name, k, rel_exp):
        self.name = name
        self.k = k
        self.bits = 53 * k
        self.rel_bound = 2.0 ** rel_exp

    def __repr__(self):
        return "PrecisionTag(%s)" % self.name

    @classmethod
    def from_name(cls, name):
        try:
            return cls._REGISTRY[name.lower()]
        except KeyError:
            raise DomainError("unknown precision tag %r" % (name,)) from None

    @classmethod
    def from_k(cls, k):
        for tag in cls._REGISTRY.values():
            if tag.k == k:
                return tag
        raise DomainError("unknown component count %r" % (k,))


DD = PrecisionTag("dd", 2, -99)
TD = PrecisionTag("td", 3, -152)
QD = PrecisionTag("qd", 4, -205)
PrecisionTag._REGISTRY = {"dd": DD, "td": TD, "qd": QD}
PrecisionTag.DD = DD
PrecisionTag.TD = TD
PrecisionTag.QD = QD


def _validate_components(comps):
    if comps[0] == 0.0:
        for c in comps:
            if c != 0.0:
                raise DomainError("zero head with nonzero tail %r" % (comps,))
        return
    for i in range(len(comps) - 1):
        if abs(comps[i + 1]) > 0.5 * math.ulp(comps[i]):
            raise DomainError(
                "components overlap at position %d: %r" % (i, comps))


class MultiComp:
    """One multi-component value: an ordered tuple of k binary64 components.

    Canonical form: components do not overlap (|c[i+1]| <= 0.5 ulp(c[i])),
    no component is NaN or infinite, and a zero value is all zeros. The
    constructor checks this; use from_terms to build from unnormalized data.
    """

    __slots__ = ("components", "k")

    def __init__(self, components, validate=True):
        comps = tuple(float(c) for c in components)
        if len(comps) not in (2, 3, 4):
            raise DomainError("component count must be 2, 3 or 4")
        if validate:
            for c in comps:
                if not math.isfinite(c):
                    raise DomainError("non-finite component %r" % (c,))
            _validate_components(comps)
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "k", len(comps))

    def __setattr__(self, name, value):
        raise AttributeError("MultiComp is immutable")

    @classmethod
    def from_terms(cls, raw, k):
        """Renormalize arbitrary terms into a canonical k-component value."""
        return cls(renormalize(raw, k), validate=False)

    @property
    def tag(self):
        return PrecisionTag.from_k(self.k)

    def __repr__(self):
        return "MultiComp(%s)" % (", ".join(repr(c) for c in self.components))

    def __float__(self):
        return self.components[0]

    def _coerce(self, other):
        if isinstance(other, MultiComp):
            if other.k != self.k:
                raise DomainError("mixed component widths %d and %d"
                                  % (self.k, other.k))
            return other
        if isinstance(other, (int, float)):
            return from_binary64(float(other), self.k)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return mc_add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return mc_sub(self, other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return mc_sub(other, self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return mc_mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return mc_div(self, other)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return mc_div(other, self)

    def __neg__(self):
        return mc_neg(self)

    def __abs__(self):
        return mc_abs(self)

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return mc_cmp(self, other) == 0

    def __ne__(self, other):
        eq = self.__eq__(other)
        if eq is NotImplemented:
            return eq
        return not eq

    def __lt__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return mc_cmp(self, other) < 0

    def __le__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return mc_cmp(self, other) <= 0

    def __gt__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return mc_cmp(self, other) > 0

    def __ge__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return mc_cmp(self, other) >= 0

    def __hash__(self):
        # Equal values can in principle have distinct component splits only
        # off canonical form; canonical values hash by components.
        return hash(self.components)


def _same_width(a, b):
    if a.k != b.k:
        raise DomainError("mixed component widths %d and %d" % (a.k, b.k))
    return a.k


def _wrap(comps, k):
    for c in comps:
        if not math.isfinite(c):
            from .errors import ArithmeticOverflowError
            raise ArithmeticOverflowError(
                "multi-component result left the binary64 range")
    return MultiComp(comps, validate=False)


def mc_add(a, b):
    """Sum of two equal-width values, relative error within the width's envelope."""
    k = _same_width(a, b)
    return _wrap(_add_t(a.components, b.components, k), k)


def mc_sub(a, b):
    """Difference a - b; negation is exact so this shares the add kernel."""
    k = _same_width(a, b)
    return _wrap(_add_t(a.components, _neg(b.components), k), k)


def mc_mul(a, b):
    """Product of two equal-width values, relative error within the envelope."""
    k = _same_width(a, b)
    return _wrap(_mul_t(a.components, b.components, k), k)


def mc_div(a, b):
    """Quotient a / b, within 2 ulps of the k-component format.

    Raises DivideByZeroError when b is exactly zero.
    """
    k = _same_width(a, b)
    return _wrap(_div_t(a.components, b.components, k), k)


def mc_sqrt(a):
    """Square root, within 4 ulps of the k-component format.

    Raises DomainError for negative input; sqrt(0) is exactly zero.
    """
    return _wrap(_sqrt_t(a.components, a.k), a.k)


def mc_neg(a):
    """Exact negation."""
    return MultiComp(_neg(a.components), validate=False)


def mc_abs(a):
    """Exact absolute value (negates all components when the head is negative)."""
    if a.components[0] < 0.0:
        return mc_neg(a)
    return a


def mc_cmp(a, b):
    """Exact three-way comparison of the represented values: -1, 0 or 1."""
    _same_width(a, b)
    return _cmp_t(a.components, b.components)


def from_binary64(x, k):
    """Exact widening of one binary64 into k components.

    NaN and infinities are rejected with DomainError.
    """
    x = float(x)
    if not math.isfinite(x):
        raise DomainError("cannot widen non-finite value %r" % (x,))
    return MultiComp((x,) + (0.0,) * (k - 1), validate=False)


def to_binary64(a):
    """Nearest binary64: the head component, exact by canonical form."""
    return a.components[0]
