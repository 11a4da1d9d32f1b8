"""Correctly rounded binary floating point of arbitrary precision.

A value is sign * man * 2**exp with a positive odd integer mantissa (zero is
sign == 0). Every operation rounds once, to nearest with even ties, at the
precision of the supplied context: add/sub/mul form the exact integer result
first; div and sqrt carry two guard bits plus a sticky bit derived from the
exact remainder, which makes them correctly rounded as well. Exponents are
limited to +-2**62; leaving that range raises ArithmeticOverflowError.

Integer limb arithmetic (shifts, adds, multiplies, divmod, isqrt) is
delegated to the platform's arbitrary-precision integers; everything
floating-point (alignment, normalization, rounding, guard/sticky logic)
lives here.
"""

import math
import re

from .errors import (
    ArithmeticOverflowError,
    DivideByZeroError,
    DomainError,
    ParseError,
)
from .mcfloat import MultiComp

__all__ = [
    "PrecisionContext",
    "BigFloat",
    "bf_add",
    "bf_sub",
    "bf_mul",
    "bf_div",
    "bf_sqrt",
    "bf_neg",
    "bf_abs",
    "bf_cmp",
    "bf_from_int",
    "bf_from_binary64",
    "bf_to_binary64",
    "bf_from_multicomp",
    "bf_to_multicomp",
    "bf_parse_decimal",
    "bf_format_decimal",
    "bf_parse_hex",
    "bf_format_hex",
]

_EXP_LIMIT = 1 << 62


class PrecisionContext:
    """Target precision for one operation: the significand width in bits."""

    __slots__ = ("p",)

    def __init__(self, p):
        p = int(p)
        if p < 2:
            raise DomainError("precision must be at least 2 bits, got %d" % p)
        self.p = p

    def __repr__(self):
        return "PrecisionContext(%d)" % self.p

    def __eq__(self, other):
        return isinstance(other, PrecisionContext) and other.p == self.p

    def __hash__(self):
        return hash(("PrecisionContext", self.p))


class BigFloat:
    """One arbitrary-precision binary float; treat instances as immutable.

    prec records the precision the value was last rounded to; it is carried
    for bookkeeping and ignored by comparisons and hashing.
    """

    __slots__ = ("sign", "man", "exp", "prec")

    def __init__(self, sign, man, exp, prec):
        self.sign = sign
        self.man = man
        self.exp = exp
        self.prec = prec

    def is_zero(self):
        return self.sign == 0

    def _ctx(self, other):
        return PrecisionContext(max(self.prec, other.prec))

    def __repr__(self):
        return "BigFloat(%s, prec=%d)" % (bf_format_hex(self), self.prec)

    def __add__(self, other):
        if not isinstance(other, BigFloat):
            return NotImplemented
        return bf_add(self, other, self._ctx(other))

    def __sub__(self, other):
        if not isinstance(other, BigFloat):
            return NotImplemented
        return bf_sub(self, other, self._ctx(other))

    def __mul__(self, other):
        if not isinstance(other, BigFloat):
            return NotImplemented
        return bf_mul(self, other, self._ctx(other))

    def __truediv__(self, other):
        if not isinstance(other, BigFloat):
            return NotImplemented
        return bf_div(self, other, self._ctx(other))

    def __neg__(self):
        return bf_neg(self)

    def __abs__(self):
        return bf_abs(self)

    def __float__(self):
        return bf_to_binary64(self)

    def __eq__(self, other):
        if not isinstance(other, BigFloat):
            return NotImplemented
        return bf_cmp(self, other) == 0

    def __ne__(self, other):
        eq = self.__eq__(other)
        if eq is NotImplemented:
            return eq
        return not eq

    def __lt__(self, other):
        if not isinstance(other, BigFloat):
            return NotImplemented
        return bf_cmp(self, other) < 0

    def __le__(self, other):
        if not isinstance(other, BigFloat):
            return NotImplemented
        return bf_cmp(self, other) <= 0

    def __gt__(self, other):
        if not isinstance(other, BigFloat):
            return NotImplemented
        return bf_cmp(self, other) > 0

    def __ge__(self, other):
        if not isinstance(other, BigFloat):
            return NotImplemented
        return bf_cmp(self, other) >= 0

    def __hash__(self):
        return hash((self.sign, self.man, self.exp))


def _zero(p):
    return BigFloat(0, 0, 0, p)


def _strip(man, exp):
    # man > 0: shift out trailing zero bits so the mantissa is odd.
    tz = (man & -man).bit_length() - 1
    if tz:
        return man >> tz, exp + tz
    return man, exp


def _round_to(man, exp, p):
    # man > 0: round to p bits, half to even. Returns an odd mantissa.
    excess = man.bit_length() - p
    if excess > 0:
        rem = man & ((1 << excess) - 1)
        man >>= excess
        exp += excess
        if rem:
            half = 1 << (excess - 1)
            if rem > half or (rem == half and (man & 1)):
                man += 1
                if man.bit_length() > p:
                    man >>= 1
                    exp += 1
    return _strip(man, exp)


def _mk(sign, man, exp, p):
    # Final constructor: rounds, strips, and enforces the exponent range.
    if man == 0:
        return _zero(p)
    man, exp = _round_to(man, exp, p)
    top = exp + man.bit_length()
    if top > _EXP_LIMIT or top < -_EXP_LIMIT:
        raise ArithmeticOverflowError(
            "BigFloat exponent %d exceeds +-2**62" % top)
    return BigFloat(sign, man, exp, p)


def _round_bf(a, p):
    if a.sign == 0:
        return _zero(p)
    if a.man.bit_length() <= p:
        if a.prec == p:
            return a
        return BigFloat(a.sign, a.man, a.exp, p)
    return _mk(a.sign, a.man, a.exp, p)


def _add_signed(sa, ma, ea, sb, mb, eb, p):
    # Both operands nonzero, ea >= eb. p is None for an exact result.
    shift = ea - eb
    if p is not None and shift > p + 4 + mb.bit_length():
        # The small operand is entirely below the rounding position: fold it
        # into a sticky unit two guard bits down, which rounds identically.
        g = p + 4
        man = (ma << g) + (1 if sa == sb else -1)
        return _mk(sa, man, ea - g, p)
    if sa == sb:
        man = (ma << shift) + mb
        sign = sa
    else:
        man = (ma << shift) - mb
        if man == 0:
            return _zero(p if p is not None else max(ma.bit_length(), 1))
        if man > 0:
            sign = sa
        else:
            sign = -sa
            man = -man
    if p is None:
        man, exp = _strip(man, eb)
        return BigFloat(sign, man, exp, man.bit_length())
    return _mk(sign, man, eb, p)


def bf_add(a, b, ctx):
    """Correctly rounded a + b at ctx precision."""
    p = ctx.p
    if a.sign == 0:
        return _round_bf(b, p)
    if b.sign == 0:
        return _round_bf(a, p)
    if a.exp >= b.exp:
        return _add_signed(a.sign, a.man, a.exp, b.sign, b.man, b.exp, p)
    return _add_signed(b.sign, b.man, b.exp, a.sign, a.man, a.exp, p)


def bf_sub(a, b, ctx):
    """Correctly rounded a - b at ctx precision."""
    p = ctx.p
    if b.sign == 0:
        return _round_bf(a, p)
    if a.sign == 0:
        return _mk(-b.sign, b.man, b.exp, p)
    if a.exp >= b.exp:
        return _add_signed(a.sign, a.man, a.exp, -b.sign, b.man, b.exp, p)
    return _add_signed(-b.sign, b.man, b.exp, a.sign, a.man, a.exp, p)


def _add_exact(a, b):
    # Exact sum, no rounding (mantissa grows as needed).
    if a.sign == 0:
        return b
    if b.sign == 0:
        return a
    if a.exp >= b.exp:
        return _add_signed(a.sign, a.man, a.exp, b.sign, b.man, b.exp, None)
    return _add_signed(b.sign, b.man, b.exp, a.sign, a.man, a.exp, None)


def bf_mul(a, b, ctx):
    """Correctly rounded a * b at ctx precision."""
    if a.sign == 0 or b.sign == 0:
        return _zero(ctx.p)
    return _mk(a.sign * b.sign, a.man * b.man, a.exp + b.exp, ctx.p)


def _round_ratio(sign, num, den, exp, p):
    # Correctly rounded sign * (num/den) * 2**exp: take p+2 quotient bits,
    # then let a sticky bit carry the inexactness of the remainder.
    shift = p + 2 - (num.bit_length() - den.bit_length())
    if shift < 0:
        shift = 0
    q, r = divmod(num << shift, den)
    exp -= shift
    if r:
        q = (q << 1) | 1
        exp -= 1
    return _mk(sign, q, exp, p)


def bf_div(a, b, ctx):
    """Correctly rounded a / b at ctx precision."""
    if b.sign == 0:
        raise DivideByZeroError("division by zero")
    if a.sign == 0:
        return _zero(ctx.p)
    return _round_ratio(a.sign * b.sign, a.man, b.man,
                        a.exp - b.exp, ctx.p)


def bf_sqrt(a, ctx):
    """Correctly rounded square root at ctx precision.

    Negative input raises DomainError; sqrt(0) is zero.
    """
    if a.sign < 0:
        raise DomainError("square root of a negative value")
    if a.sign == 0:
        return _zero(ctx.p)
    p = ctx.p
    shift = 2 * (p + 2) - a.man.bit_length()
    if shift < 0:
        shift = 0
    if (a.exp - shift) & 1:
        shift += 1
    m2 = a.man << shift
    s = math.isqrt(m2)
    exp = (a.exp - shift) >> 1
    if s * s != m2:
        s = (s << 1) | 1
        exp -= 1
    return _mk(1, s, exp, p)


def bf_neg(a):
    """Exact negation (keeps the operand's precision tag)."""
    return BigFloat(-a.sign, a.man, a.exp, a.prec)


def bf_abs(a):
    """Exact absolute value."""
    if a.sign >= 0:
        return a
    return BigFloat(1, a.man, a.exp, a.prec)


def bf_cmp(a, b):
    """Exact three-way comparison: -1, 0 or 1."""
    if a.sign != b.sign:
        return 1 if a.sign > b.sign else -1
    if a.sign == 0:
        return 0
    # Same nonzero sign: compare binades first, then aligned mantissas.
    ta = a.exp + a.man.bit_length()
    tb = b.exp + b.man.bit_length()
    if ta != tb:
        mag = 1 if ta > tb else -1
        return mag * a.sign
    shift = a.exp - b.exp
    if shift >= 0:
        d = (a.man << shift) - b.man
    else:
        d = a.man - (b.man << -shift)
    if d == 0:
        return 0
    return a.sign if d > 0 else -a.sign


def bf_from_int(n, ctx=None):
    """Exact conversion from int (rounded only if a context is given)."""
    n = int(n)
    if n == 0:
        return _zero(ctx.p if ctx else 2)
    sign = 1 if n > 0 else -1
    man, exp = _strip(abs(n), 0)
    if ctx is None:
        return BigFloat(sign, man, exp, man.bit_length())
    return _mk(sign, man, exp, ctx.p)


def bf_from_binary64(x):
    """Exact conversion from binary64; NaN and infinities are rejected."""
    x = float(x)
    if not math.isfinite(x):
        raise DomainError("cannot convert non-finite value %r" % (x,))
    if x == 0.0:
        return _zero(53)
    sign = 1 if x > 0.0 else -1
    frac, e = math.frexp(abs(x))
    man = int(frac * 9007199254740992.0)  # 2**53, exact
    man, exp = _strip(man, e - 53)
    return BigFloat(sign, man, exp, 53)


def bf_to_binary64(a):
    """Nearest binary64. Raises ArithmeticOverflowError outside its range."""
    if a.sign == 0:
        return 0.0
    man, exp = _round_to(a.man, a.exp, 53)
    try:
        r = math.ldexp(float(man), exp)
    except OverflowError:
        raise ArithmeticOverflowError(
            "value does not fit in binary64") from None
    if math.isinf(r):
        raise ArithmeticOverflowError("value does not fit in binary64")
    return -r if a.sign < 0 else r


def bf_from_multicomp(m, ctx=None):
    """Exact sum of the components, rounded once to ctx precision.

    With ctx=None the sum is kept exact (components are dyadic, so it
    always has a finite representation).
    """
    acc = _zero(53 if ctx is None else ctx.p)
    for c in m.components:
        if c != 0.0:
            acc = _add_exact(acc, bf_from_binary64(c))
    if ctx is None:
        return acc
    return _round_bf(acc, ctx.p)


def bf_to_multicomp(a, k):
    """Nearest k-component value: peel k rounded binary64 heads.

    Produces the canonical form directly (each tail is the exact remainder
    of the previous head).
    """
    comps = []
    r = a
    for _ in range(k):
        c = bf_to_binary64(r)
        comps.append(c)
        if c != 0.0:
            r = _add_exact(r, bf_neg(bf_from_binary64(c)))
    return MultiComp(comps, validate=False)


# ---------------------------------------------------------------------------
# text formats
# ---------------------------------------------------------------------------

_DEC_RE = re.compile(
    r"^([+-]?)(?:(\d+)(?:\.(\d*))?|\.(\d+))(?:[eE]([+-]?\d+))?$")
_HEX_RE = re.compile(
    r"^([+-]?)0[xX]([0-9a-fA-F]+)(?:\.([0-9a-fA-F]*))?[pP]([+-]?\d+)$")


def bf_parse_decimal(text, ctx):
    """Parse a decimal literal, correctly rounded to ctx precision.

    Grammar: optional sign, digits with an optional fractional part (or a
    bare fractional part), optional e/E exponent. Anything else raises
    ParseError.
    """
    m = _DEC_RE.match(text.strip())
    if not m:
        raise ParseError("malformed decimal literal %r" % (text,))
    sign_s, int_s, frac_s, bare_frac_s, exp_s = m.groups()
    if bare_frac_s is not None:
        int_s, frac_s = "", bare_frac_s
    frac_s = frac_s or ""
    digits = (int_s or "") + frac_s
    d = int(digits) if digits else 0
    if d == 0:
        return _zero(ctx.p)
    sign = -1 if sign_s == "-" else 1
    e10 = (int(exp_s) if exp_s else 0) - len(frac_s)
    if e10 >= 0:
        return _mk(sign, d * 10 ** e10, 0, ctx.p)
    return _round_ratio(sign, d, 10 ** -e10, 0, ctx.p)


def _rn_int(num, den):
    # Round num/den (both > 0) to the nearest integer, half to even.
    q, r = divmod(num, den)
    r2 = r << 1
    if r2 > den or (r2 == den and q & 1):
        q += 1
    return q


def _scaled_digits(a, t):
    # Nearest integer to |a| * 10**t.
    num = a.man
    den = 1
    if t >= 0:
        num *= 10 ** t
    else:
        den = 10 ** -t
    if a.exp >= 0:
        num <<= a.exp
    else:
        den <<= -a.exp
    return _rn_int(num, den)


def bf_format_decimal(a, digits=None):
    """Scientific-notation decimal string d.dd...e(+-)X with the given
    number of significant digits (default: enough to round-trip a.prec).
    """
    if digits is None:
        digits = int(math.ceil(a.prec * 0.3010299956639812)) + 2
    if digits < 1:
        raise DomainError("need at least one digit")
    if a.sign == 0:
        frac = "0" * (digits - 1)
        return "0." + frac + "e+0" if frac else "0.e+0"
    # First guess of the decimal exponent from the binade, then correct.
    top = a.exp + a.man.bit_length()
    d_exp = math.floor(top * 0.30102999566398114)
    for _ in range(4):
        scaled = _scaled_digits(a, digits - 1 - d_exp)
        lo, hi = 10 ** (digits - 1), 10 ** digits
        if scaled >= hi:
            d_exp += 1
        elif scaled < lo:
            d_exp -= 1
        else:
            break
    s = str(scaled)
    sign_s = "-" if a.sign < 0 else ""
    frac = s[1:]
    return "%s%s.%se%+d" % (sign_s, s[0], frac, d_exp) if frac else \
        "%s%s.e%+d" % (sign_s, s[0], d_exp)


def bf_format_hex(a):
    """Canonical hex form (+-)0x1.<nibbles>p(+-)E; exact and compact."""
    if a.sign == 0:
        return "0x0.0p+0"
    man = a.man
    nbits = man.bit_length() - 1
    e = a.exp + nbits
    sign_s = "-" if a.sign < 0 else ""
    if nbits == 0:
        return "%s0x1p%+d" % (sign_s, e)
    pad = (-nbits) % 4
    frac = (man - (1 << nbits)) << pad
    width = (nbits + pad) // 4
    return "%s0x1.%sp%+d" % (sign_s, format(frac, "0%dx" % width), e)


def bf_parse_hex(text, ctx=None):
    """Parse a hex float literal; exact unless a context forces rounding."""
    m = _HEX_RE.match(text.strip())
    if not m:
        raise ParseError("malformed hex literal %r" % (text,))
    sign_s, int_s, frac_s, exp_s = m.groups()
    frac_s = frac_s or ""
    man = int(int_s + frac_s, 16)
    if man == 0:
        return _zero(ctx.p if ctx else 2)
    sign = -1 if sign_s == "-" else 1
    exp = int(exp_s) - 4 * len(frac_s)
    man, exp = _strip(man, exp)
    if ctx is None:
        return BigFloat(sign, man, exp, man.bit_length())
    return _mk(sign, man, exp, ctx.p)
