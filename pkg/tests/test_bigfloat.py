"""BigFloat engine versus hardware binary64 and exact rational oracles."""

import math
import random
from fractions import Fraction

import pytest

from mpcore.bigfloat import (
    BigFloat,
    PrecisionContext,
    bf_abs,
    bf_add,
    bf_cmp,
    bf_div,
    bf_format_decimal,
    bf_format_hex,
    bf_from_binary64,
    bf_from_int,
    bf_from_multicomp,
    bf_mul,
    bf_neg,
    bf_parse_decimal,
    bf_parse_hex,
    bf_sqrt,
    bf_sub,
    bf_to_binary64,
    bf_to_multicomp,
)
from mpcore.errors import (
    ArithmeticOverflowError,
    DivideByZeroError,
    DomainError,
    ParseError,
)
from mpcore.mcfloat import MultiComp

C53 = PrecisionContext(53)
C106 = PrecisionContext(106)
C424 = PrecisionContext(424)


def frac(a):
    """Exact rational value of a BigFloat."""
    if a.sign == 0:
        return Fraction(0)
    v = Fraction(a.man) * Fraction(2) ** a.exp
    return v if a.sign > 0 else -v


def exact_exp(x):
    n, d = abs(x.numerator), x.denominator
    e = n.bit_length() - d.bit_length()
    if (n >> e if e >= 0 else n << -e) >= d:
        e += 1
    return e


def half_ulp(x, p):
    return Fraction(2) ** (exact_exp(x) - p - 1)


def rand_doubles(rng, count, emin=-300, emax=300):
    for _ in range(count):
        yield rng.uniform(-1.0, 1.0) * 2.0 ** rng.randint(emin, emax)


# ---------------------------------------------------------------------------
# hardware as the 53-bit correct-rounding reference
# ---------------------------------------------------------------------------

def test_add_matches_hardware_at_53():
    rng = random.Random(500)
    for _ in range(3000):
        x = rng.uniform(-1.0, 1.0) * 2.0 ** rng.randint(-60, 60)
        y = rng.uniform(-1.0, 1.0) * 2.0 ** rng.randint(-60, 60)
        got = bf_to_binary64(bf_add(bf_from_binary64(x),
                                    bf_from_binary64(y), C53))
        assert got == x + y


def test_mul_div_match_hardware_at_53():
    rng = random.Random(501)
    for _ in range(3000):
        x = rng.uniform(-1.0, 1.0) * 2.0 ** rng.randint(-60, 60)
        y = rng.uniform(-1.0, 1.0) * 2.0 ** rng.randint(-60, 60)
        bx, by = bf_from_binary64(x), bf_from_binary64(y)
        assert bf_to_binary64(bf_mul(bx, by, C53)) == x * y
        if y != 0.0:
            assert bf_to_binary64(bf_div(bx, by, C53)) == x / y


def test_sqrt_matches_hardware_at_53():
    rng = random.Random(502)
    for _ in range(2000):
        x = abs(rng.uniform(0.0, 1.0)) * 2.0 ** rng.randint(-60, 60)
        got = bf_to_binary64(bf_sqrt(bf_from_binary64(x), C53))
        assert got == math.sqrt(x)


# ---------------------------------------------------------------------------
# correct rounding at arbitrary precision via exact rationals
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("p", [64, 106, 159, 212, 424])
def test_add_mul_half_ulp(p):
    rng = random.Random(510 + p)
    ctx = PrecisionContext(p)
    for _ in range(400):
        a = bf_div(bf_from_int(rng.randint(-10 ** 9, 10 ** 9)),
                   bf_from_int(rng.randint(1, 10 ** 9)), ctx)
        b = bf_div(bf_from_int(rng.randint(-10 ** 9, 10 ** 9)),
                   bf_from_int(rng.randint(1, 10 ** 9)), ctx)
        if a.sign == 0 or b.sign == 0:
            continue
        s = bf_add(a, b, ctx)
        ref = frac(a) + frac(b)
        if ref:
            assert abs(frac(s) - ref) <= half_ulp(ref, p)
        m = bf_mul(a, b, ctx)
        ref = frac(a) * frac(b)
        assert abs(frac(m) - ref) <= half_ulp(ref, p)


@pytest.mark.parametrize("p", [64, 106, 212, 424])
def test_div_half_ulp(p):
    rng = random.Random(520 + p)
    ctx = PrecisionContext(p)
    for _ in range(400):
        a = bf_from_int(rng.randint(-10 ** 12, 10 ** 12))
        b = bf_from_int(rng.randint(1, 10 ** 12))
        q = bf_div(a, b, ctx)
        ref = Fraction(frac(a), frac(b)) if frac(b) else None
        if a.sign == 0:
            assert q.sign == 0
            continue
        assert abs(frac(q) - ref) <= half_ulp(ref, p)


@pytest.mark.parametrize("p", [64, 106, 212, 424])
def test_sqrt_half_ulp_bracket(p):
    # (s - u)^2 < a < (s + u)^2 with u = half ulp proves correct rounding
    # without evaluating the irrational root.
    rng = random.Random(530 + p)
    ctx = PrecisionContext(p)
    for _ in range(300):
        a = bf_from_int(rng.randint(1, 10 ** 15))
        s = bf_sqrt(a, ctx)
        fs, fa = frac(s), frac(a)
        u = half_ulp(fs, p)
        assert (fs - u) ** 2 < fa
        assert fa < (fs + u) ** 2


def test_sub_sticky_direction():
    # 1 - (2^-107 + 2^-200) at 106 bits sits just below the rounding
    # midpoint; a lost sticky bit would pull it to 1.0 via the even tie.
    one = bf_from_int(1)
    b = bf_add(bf_parse_hex("0x1p-107"), bf_parse_hex("0x1p-200"), C424)
    got = bf_sub(one, b, C106)
    want = bf_sub(one, bf_parse_hex("0x1p-106"), PrecisionContext(120))
    assert bf_cmp(got, want) == 0


def test_add_giant_gap_uses_sticky():
    one = bf_from_int(1)
    tiny = bf_parse_hex("0x1p-5000")
    assert bf_cmp(bf_add(one, tiny, C106), one) == 0
    assert bf_cmp(bf_sub(one, tiny, C106), one) == 0
    odd = bf_add(one, bf_parse_hex("0x1p-105"), C106)
    assert bf_cmp(bf_sub(odd, tiny, C106), odd) == 0


def test_exponent_limit_enforced():
    big = bf_parse_hex("0x1p+4611686018427387000")
    with pytest.raises(ArithmeticOverflowError):
        bf_mul(big, big, C53)


def test_zero_and_identity_behaviour():
    z = bf_from_int(0)
    x = bf_parse_decimal("3.25", C106)
    assert bf_cmp(bf_add(z, x, C106), x) == 0
    assert bf_mul(z, x, C106).is_zero()
    with pytest.raises(DivideByZeroError):
        bf_div(x, z, C106)
    with pytest.raises(DomainError):
        bf_sqrt(bf_from_int(-4), C106)
    assert bf_sqrt(z, C106).is_zero()


def test_neg_abs_cmp():
    rng = random.Random(540)
    for x in rand_doubles(rng, 300, -40, 40):
        b = bf_from_binary64(x)
        assert frac(bf_neg(b)) == -Fraction(x)
        assert frac(bf_abs(b)) == abs(Fraction(x))
    for x in rand_doubles(rng, 200, -40, 40):
        y = rng.uniform(-1.0, 1.0) * 2.0 ** rng.randint(-40, 40)
        want = (x > y) - (x < y)
        assert bf_cmp(bf_from_binary64(x), bf_from_binary64(y)) == want


# ---------------------------------------------------------------------------
# conversions
# ---------------------------------------------------------------------------

def test_binary64_round_trip():
    rng = random.Random(550)
    for x in rand_doubles(rng, 1000):
        assert bf_to_binary64(bf_from_binary64(x)) == x


def test_from_binary64_rejects_non_finite():
    for bad in (float("nan"), float("inf")):
        with pytest.raises(DomainError):
            bf_from_binary64(bad)


def test_to_binary64_overflow():
    with pytest.raises(ArithmeticOverflowError):
        bf_to_binary64(bf_parse_hex("0x1p+2000"))


def test_multicomp_round_trip():
    rng = random.Random(551)
    for k in (2, 3, 4):
        ctx = PrecisionContext(53 * k)
        for _ in range(200):
            a = bf_div(bf_from_int(rng.randint(-10 ** 12, 10 ** 12)),
                       bf_from_int(rng.randint(1, 10 ** 12)),
                       PrecisionContext(53 * k + 60))
            mc = bf_to_multicomp(a, k)
            assert isinstance(mc, MultiComp) and mc.k == k
            # heads are exact nearest-binary64 peels
            assert mc.components[0] == bf_to_binary64(a)
            err = abs(sum(Fraction(c) for c in mc.components) - frac(a))
            if frac(a):
                assert err <= abs(frac(a)) * Fraction(2) ** (-53 * k + 1)
            back = bf_from_multicomp(mc, PrecisionContext(53 * k + 60))
            assert frac(back) == sum(Fraction(c) for c in mc.components)


def test_to_multicomp_third_pinned():
    third = bf_div(bf_from_int(1), bf_from_int(3), C424)
    mc = bf_to_multicomp(third, 4)
    assert mc.components[0] == 1.0 / 3.0


# ---------------------------------------------------------------------------
# text round trips
# ---------------------------------------------------------------------------

def test_parse_decimal_correctly_rounded():
    got = bf_parse_decimal("1e-60", C424)
    ref = Fraction(1, 10 ** 60)
    assert abs(frac(got) - ref) <= half_ulp(ref, 424)
    got = bf_parse_decimal("-0.1", C106)
    ref = Fraction(-1, 10)
    assert abs(frac(got) - ref) <= half_ulp(ref, 106)
    assert frac(bf_parse_decimal("12345.6789e4", C106)) == 123456789


def test_parse_decimal_grammar():
    for ok in ("0", "+1", "-2.5", ".5", "3.", "1e9", "2E-3", " 7.25e+2 "):
        bf_parse_decimal(ok, C53)
    for bad in ("", "abc", "1..2", "1e", "e5", "0x10", "1 2", "--1"):
        with pytest.raises(ParseError):
            bf_parse_decimal(bad, C53)


def test_decimal_round_trip():
    rng = random.Random(560)
    for p in (53, 106, 212, 424):
        ctx = PrecisionContext(p)
        digits = math.ceil(p * 0.30103) + 2
        for _ in range(100):
            a = bf_div(bf_from_int(rng.randint(-10 ** 18, 10 ** 18)),
                       bf_from_int(rng.randint(1, 10 ** 18)), ctx)
            text = bf_format_decimal(a, digits)
            back = bf_parse_decimal(text, ctx)
            assert bf_cmp(a, back) == 0, (text, p)


def test_format_decimal_pinned():
    assert bf_format_decimal(bf_from_int(12345), 5) == "1.2345e+4"
    assert bf_format_decimal(bf_from_int(-12345), 2) == "-1.2e+4"
    assert bf_format_decimal(bf_from_int(0), 3) == "0.00e+0"
    assert bf_format_decimal(bf_parse_decimal("0.5", C53), 1) == "5.e-1"
    # carry across a decade: 9.96 at two digits becomes 1.0e+1
    assert bf_format_decimal(bf_parse_decimal("9.96", C53), 2) == "1.0e+1"


def test_hex_round_trip_against_float_hex():
    rng = random.Random(561)
    for x in rand_doubles(rng, 500):
        text = bf_format_hex(bf_from_binary64(x))
        assert float.fromhex(text) == x
        assert bf_to_binary64(bf_parse_hex(text)) == x


def test_hex_format_pinned():
    assert bf_format_hex(bf_from_binary64(1.5)) == "0x1.8p+0"
    assert bf_format_hex(bf_from_binary64(-2.0)) == "-0x1p+1"
    assert bf_format_hex(bf_from_binary64(0.0)) == "0x0.0p+0"
    assert bf_format_hex(bf_from_binary64(17.0)) == "0x1.1p+4"


def test_hex_parse_exact_and_errors():
    a = bf_parse_hex("0x1.fp-3")
    assert frac(a) == Fraction(31, 16) / 8
    assert bf_parse_hex("0x0.0p+0").is_zero()
    for bad in ("", "0x", "1.5", "0x1.5", "0x1p", "0xg.0p+0", "p+3"):
        with pytest.raises(ParseError):
            bf_parse_hex(bad)


def test_parse_hex_rounds_with_context():
    a = bf_parse_hex("0x1.ffffffp+0", PrecisionContext(8))
    # 24 significant bits forced into 8: nearest is 2.0
    assert frac(a) == 2


def test_precision_context_validation():
    with pytest.raises(DomainError):
        PrecisionContext(1)
    assert PrecisionContext(2).p == 2


def test_operator_sugar():
    a = bf_parse_decimal("1.5", C106)
    b = bf_parse_decimal("0.25", C106)
    assert frac(a + b) == Fraction(7, 4)
    assert frac(a - b) == Fraction(5, 4)
    assert frac(a * b) == Fraction(3, 8)
    assert frac(a / b) == 6
    assert frac(-a) == Fraction(-3, 2)
    assert abs(-a) == a
    assert a > b
    assert float(b) == 0.25


def test_int_round_trip():
    rng = random.Random(562)
    for _ in range(300):
        n = rng.randint(-10 ** 30, 10 ** 30)
        assert frac(bf_from_int(n)) == n
