"""Iterative refinement behavior tests on the generated benchmark family."""

import pytest

from mpcore.bigfloat import (
    PrecisionContext,
    bf_cmp,
    bf_from_int,
    bf_parse_decimal,
    bf_sub,
    bf_to_binary64,
)
from mpcore.errors import DimensionError, DomainError, SingularMatrixError
from mpcore.linalg import (
    BfDomain,
    DenseMatrix,
    McDomain,
    Vector,
    convert_matrix,
    convert_vector,
    mat_norm_fro,
    mat_vec,
    max_rel_err,
    vec_norm2,
)
from mpcore.refine import (
    RefineConfig,
    RefineReport,
    check_stop,
    iterative_refinement,
)
from mpcore.testgen import ProblemSpec, build_system


def bf(text, bits=212):
    return bf_parse_decimal(text, PrecisionContext(bits))


# ---------------------------------------------------------------------------
# stop test
# ---------------------------------------------------------------------------

def test_check_stop_pinned_threshold():
    # threshold = sqrt(4) * 1e-2 * 10 * 1 + 0 = 0.2
    args = dict(x_norm=bf("1"), a_fro=bf("10"), n=4,
                rtol=bf("1e-2"), atol=bf("0"))
    assert check_stop(bf("0.19"), **args) is True
    assert check_stop(bf("0.21"), **args) is False
    assert check_stop(bf("0"), **args) is True


def test_check_stop_edge_cases():
    one, zero = bf("1"), bf("0")
    # pure absolute tolerance
    assert check_stop(bf("0.5"), one, one, 9, zero, one) is True
    # zero threshold, strict comparison
    assert check_stop(zero, zero, one, 4, bf("1e-2"), zero) is False
    with pytest.raises(DomainError):
        check_stop(zero, one, one, 0, one, zero)


# ---------------------------------------------------------------------------
# config validation
# ---------------------------------------------------------------------------

def test_config_validation():
    with pytest.raises(DomainError):
        RefineConfig(short_k=5)
    with pytest.raises(DomainError):
        RefineConfig(short_k=2, long_bits=106)
    with pytest.raises(DomainError):
        RefineConfig(max_iter=0)
    dom = BfDomain(424)
    A = DenseMatrix.from_rows(dom, [[1, 0], [0, 1]])
    b = Vector.from_values(dom, [1, 2])
    with pytest.raises(DomainError):
        iterative_refinement(A, b, RefineConfig(rtol=0, atol=0))
    with pytest.raises(DomainError):
        iterative_refinement(A, b, RefineConfig(rtol=-1.0))
    with pytest.raises(DomainError):
        iterative_refinement(A, b, RefineConfig(rtol=[1]))
    with pytest.raises(DimensionError):
        iterative_refinement(A, Vector.from_values(dom, [1, 2, 3]),
                             RefineConfig())
    with pytest.raises(DomainError):
        iterative_refinement(DenseMatrix.zeros(McDomain("dd"), 2, 2),
                             Vector.zeros(McDomain("dd"), 2), RefineConfig())


def test_tolerances_accept_many_types():
    dom = BfDomain(424)
    A = DenseMatrix.from_rows(dom, [[2, 0], [0, 2]])
    b = Vector.from_values(dom, [2, 4])
    for rtol in ("1e-50", 1e-50, bf("1e-50", 424)):
        rep = iterative_refinement(A, b, RefineConfig(short_k=2, rtol=rtol))
        assert rep.stop_reason == "converged"


# ---------------------------------------------------------------------------
# trivial systems
# ---------------------------------------------------------------------------

def test_identity_system_converges_immediately():
    dom = BfDomain(424)
    n = 6
    A = DenseMatrix.zeros(dom, n, n)
    for i in range(n):
        A.set(i, i, 1)
    b = Vector.from_values(dom, [0.5, -3.0, 2.25, 7.0, -0.125, 11.0])
    rep = iterative_refinement(A, b, RefineConfig(short_k=2))
    assert rep.stop_reason == "converged"
    assert rep.iterations == 0
    assert len(rep.residual_history) == 1
    assert rep.residual_history[0].sign == 0
    for got, want in zip(rep.solution.data, b.data):
        assert bf_cmp(got, want) == 0


def test_singular_after_rounding_reports_step():
    # two distinct long values that collide when peeled into 4 components:
    # perturb a qd-exact base far below its last component's half ulp
    from mpcore.bigfloat import BigFloat, bf_add, bf_div, bf_from_multicomp, \
        bf_to_multicomp
    dom = BfDomain(424)
    ctx = dom.ctx
    q = bf_to_multicomp(bf_div(bf_from_int(1, ctx), bf_from_int(3, ctx), ctx),
                        4)
    base = bf_from_multicomp(q, ctx)
    v1 = bf_add(base, BigFloat(1, 1, -400, ctx.p), ctx)
    v2 = bf_add(base, BigFloat(1, 1, -410, ctx.p), ctx)
    assert bf_cmp(v1, v2) != 0
    # column 0 pivot is exactly 1 so the unit multiplier cancels the rows
    A = DenseMatrix.from_rows(dom, [[1, 1], [1, 1]])
    A.set(0, 1, v1)
    A.set(1, 1, v2)
    b = Vector.from_values(dom, [2, 2])
    with pytest.raises(SingularMatrixError) as e:
        iterative_refinement(A, b, RefineConfig(short_k=4))
    assert e.value.step == 1


# ---------------------------------------------------------------------------
# benchmark family behavior
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("k,max_ok", [(2, 22), (3, 6), (4, 3)])
def test_refinement_converges_on_ill_conditioned_family(gen32, k, max_ok):
    cfg = RefineConfig(short_k=k)
    rep = iterative_refinement(gen32.A, gen32.b, cfg)
    assert rep.stop_reason == "converged"
    assert 1 <= rep.iterations <= max_ok
    assert len(rep.residual_history) == rep.iterations + 1
    # residual norms strictly decrease until the stop fires
    h = rep.residual_history
    for a, b in zip(h, h[1:]):
        assert bf_cmp(b, a) < 0
    # solution quality: far beyond anything the short format could do alone
    err = max_rel_err(rep.solution, gen32.x_true)
    assert 0 <= err < 1e-60

    # independent re-verification of the stop condition 64 bits higher
    wide = BfDomain(cfg.long_bits + 64)
    Aw = convert_matrix(gen32.A, wide)
    xw = convert_vector(rep.solution, wide)
    bw = convert_vector(gen32.b, wide)
    ax = mat_vec(Aw, xw)
    res = Vector(wide, gen32.A.rows,
                 [bf_sub(p, q, wide.ctx) for p, q in zip(bw.data, ax.data)])
    ok = check_stop(vec_norm2(res), vec_norm2(xw), mat_norm_fro(Aw),
                    gen32.A.rows,
                    bf_parse_decimal("1e-100", wide.ctx),
                    bf_from_int(0, wide.ctx), wide.ctx)
    assert ok


def test_simd_toggle_changes_nothing(gen32):
    cfg = RefineConfig(short_k=3)
    r1 = iterative_refinement(gen32.A, gen32.b, cfg, simd=False)
    r2 = iterative_refinement(gen32.A, gen32.b, cfg, simd=True)
    assert r1.iterations == r2.iterations
    assert r1.stop_reason == r2.stop_reason
    for a, b in zip(r1.solution.data, r2.solution.data):
        assert bf_cmp(a, b) == 0


def test_max_iter_cap(gen32):
    cfg = RefineConfig(short_k=2, max_iter=2)
    rep = iterative_refinement(gen32.A, gen32.b, cfg)
    assert rep.stop_reason == "max_iter"
    assert rep.iterations == 2
    assert len(rep.residual_history) == 2


def test_stagnation_detected(gen32):
    # tolerance far below the attainable floor at 424 bits
    cfg = RefineConfig(short_k=3, rtol="1e-300")
    rep = iterative_refinement(gen32.A, gen32.b, cfg)
    assert rep.stop_reason == "stagnated"
    assert rep.iterations < cfg.max_iter
    h = rep.residual_history
    assert all(bf_cmp(h[-i], h[-i - 1]) >= 0 for i in (1, 2, 3))


def test_normalization_is_neutral_on_well_scaled_system():
    sysm = build_system(ProblemSpec(n=12, seed=9, cond_exponent=0))
    cfg = RefineConfig(short_k=2)
    r1 = iterative_refinement(sysm.A, sysm.b, cfg, normalize=True)
    r2 = iterative_refinement(sysm.A, sysm.b, cfg, normalize=False)
    assert r1.stop_reason == r2.stop_reason == "converged"
    xs = [abs(bf_to_binary64(v)) for v in r1.solution.data]
    ulp = max(xs) * 2.0 ** -423
    for a, b in zip(r1.solution.data, r2.solution.data):
        d = bf_sub(a, b, PrecisionContext(480))
        assert abs(bf_to_binary64(d)) <= 10 * ulp
