from fractions import Fraction

import numpy as np
import pytest

from qmclose.fiberlab import (FAILS_AT, MEMBER_ON_GRID, WC_MEMBER, WC_NO_CERT, certify_bounds,
                              fiber_decompose, fiber_member, fiber_spec, sampled_range,
                              uniform_grid, weak_closure_member)
from qmclose.instances import ball, example_3_4, example_4_2, example_couex
from qmclose.polyring import Polynomial, parse_polynomial
from qmclose.qmodule import QuadraticModuleSpec, member


def QMof(names, *gens):
    return QuadraticModuleSpec(names, tuple(parse_polynomial(g, names) for g in gens))


def test_generator_upper_bound_is_immediate():
    M = example_3_4(2)
    x1 = Polynomial.var("x1", M.varnames)
    w = certify_bounds(x1, M, 0, 1, 4)
    assert w.upper.method == "member"


def test_interval_bounds_from_a_single_generator():
    M = QMof(("x",), "1-x^2")
    w = certify_bounds(Polynomial.var("x", ("x",)), M, -1, 1, 2)
    assert w.certified
    # the hand identity behind the upper side
    assert parse_polynomial("1/2*(1-x)^2 + 1/2*(1-x^2)", ("x",)) == parse_polynomial("1-x", ("x",))


def test_ball_coordinate_is_bounded():
    M = ball(2)
    w = certify_bounds(Polynomial.var("x1", M.varnames), M, -1, 1, 4)
    assert w.certified
    assert w.upper.result.certificate.is_valid()


def test_bounds_reject_reversed_interval():
    with pytest.raises(ValueError):
        certify_bounds(Polynomial.var("x", ("x",)), QMof(("x",), "1-x^2"), 1, -1, 2)


@pytest.mark.parametrize("seed", range(5))
def test_fibres_agree_with_pointwise_evaluation(seed):
    rng = np.random.default_rng(seed)
    M = example_3_4(3)
    lam = Fraction(int(rng.integers(1, 100)), 100)
    F = fiber_spec(M, "x1", lam)
    assert F.varnames == ("x2", "x3")
    assert len(F.generators) == len(M.generators)
    for _ in range(5):
        y = tuple(Fraction(int(v), 7) for v in rng.integers(-10, 10, 2))
        assert [g.evaluate(y) for g in F.generators] == \
            [g.evaluate((lam,) + y) for g in M.generators]


def test_single_point_grid_is_one_fibre():
    D = fiber_decompose(example_3_4(2), "x1", Fraction(1, 2), Fraction(1, 2), 9)
    assert D.grid == [Fraction(1, 2)] and len(D.fibers) == 1


def test_uniform_grid_includes_endpoints():
    assert uniform_grid(0, 1, 5) == [0, Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), 1]
    with pytest.raises(ValueError):
        uniform_grid(0, 1, 0)


def test_constant_one_passes_and_minus_one_fails_every_fibre():
    N = example_4_2("N")
    D = fiber_decompose(N, "x", 0, 1, 5)
    one = Polynomial.constant(1, N.varnames)
    assert fiber_member(one, D, 2).aggregate == MEMBER_ON_GRID
    r = fiber_member(-one, D, 2)
    assert r.aggregate == FAILS_AT and r.failing == D.grid


def test_interval_product_passes_on_strip_fibres():
    N = example_4_2("N")
    D = fiber_decompose(N, "x", 0, 1, 5)
    r = fiber_member(parse_polynomial("x*(1-x)", N.varnames), D, 2)
    assert r.aggregate == MEMBER_ON_GRID and r.label == "grid_sampled"


def test_doubling_the_grid_keeps_failures():
    M = QMof(("x", "y"), "x", "1-x")
    f = parse_polynomial("x - 1/2", M.varnames)
    coarse = fiber_member(f, fiber_decompose(M, "x", 0, 1, 3), 2)
    fine = fiber_member(f, fiber_decompose(M, "x", 0, 1, 5), 2)
    assert set(coarse.grid) <= set(fine.grid)
    assert set(coarse.failing) <= set(fine.failing)
    assert coarse.failing == [0] and fine.failing == [0, Fraction(1, 4)]
    by_lambda = dict(zip(fine.grid, fine.statuses))
    assert all(by_lambda[l] == s for l, s in zip(coarse.grid, coarse.statuses))


def test_unbounded_coordinates_are_detected_by_sampling():
    M = example_couex("M")
    assert sampled_range(Polynomial.var("y", M.varnames), M).touches_box


def test_weak_closure_without_bounded_coordinate():
    M = example_couex("M")
    r = weak_closure_member(Polynomial.var("x", M.varnames), M, d=4)
    assert r.verdict == WC_NO_CERT
    assert r.trace.case == "no_bounded_coordinate"


@pytest.mark.parametrize("text", ["x", "1+y^2", "(1-x)*x^3*y^2", "-1"])
def test_weak_closure_is_membership_when_nothing_is_bounded(text):
    M = example_couex("M")
    f = parse_polynomial(text, M.varnames)
    r = weak_closure_member(f, M, d=6)
    assert r.trace.case in ("in_module", "no_bounded_coordinate")
    assert r.is_member == member(f, M, 6).is_member


def test_square_zero_module_collapses_to_the_origin_fibre():
    M = QMof(("x",), "x^2", "-x^2")
    r = weak_closure_member(Polynomial.var("x", ("x",)), M, d=4)
    assert r.verdict == WC_MEMBER
    assert r.trace.case == "collapsed" and r.trace.grid == [0]
    assert weak_closure_member(parse_polynomial("-x", ("x",)), M, d=4).verdict == WC_MEMBER


def test_pinned_coordinate_is_a_substitution():
    # h*(x1-3) = ((h+1)/2)^2 (x1-3) - ((h-1)/2)^2 (x1-3) is in M, but for
    # h = x2^3 that identity needs degree 7, beyond d = 4
    M = QMof(("x1", "x2"), "x1-3", "3-x1", "x2")
    f = parse_polynomial("x2 + (x1-3)*x2^3", M.varnames)
    assert not member(f, M, 4).is_member
    good = weak_closure_member(f, M, d=4)
    assert good.verdict == WC_MEMBER
    assert good.trace.case == "collapsed" and good.trace.grid == [3]
    bad = weak_closure_member(parse_polynomial("-x2 + (x1-3)*x2^3", M.varnames), M, d=4)
    assert bad.verdict == WC_NO_CERT


def test_interval_product_on_caller_bounded_fibres():
    M = example_3_4(2)
    f = parse_polynomial("x1*(1-x1)", M.varnames)
    r = weak_closure_member(f, M, d=6, grid_size=9, bounds={"x1": (0, 1)})
    assert r.verdict == WC_MEMBER
    assert r.trace.case == "fibred" and len(r.trace.grid) == 9
    assert any("asserted by the caller" in n for n in r.trace.notes)


def test_weak_closure_argument_validation():
    M = QMof(("x",), "x")
    with pytest.raises(ValueError):
        weak_closure_member(Polynomial.var("x", ("x",)), M, depth_limit=-1)
    with pytest.raises(ValueError):
        weak_closure_member(Polynomial.var("x", ("x",)), M, grid_size=0)
