import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from qmclose.polyring import (ParseError, Polynomial, VariableMismatch, monomial_basis,
                              parse_polynomial, perturber, sum_of_squares_of_vars)

NAMES = ("x", "y")

coeffs = st.fractions(min_value=-5, max_value=5, max_denominator=7)
monos = st.tuples(st.integers(0, 3), st.integers(0, 3))
polys = st.dictionaries(monos, coeffs, max_size=6).map(lambda t: Polynomial(t, NAMES))
points = st.tuples(st.fractions(-3, 3, max_denominator=5), st.fractions(-3, 3, max_denominator=5))


@given(polys, polys, polys)
def test_ring_laws(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a + b) * c == a * c + b * c
    assert (a * b) * c == a * (b * c)
    assert a - a == Polynomial({}, NAMES)


@given(polys, polys, points)
def test_evaluation_is_a_homomorphism(a, b, p):
    assert (a * b).evaluate(p) == a.evaluate(p) * b.evaluate(p)
    assert (a + b).evaluate(p) == a.evaluate(p) + b.evaluate(p)


@given(polys)
def test_printing_round_trips_through_the_parser(p):
    assert parse_polynomial(str(p), NAMES) == p


@given(polys)
def test_json_round_trip(p):
    assert Polynomial.from_json(p.to_json()) == p


@given(polys, st.fractions(-3, 3, max_denominator=4), st.fractions(-3, 3, max_denominator=4))
def test_substitution_agrees_with_evaluation(p, lam, y):
    q = p.substitute("x", lam)
    assert q.varnames == ("y",)
    assert q.evaluate((y,)) == p.evaluate((lam, y))


@pytest.mark.parametrize("n,d", [(1, 0), (1, 4), (2, 3), (3, 2), (3, 4)])
def test_monomial_basis_size_and_order(n, d):
    B = monomial_basis(n, d)
    assert len(B) == math.comb(n + d, d)
    assert len(set(B)) == len(B)
    degs = [sum(m) for m in B]
    assert degs == sorted(degs)


@settings(max_examples=30)
@given(st.integers(1, 3), points)
def test_perturber_is_power_of_one_plus_norm(e, p):
    q = perturber(NAMES, e)
    assert q.evaluate(p) == (1 + p[0] ** 2 + p[1] ** 2) ** e
    assert q.degree() == 2 * e


def test_parser_basics():
    p = parse_polynomial("1 - x1^2 - 3/4*x2", ("x1", "x2"))
    assert p.coeff((0, 0)) == 1
    assert p.coeff((2, 0)) == -1
    assert p.coeff((0, 1)) == Fraction(-3, 4)
    assert parse_polynomial("(x+1)^2", ("x",)) == parse_polynomial("x^2+2*x+1", ("x",))
    assert parse_polynomial("x**2", ("x",)).degree() == 2
    assert parse_polynomial("y*x").varnames == ("x", "y")


@pytest.mark.parametrize("bad", ["x +", "x / y", "(x", "x ^ y", "2 $ x"])
def test_parser_rejects_malformed_input(bad):
    with pytest.raises(ParseError):
        parse_polynomial(bad, NAMES)


def test_mixing_variable_sets_is_an_error():
    with pytest.raises(VariableMismatch):
        Polynomial.var("x", ("x",)) + Polynomial.var("y", ("y",))


def test_with_varnames_embeds_and_refuses_to_drop():
    x = Polynomial.var("x", ("x",))
    assert x.with_varnames(("x", "y")) == Polynomial.var("x", NAMES)
    with pytest.raises(ValueError):
        Polynomial.var("y", NAMES).with_varnames(("x",))


def test_sum_of_squares_of_vars():
    s = sum_of_squares_of_vars(("a", "b", "c"))
    assert s == parse_polynomial("a^2+b^2+c^2", ("a", "b", "c"))
