from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qmclose.instances import ball, example_3_3, example_3_4, example_couex, instance
from qmclose.polyring import Polynomial, monomial_basis, parse_polynomial, perturber
from qmclose.qmodule import (IN_MDAGGER, INFEASIBLE_AT_D, MEMBER, NO_CERTIFICATE, PREORDERING,
                             DegreeOverflow, IdentityPreconditionError, PseudoMoments,
                             QuadraticModuleSpec, archimedean_probe, bounded_power_certificates,
                             dual_moment_check, member, poly_stability, pos_semiordering,
                             seq_member, stable_closure, support_probe)

X = ("x",)
XY = ("x", "y")


def P(text, names):
    return parse_polynomial(text, names)


def QMof(names, *gens, kind="qm"):
    return QuadraticModuleSpec(names, tuple(P(g, names) for g in gens), kind)


def _residual(cert):
    diff = cert.target - cert.expand()
    return max((abs(c) for _, c in diff.items()), default=Fraction(0))


# --- member -----------------------------------------------------------------

def test_one_is_always_a_member():
    r = member(Polynomial.constant(1, XY), QMof(XY, "x"), 2)
    assert r.status == MEMBER and _residual(r.certificate) == 0


def test_interval_product_identity():
    # x(1-x) = x^2 (1-x) + (1-x)^2 x
    assert P("x^2", X) * P("1-x", X) + P("(1-x)^2", X) * P("x", X) == P("x*(1-x)", X)
    r = member(P("x*(1-x)", X), QMof(X, "x", "1-x"), 3)
    assert r.status == MEMBER
    assert r.certificate.is_valid() and _residual(r.certificate) <= Fraction(1, 10 ** 8)


@pytest.mark.parametrize("d", [4, 6, 8])
def test_couex_separation(d):
    r = member(P("x", XY), example_couex("N"), d)
    assert r.status == INFEASIBLE_AT_D
    assert r.dual is not None and r.dual(P("x", XY)) < 0


def test_certificate_json_is_exact():
    r = member(P("1-x1", ("x1", "x2")), ball(2), 4)
    js = r.certificate.to_json()
    for blk in js["blocks"]:
        for row in blk["gram"]:
            for entry in row:
                Fraction(entry)
    assert js["residual"] == 0.0


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_monotone_in_degree(seed):
    # plant a certificate with positive definite Gram matrices so that a
    # degree-3 witness exists away from the boundary of the cone
    rng = np.random.default_rng(seed)
    names = ("x", "y")
    g = Polynomial({m: int(rng.integers(-2, 3)) for m in monomial_basis(2, 1)}, names)
    M = QuadraticModuleSpec(names, (g,))
    B = monomial_basis(2, 1)

    def gram_sos():
        R = rng.integers(-2, 3, (3, 3))
        G = R @ R.T + np.eye(3, dtype=int)
        return sum((Polynomial({tuple(a + b for a, b in zip(B[i], B[j])): int(G[i, j])}, names)
                    for i in range(3) for j in range(3)), Polynomial({}, names))

    f = gram_sos() + g * gram_sos()
    assert member(f, M, 3).status == MEMBER
    assert member(f, M, 5).status == MEMBER


def test_degree_bound_below_target_degree_overflows():
    with pytest.raises(DegreeOverflow):
        member(P("x^4", X), QMof(X, "x"), 2)


def test_preordering_matches_explicit_products():
    rng = np.random.default_rng(11)
    names = ("x", "y")
    for _ in range(20):
        gens = tuple(Polynomial({m: int(rng.integers(-2, 3)) for m in monomial_basis(2, 1)}, names)
                     for _ in range(2))
        pre = QuadraticModuleSpec(names, gens, PREORDERING)
        explicit = QuadraticModuleSpec(names, gens + (gens[0] * gens[1],))
        d = 4
        planted = Polynomial.constant(1, names) + gens[0] * gens[1]
        random = Polynomial({m: int(rng.integers(-3, 4)) for m in monomial_basis(2, 2)}, names)
        for f in (planted, random):
            assert member(f, pre, d).status == member(f, explicit, d).status


def test_duality_consistency_with_point_evaluations():
    B = ball(2)
    rng = np.random.default_rng(5)
    for text in ("1-x1", "1-x1^2-x2^2+1/10", "1-2*x1*x2"):
        f = P(text, B.varnames)
        assert member(f, B, 4).status == MEMBER
        for _ in range(5):
            p = [Fraction(int(v), 8) for v in rng.integers(-5, 6, 2)]
            if p[0] ** 2 + p[1] ** 2 > 1:
                continue
            L = PseudoMoments.dirac(p, B.varnames, 4)
            assert dual_moment_check(L, B, 2).status == "psd_pass"
            assert L(f) >= -1e-8 * float(f.l1_norm())


# --- seq_member -----------------------------------------------------------------

def test_seq_member_passes_for_members():
    r = seq_member(P("x*(1-x)", X), QMof(X, "x", "1-x"), 4, 2)
    assert r.verdict == IN_MDAGGER


def test_seq_member_perturbation_on_ball():
    r = seq_member(P("1-x1", ("x1", "x2")), ball(2), 4, 1, [Fraction(1, 10), Fraction(1, 100)])
    assert r.verdict == IN_MDAGGER


@pytest.mark.parametrize("eps,expect_member", [
    (Fraction(1), True), (Fraction(1, 2), True),
    (Fraction(49, 100), False), (Fraction(1, 10), False)])
def test_cubic_generator_threshold(eps, expect_member):
    # sigma_1 is a constant c >= 0 at d = 4, and the missing x^4 term forces
    # c = 0; eps x^2 + x + eps is SOS iff 1 - 4 eps^2 <= 0, i.e. eps >= 1/2
    r = member(P("x", X) + perturber(X, 1).scale(eps), QMof(X, "x^3"), 4)
    assert (r.status == MEMBER) == expect_member
    if not expect_member:
        assert r.status in (INFEASIBLE_AT_D, NO_CERTIFICATE)


def test_seq_member_schedule_down_to_one_millionth():
    # x + eps (1 + x^2) = eps (x + 1/(2 eps))^2 + (eps - 1/(4 eps)) x^2 + eps,
    # and the x^2 coefficient can be absorbed by +-x^2
    r = seq_member(P("x", X), QMof(X, "x^2", "-x^2"), 2, 1)
    assert r.verdict == IN_MDAGGER
    assert len(r.results) == 7


def test_seq_member_validates_arguments():
    with pytest.raises(ValueError):
        seq_member(P("x^2", X), QMof(X, "x"), 4, 1)
    with pytest.raises(DegreeOverflow):
        seq_member(P("x", X), QMof(X, "x"), 2, 2)


# --- pos_semiordering ------------------------------------------------------------

def test_pos_semiordering_trivial():
    r = pos_semiordering(Polynomial.constant(1, X), QMof(X, "x"), 1, 2)
    assert r.status == MEMBER


def test_pos_semiordering_on_interval():
    # p = 1: x = x^2 + x(1-x)
    r = pos_semiordering(P("x", X), QMof(X, "x", "1-x"), 1, 4)
    assert r.status == MEMBER and r.certificate.is_valid()


def test_pos_semiordering_power_construction():
    # p = 4: 4 (4 - x^2) = (4 - x^2)^2 + x^2 (4 - x^2)
    r = pos_semiordering(P("4-x^2", X), QMof(X, "4-x^2"), 1, 4)
    assert r.status == MEMBER and r.certificate.is_valid()


# --- bounded powers -------------------------------------------------------------

def test_bounded_powers_small_cases():
    p, f = Polynomial.constant(1, X), P("x", X)
    reps = bounded_power_certificates(p, P("-x^2", X), f, 1, 1)
    claim1 = [r for r in reps if r.kind == "claim1" and r.i == 1][0]
    assert claim1.target == P("1-x^2", X) and claim1.is_exact()
    reps = bounded_power_certificates(p, P("3-x^2", X), f, 2, 2)
    c12 = [r for r in reps if r.kind == "claim1" and r.i == 2][0]
    assert c12.target == P("16-x^4", X)
    assert P("4*(4-x^2)+x^2*(4-x^2)", X) == c12.expand()
    c21 = [r for r in reps if r.kind == "claim2" and r.i == 1][0]
    assert c21.target == P("16-x^2", X) and c21.is_exact()


def test_bounded_powers_require_the_identity():
    with pytest.raises(IdentityPreconditionError):
        bounded_power_certificates(Polynomial.constant(1, X), P("x", X), P("x", X), 1, 2)


# --- archimedean / support / stable closure ------------------------------------------

def test_archimedean_ball():
    r = archimedean_probe(ball(2), [1], 2)
    assert r.status == "archimedean_certified" and r.k == 1


def test_archimedean_box_by_hand_identity():
    names = ("x1", "x2")
    M = QMof(names, "x1-1", "x2-1", "8-x1*x2", "1-(x1-2)^2", "1-(x2-2)^2")
    g3, g4 = M.generators[3], M.generators[4]
    # 9 - x_i^2 = 3 (1 - (x_i - 2)^2) + 2 (x_i - 3)^2
    hand = g3.scale(3) + P("2*(x1-3)^2", names) + g4.scale(3) + P("2*(x2-3)^2", names)
    assert hand == P("18-x1^2-x2^2", names)
    assert archimedean_probe(M, [18], 2).status == "archimedean_certified"


def test_example_3_3_stays_unknown():
    r = archimedean_probe(example_3_3(2, 1), [1, 100, 10 ** 4], [2, 4])
    assert r.status == "unknown"


def test_support_probe_cases():
    assert support_probe(QMof(X, "x", "-x"), 2, [P("x", X)]) == [P("x", X)]
    M = QMof(XY, "x^2+y^2", "-x^2-y^2")
    assert support_probe(M, 2, [P("x^2+y^2", XY)]) == [P("x^2+y^2", XY)]
    assert support_probe(M, 2, [P("x", XY)]) == []


def test_stable_closure_adds_radical():
    M = QMof(X, "-x^2")
    assert stable_closure(M, []) == M
    N = stable_closure(M, [P("x", X)])
    assert [str(g) for g in N.generators] == ["-x^2", "x", "-x"]
    assert member(P("x", X), N, 2).status == MEMBER


# --- poly_stability ---------------------------------------------------------------

def test_poly_stability_cases():
    r = poly_stability(QMof(XY, "x", "y"))
    assert r.status == "stable" and all(v > 0 for v in r.direction)
    assert poly_stability(QMof(XY, "x", "-x", "y")).status == "stable"
    r = poly_stability(QMof(XY, "x", "1-x", "y"))
    assert r.status == "hypothesis_failed" and r.bounded_witness == P("x", XY)
    assert poly_stability(QMof(XY, "x^2")).status == "not_applicable"


# --- dual_moment_check -------------------------------------------------------------

def test_dirac_at_interior_point_passes():
    L = PseudoMoments.dirac([Fraction(1, 3), Fraction(-1, 4)], ("x1", "x2"), 4)
    assert dual_moment_check(L, ball(2), 2).status == "psd_pass"


def test_indefinite_functional_fails_with_witness():
    L = PseudoMoments(X, 2, {(0,): 1, (1,): 0, (2,): -1})
    r = dual_moment_check(L, QuadraticModuleSpec(X, ()), 1)
    assert r.status == "psd_fail" and L(r.witness) < 0


def test_lebesgue_moments_on_unit_interval():
    L = PseudoMoments(X, 4, {(k,): Fraction(1, k + 1) for k in range(5)})
    r = dual_moment_check(L, QMof(X, "x", "1-x"), 2)
    assert r.status == "psd_pass"
    # the 3x3 Hilbert matrix has positive leading minors
    H = np.array([[1 / (i + j + 1) for j in range(3)] for i in range(3)])
    assert all(np.linalg.det(H[:k, :k]) > 0 for k in (1, 2, 3))


# --- instances ---------------------------------------------------------------------

def test_example_3_4_generator_list():
    M = example_3_4(3, Fraction(1, 4))
    assert [str(g) for g in M.generators] == [
        str(P(t, M.varnames)) for t in
        ("1-x1", "1-x2", "1-x3", "x1*x2*x3-1/4", "x1*x3^2", "x1*x2*x3^2")]


def test_instance_registry_and_json_round_trip():
    M = instance("example_3_4:3,1/4")
    assert M == example_3_4(3, Fraction(1, 4))
    assert QuadraticModuleSpec.from_json(M.to_json()) == M
    obj = {"vars": ["x"], "kind": "qm", "generators": ["x", "1-x"]}
    assert QuadraticModuleSpec.from_json(obj) == QMof(X, "x", "1-x")
