from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qmclose.coneengine import (IN_CLOSURE, INCONCLUSIVE, NOT_DETECTED, PreconditionError,
                                SemispaceHypothesisError, TruncatedCone, UnsupportedRepresentation,
                                dual_cone, interior_shift, is_interior, seq_closure_member,
                                semispace_closed)
from qmclose.numkernel import DimensionOverflow

ORTHANT = TruncatedCone.orthant(2)
WEDGE = TruncatedCone.from_generators([(1, 0), (1, 1)])


def _random_cone(rng, dim, count):
    gens = rng.integers(-3, 4, (count, dim))
    gens = [g for g in gens.tolist() if any(g)] or [[1] + [0] * (dim - 1)]
    return TruncatedCone.from_generators(gens)


def test_orthant_is_self_dual():
    assert dual_cone(ORTHANT).same_as(ORTHANT)


def test_dual_of_origin_is_the_whole_space():
    D = dual_cone(TruncatedCone.from_generators([(0, 0)]))
    assert D.same_as(TruncatedCone.from_generators([(1, 0), (-1, 0), (0, 1), (0, -1)]))


def test_dual_of_a_ray_is_its_halfplane():
    D = dual_cone(TruncatedCone.from_generators([(1, 1)]))
    for y in [(1, 0), (0, 1), (1, -1), (-1, 1), (3, -2)]:
        assert D.contains(y) == (y[0] + y[1] >= 0)


def test_wedge_facets_are_the_expected_normals():
    normals = {tuple(h) for h in WEDGE.facets}
    assert normals == {(0, 1), (1, -1)}


@pytest.mark.parametrize("dim", [2, 3, 4, 5, 6])
def test_double_dual_is_the_closure(dim):
    rng = np.random.default_rng(dim)
    for _ in range(6):
        C = _random_cone(rng, dim, int(rng.integers(1, 7)))
        assert dual_cone(dual_cone(C)).same_as(C)


def test_halfspace_and_generator_forms_agree():
    H = TruncatedCone.from_halfspaces([(0, 1), (1, -1)])
    assert H.same_as(WEDGE)
    assert dual_cone(H).same_as(TruncatedCone.from_generators([(0, 1), (1, -1)]))


def test_interior_examples():
    assert is_interior(ORTHANT, (1, 1))
    res = is_interior(ORTHANT, (1, 0))
    assert not res and tuple(res.witness) == (0, 1)
    assert is_interior(WEDGE, (2, 1))


@pytest.mark.parametrize("C,q,v,eps", [
    (ORTHANT, (1, 1), (1, 0), Fraction(1, 2)),
    (ORTHANT, (1, 1), (0, 0), Fraction(1, 10 ** 6)),
    (WEDGE, (2, 1), (1, 1), Fraction(1, 10)),
])
def test_interior_shift_examples(C, q, v, eps):
    assert interior_shift(C, q, v, eps) is True


def test_interior_shift_reports_broken_preconditions():
    with pytest.raises(PreconditionError):
        interior_shift(ORTHANT, (1, 0), (1, 1), Fraction(1, 2))
    with pytest.raises(PreconditionError):
        interior_shift(ORTHANT, (1, 1), (-1, 0), Fraction(1, 2))
    with pytest.raises(PreconditionError):
        interior_shift(ORTHANT, (1, 1), (1, 0), 0)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_interior_plus_closure_point_stays_interior(seed):
    rng = np.random.default_rng(seed)
    C = TruncatedCone.from_generators(rng.integers(0, 4, (4, 3)).tolist() + [[1, 1, 1]])
    gens = C.generators
    q = tuple(sum(g[i] for g in gens) for i in range(3))
    if not is_interior(C, q):
        return  # the cone is lower dimensional
    coeffs = rng.integers(0, 3, len(gens))
    v = tuple(sum(int(c) * g[i] for c, g in zip(coeffs, gens)) for i in range(3))
    for eps in (1, Fraction(1, 10), Fraction(1, 100)):
        assert interior_shift(C, q, v, eps)


def test_seq_closure_examples():
    verdict, w = seq_closure_member(ORTHANT, (0, 1), (1, 1), [1, Fraction(1, 10), Fraction(1, 100)])
    assert verdict == IN_CLOSURE and w.verdicts == (True, True, True)

    def open_right_halfplane(v):
        return v[0] > 0 or all(x == 0 for x in v)

    verdict, _ = seq_closure_member(open_right_halfplane, (0, 1), (1, 0))
    assert verdict == IN_CLOSURE
    assert not open_right_halfplane((0, 1))


def test_seq_closure_is_one_sided_and_propagates_oracle_failure():
    verdict, w = seq_closure_member(ORTHANT, (-1, 0), (1, 1), [1, Fraction(1, 2), Fraction(1, 4)])
    assert verdict == NOT_DETECTED and w.verdicts == (True, False, False)
    verdict, _ = seq_closure_member(lambda v: None, (0, 0), (1, 1))
    assert verdict == INCONCLUSIVE


@pytest.mark.parametrize("schedule", [[], [1, 1], [Fraction(1, 2), 1], [1, 0]])
def test_schedules_must_be_positive_and_strictly_decreasing(schedule):
    with pytest.raises(ValueError):
        seq_closure_member(ORTHANT, (0, 0), (1, 1), schedule)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.fractions(Fraction(1, 1000), 2), min_size=1, max_size=6, unique=True),
       st.data())
def test_shrinking_the_schedule_keeps_a_positive_verdict(eps, data):
    eps = sorted(eps, reverse=True)
    v = (Fraction(-1, 4), Fraction(1, 3))
    q = (Fraction(1), Fraction(1))
    full, _ = seq_closure_member(ORTHANT, v, q, eps)
    sub = data.draw(st.lists(st.sampled_from(eps), min_size=1, unique=True))
    part, _ = seq_closure_member(ORTHANT, v, q, sorted(sub, reverse=True))
    if full == IN_CLOSURE:
        assert part == IN_CLOSURE


def test_closure_points_are_found_by_perturbation():
    rng = np.random.default_rng(11)
    for _ in range(10):
        C = _random_cone(rng, 3, 5)
        gens = C.generators
        q = tuple(sum(g[i] for g in gens) for i in range(3))
        if not is_interior(C, q):
            continue
        for _ in range(5):
            coeffs = rng.integers(0, 3, len(gens))
            v = tuple(sum(int(c) * g[i] for c, g in zip(coeffs, gens)) for i in range(3))
            assert all(h_v >= 0 for h_v in (sum(a * b for a, b in zip(h, v)) for h in C.facets))
            assert seq_closure_member(C, v, q)[0] == IN_CLOSURE


def test_semispace_examples():
    upper = TruncatedCone.from_halfspaces([(0, 1)])
    assert semispace_closed(upper)
    whole = TruncatedCone.from_generators([(1, 0), (-1, 0), (0, 1), (0, -1)])
    assert semispace_closed(whole)
    lex = TruncatedCone.semispace([(0, 1), (1, 0)])
    assert not semispace_closed(lex)
    # (-1, 0) is the limit of (-1, 1/k) in the cone but is not in it
    assert all(lex.contains((-1, Fraction(1, k))) for k in range(1, 50))
    assert not lex.contains((-1, 0))


def test_semispace_hypothesis_and_representation_errors():
    with pytest.raises(SemispaceHypothesisError):
        semispace_closed(ORTHANT)
    with pytest.raises(ValueError):
        TruncatedCone.semispace([])
    assert semispace_closed(TruncatedCone.semispace([], dim=2))
    with pytest.raises(UnsupportedRepresentation):
        semispace_closed(TruncatedCone.from_oracle(2, lambda v: True))


def test_conversion_limit():
    with pytest.raises(DimensionOverflow):
        dual_cone(TruncatedCone.orthant(13))


def test_json_round_trip():
    for C in (WEDGE, TruncatedCone.from_halfspaces([(0, 1)]),
              TruncatedCone.semispace([(0, 1), (1, 0)])):
        assert TruncatedCone.from_json(C.to_json()) == C
    with pytest.raises(UnsupportedRepresentation):
        TruncatedCone.from_oracle(2, lambda v: True).to_json()
