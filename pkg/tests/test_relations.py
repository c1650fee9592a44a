import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from singmod.errors import DomainError, ResourceError
from singmod.quadforms import ReducedForm, principal_form, forms_with_denominator
from singmod.relations import (
    RelationInstance,
    c_ell,
    check_linear_relation_hypothesis,
    delta_condition,
    derive_linear_relation,
    hermite_basis,
    in_lattice,
    inequality_bounds,
    masser_basis_bound,
    masser_generic_bound,
    parameter_region_delta,
    parameter_region_root_y,
    relation_lattice_bruteforce,
    relation_vectors,
    root_y_condition,
    verify_relation_exact,
)

PT_VALUES = [1728, -32768, -884736]


# -- Masser-type bounds ---------------------------------------------------------------


def test_c_ell():
    assert c_ell(1) == 3**16 == 43046721
    assert c_ell(2) == 3**32


def test_basis_bound_examples():
    for X in (1, 10, 10**8):
        assert masser_basis_bound(1, X, 1) == 24
    assert masser_basis_bound(2, 10**8, 1) == 24 * 43046721 * 2 * 10**4 == 20662426080000


def test_basis_bound_half_integer_power():
    # k = 4: 24 (c k)^3 X^(3/2), rounded up; oracle via integer square roots of X^3
    for X in (10**10, 10**10 + 1, 123457):
        base = 24 * (c_ell(1) * 4) ** 3
        expect = math.isqrt(base * base * X**3 - 1) + 1
        assert masser_basis_bound(4, X, 1) == expect
    assert 10**40 < masser_basis_bound(4, 10**10, 1) < 10**42


def test_basis_bound_monotone():
    ks, Xs, ells = range(1, 6), [1, 2, 3, 10, 99, 100, 10**6, 10**6 + 1], [1, 2]
    for k, X, ell in itertools.product(ks, Xs, ells):
        v = masser_basis_bound(k, X, ell)
        assert v <= masser_basis_bound(k + 1, X, ell)
        assert v <= masser_basis_bound(k, X + 1, ell)
        assert v <= masser_basis_bound(k, X, ell + 1)


def test_basis_bound_rejects_bad_input():
    with pytest.raises(DomainError):
        masser_basis_bound(0, 10, 1)
    with pytest.raises(DomainError):
        masser_generic_bound(2, 1, 0, 24)


def test_generic_bound_examples():
    assert masser_generic_bound(1, 5, Fraction(1, 7), 24) == 24
    assert masser_generic_bound(3, Fraction(1, 9), Fraction(1, 9), 24) == 216
    # degree-2 height floor 3^-14: the basis bound dominates
    generic = masser_generic_bound(2, 4 * 10**4, Fraction(1, 3**14), 24)
    assert generic <= masser_basis_bound(2, 10**8, 1)


def test_generic_bound_with_ell_exponent():
    # with eta = 3^-16 the generic bound is 4 times the basis bound, not equal to it
    generic = masser_generic_bound(2, 4 * 10**4, Fraction(1, 3**16), 24)
    assert generic == 4 * masser_basis_bound(2, 10**8, 1)


# -- hypotheses ------------------------------------------------------------------------


def dominant_instance(D, conductors, exponents):
    return RelationInstance.of((D * f * f, principal_form(D * f * f), m) for f, m in zip(conductors, exponents))


def test_root_y_examples():
    # k = 6: X = 4 (6 t)^2 >= 1e10, Y = X / 36
    t = 8334
    inst = dominant_instance(-4, [6 * t, 6 * t, 3 * t, 2 * t, t, t], [1, 1, 1, 1, 1, 1])
    assert inst.X >= 10**10 and inst.Y * 36 == inst.X
    assert check_linear_relation_hypothesis(inst, 162)
    inst = dominant_instance(-4, [500, 250], [1, -1])
    assert (inst.X, inst.Y) == (10**6, 250000)
    assert check_linear_relation_hypothesis(inst, 9)
    inst = dominant_instance(-4, [50, 50], [1, 2])
    assert not check_linear_relation_hypothesis(inst, 10**6)
    assert root_y_condition(6, 162, 10**10, Fraction(10**10, 36))[0]
    assert not root_y_condition(2, 10**6, 10**4, 10**4)[0]


def test_hypothesis_rejects_mixed_fields():
    inst = RelationInstance.of([(-4, (1, 0, 1), 1), (-11, (1, 1, 3), 1)])
    with pytest.raises(DomainError):
        check_linear_relation_hypothesis(inst, 1)


def test_parameter_regions():
    assert parameter_region_root_y(6, 162, 10**10, 36)
    assert parameter_region_root_y(4, 9, 10**6, 4)
    assert parameter_region_delta(6, 30, Fraction(1, 100), 10**10, 36)
    assert parameter_region_delta(4, 9, Fraction(16, 100), 10**6, 4)
    assert parameter_region_delta(4, 9, Fraction(16, 1000), 10**8, 4)


def test_parameter_region_sampled():
    # spot checks inside the region agree with the corner argument
    for X in (10**10, 3 * 10**10, 10**12, 10**15):
        for k in range(1, 7):
            for A in (1, 30, 162):
                assert root_y_condition(k, A, X, Fraction(X, 36))[0]
                if A <= 30:
                    assert delta_condition(k, A, Fraction(1, 100), X, Fraction(X, 36))[0]


def test_delta_condition_monotone():
    grid_A = [1, 3, 9, 30, 162]
    grid_eps = [Fraction(1, 100), Fraction(16, 1000), Fraction(1, 10), Fraction(16, 100), Fraction(1, 2)]
    for k in (2, 4, 6):
        for X in (10**6, 10**8, 10**10):
            for d in (X // 36, X // 4, X):
                for i, A in enumerate(grid_A):
                    for j, eps in enumerate(grid_eps):
                        if delta_condition(k, A, eps, X, d)[0]:
                            for A2 in grid_A[: i + 1]:
                                for eps2 in grid_eps[j:]:
                                    assert delta_condition(k, A2, eps2, X, d)[0]


def test_derive_cancelling_pair():
    delta = -4 * 10**6
    x = principal_form(delta)
    inst = RelationInstance.of([(delta, x, 5), (delta, x, -5)])
    rel = derive_linear_relation(inst, 1)
    assert rel.sum == 0 and rel.coefficients == (Fraction(1000 * 5), Fraction(-1000 * 5))


def test_derive_rejects_small_class_number_one_instances():
    # relations among small discriminants fall outside the root-Y regime
    for D, fs in ((-4, (1, 2)), (-7, (1, 2)), (-3, (2, 3))):
        inst = dominant_instance(D, fs, (1, -1))
        with pytest.raises(DomainError):
            derive_linear_relation(inst, 1)


def test_derive_nonzero_on_non_relations():
    # distinct dominant points with distinct weights cannot cancel
    for m1, m2 in itertools.product((1, 2, 3), (-1, 1, 2)):
        inst = dominant_instance(-4, (600, 500), (m1, m2))
        rel = derive_linear_relation(inst, 9)
        assert rel.sum == 600 * m1 + 500 * m2
        assert rel.sum != 0


def test_inequality_two_and_three():
    delta = -1000007
    f1 = principal_form(delta)
    f2 = forms_with_denominator(delta, 2)[0]
    f3 = forms_with_denominator(delta, 3)[0]
    f4 = forms_with_denominator(delta, 4)[0]
    for m in (1, 7):
        inst = RelationInstance.of([(delta, f1, m), (delta, f2, -m), (delta, f3, -m), (delta, f4, m)])
        b = inequality_bounds(inst, 3, Fraction(16, 100))
        assert b.pos_lhs == m
        assert b.pos_rhs == m * (Fraction(1, 2) + Fraction(1, 3) + Fraction(16, 100))
        assert not b.holds()


def test_inequality_all_positive():
    delta = -1000007
    f1 = principal_form(delta)
    f2 = forms_with_denominator(delta, 2)[0]
    inst = RelationInstance.of([(delta, f1, 2), (delta, f2, 3)])
    b = inequality_bounds(inst, 5, Fraction(1, 10))
    assert b.neg_lhs == 0 and b.neg_rhs >= 0
    assert b.neg_lhs <= b.neg_rhs


def test_inequality_dominant_option():
    delta = -100000000
    x = principal_form(delta)
    big = [forms_with_denominator(delta, a)[0] for a in (13, 16, 17)]
    inst = RelationInstance.of([(delta, x, 1)] + [(delta, f, -1) for f in big])
    b = inequality_bounds(inst, 13, Fraction(1, 100))
    assert b.pos_lhs == 1
    assert b.pos_rhs == Fraction(3, 13) + Fraction(1, 100)
    assert not b.holds()


def test_inequality_requires_delta_condition():
    inst = dominant_instance(-4, (50, 50), (1, -1))
    with pytest.raises(DomainError):
        inequality_bounds(inst, 9, Fraction(1, 100))


# -- exact relations -------------------------------------------------------------------


def test_exact_relation_examples():
    assert verify_relation_exact(PT_VALUES, [10, 6, -10])
    assert verify_relation_exact(PT_VALUES, [5, 3, -5])
    assert not verify_relation_exact([1728], [1])
    assert not verify_relation_exact(PT_VALUES, [5, 3, 5])


def test_lattice_examples():
    assert relation_lattice_bruteforce(PT_VALUES, 12) == [(5, 3, -5)]
    assert relation_lattice_bruteforce([2, 3], 10) == []
    assert relation_lattice_bruteforce([4, 8], 5) == [(3, -2)]


def test_lattice_contains_identity_vector():
    basis = relation_lattice_bruteforce(PT_VALUES, 12)
    assert in_lattice(basis, (10, 6, -10))
    assert not in_lattice(basis, (1, 0, 0))


def test_lattice_budget():
    with pytest.raises(ResourceError):
        relation_vectors([2, 3, 5, 7, 11, 13], 50)


def brute_relations(values, cap):
    out = []
    for m in itertools.product(range(-cap, cap + 1), repeat=len(values)):
        if not any(m):
            continue
        num = den = Fraction(1)
        for v, e in zip(values, m):
            if e > 0:
                num *= Fraction(v) ** e
            elif e < 0:
                den *= Fraction(v) ** (-e)
        if num == den:
            out.append(m)
    return out


small_values = st.lists(
    st.sampled_from([-1, 2, -2, 4, -8, 3, 9, -27, 6, 12, 1728, -32768, 36]), min_size=1, max_size=3
)


@given(small_values, st.integers(min_value=1, max_value=4))
def test_relation_vectors_match_brute_force(values, cap):
    assert sorted(relation_vectors(values, cap)) == sorted(brute_relations(values, cap))


@given(small_values, st.integers(min_value=1, max_value=5))
def test_lattice_complete_within_box(values, cap):
    found = relation_vectors(values, cap)
    basis = relation_lattice_bruteforce(values, cap)
    assert all(verify_relation_exact(values, b) for b in basis)
    assert all(in_lattice(basis, v) for v in found)


@given(st.lists(st.lists(st.integers(-9, 9), min_size=3, max_size=3), min_size=1, max_size=5))
def test_hermite_basis_spans_inputs(vectors):
    basis = hermite_basis(vectors)
    assert all(in_lattice(basis, v) for v in vectors)
    assert len(basis) <= 3
