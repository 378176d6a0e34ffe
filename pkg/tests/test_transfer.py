"""Algebra homomorphisms, distribution transfer, good pairs, the step."""

import pytest
from hypothesis import given, strategies as st

from bvmodels.boolalg import (
    Antichain,
    BoolAlg,
    Element,
    PrincipalFilter,
    ultrafilter_from_atom,
)
from bvmodels.distributions import (
    Distribution,
    find_multiplicative_refinement,
    is_in_filter,
    is_multiplicative,
    refines,
)
from bvmodels.errors import (
    NoFIP,
    NotInjective,
    NotPregood,
    PreconditionFailed,
    ZeroImage,
)
from bvmodels.transfer import (
    AlgebraHom,
    GoodPairState,
    extend_to_good,
    find_witness,
    hom_from_atom_map,
    is_pregood,
    kernel_quotient_agrees,
    pull_back_mult_refinement,
    pullback_distribution,
    pushforward,
    refinement_step,
    sigma_values,
)

B4 = BoolAlg(4)
B2 = BoolAlg(2)
J = hom_from_atom_map(B4, B2, (1, 3))

F = frozenset

elements4 = st.integers(min_value=0, max_value=15).map(lambda m: Element(B4, m))


@given(elements4, elements4)
def test_hom_preserves_operations(a, b):
    assert J(a & b) == J(a) & J(b)
    assert J(a | b) == J(a) | J(b)
    assert J(~a) == ~J(a)


def test_hom_construction_and_kernel():
    assert J(B4.one).is_one and J(B4.zero).is_zero
    assert J.kernel().generator == B4.element([1, 3])
    with pytest.raises(NotInjective):
        hom_from_atom_map(B4, B2, (2, 2))
    assert hom_from_atom_map(B4, B2, {0: 1, 1: 3}).atom_map == (1, 3)


def test_minimal_preimage_is_a_section():
    for b in B2.elements():
        assert J(J.minimal_preimage(b)) == b
        assert J.minimal_preimage(b).leq(J.kernel().generator)


def test_preimage_filter_of_an_ultrafilter():
    u1 = ultrafilter_from_atom(B2, 1)
    u0 = J.preimage_filter(u1)
    assert u0.is_ultrafilter and u0.generator == B4.atom(3)
    for a in B4.elements():
        assert (a in u0) == (J(a) in u1)


def test_kernel_quotient_agrees():
    assert kernel_quotient_agrees(J)
    assert kernel_quotient_agrees(hom_from_atom_map(B4, B2, (3, 0)))


def _source_dist():
    one = B4.one
    a1 = B4.element([1, 3])
    return Distribution((0, 1), B4, {F(): one, F([0]): one,
                                     F([1]): a1, F([0, 1]): a1})


def test_pushforward_values_and_zero_image():
    a1 = pushforward(J, _source_dist())
    assert a1(F([1])) == B2.one
    bad = Distribution((0,), B4, {F(): B4.one, F([0]): B4.atom(0)})
    with pytest.raises(ZeroImage):
        pushforward(J, bad)


def test_pullback_round_trip():
    a1 = pushforward(J, _source_dist())
    a0 = pullback_distribution(J, a1)
    assert pushforward(J, a0).table == a1.table
    # every value of the pullback lies in the kernel's generator
    for s, v in a0.table.items():
        if s:
            assert v.leq(J.kernel().generator)


def test_pull_back_mult_refinement():
    a0 = _source_dist()
    u1 = ultrafilter_from_atom(B2, 1)
    u0 = J.preimage_filter(u1)
    b1 = find_multiplicative_refinement(pushforward(J, a0), u1)
    b0 = pull_back_mult_refinement(J, a0, b1, u1)
    assert is_multiplicative(b0) and refines(b0, a0) and is_in_filter(b0, u0)
    with pytest.raises(PreconditionFailed):
        loose = Distribution((0, 1), B2,
                             {F(): B2.one, F([0]): B2.atom(0),
                              F([1]): B2.atom(0), F([0, 1]): B2.atom(0)})
        pull_back_mult_refinement(J, a0, loose, u1)


def _pair_state(gen_atoms=(0, 1, 2, 3), depth=2):
    designated = ((B4.element([0, 1]), B2.atom(0)), (B4.element([2, 3]), B2.atom(1)))
    reserve = (Antichain((B4.element([0, 2]), B4.element([1, 3]))),)
    return GoodPairState(designated, reserve,
                         PrincipalFilter(B4, B4.element(gen_atoms)), depth)


def test_sigma_values_closed_under_operations():
    values = sigma_values(_pair_state())
    for v0, v1 in values:
        assert (~v0, ~v1) in values
    assert (B4.zero, B2.zero) in values and (B4.one, B2.one) in values


def test_pregood_and_extension():
    state = _pair_state()
    assert is_pregood(state)
    extended = extend_to_good(state)
    assert is_pregood(extended)
    # maximality: no further strengthening stays pre-good
    for b in extended.algebra.elements():
        gen = extended.filter.generator & b
        if gen.is_zero or gen == extended.filter.generator:
            continue
        tighter = GoodPairState(extended.designated, extended.reserve,
                                PrincipalFilter(B4, gen), extended.term_depth)
        assert not is_pregood(tighter)
    with pytest.raises(NotPregood):
        # a filter annihilating a target-1 term is not pre-good
        bad = GoodPairState(((B4.atom(0), B2.one),), (),
                            PrincipalFilter(B4, B4.atom(1)), 2)
        extend_to_good(bad)


def test_find_witness_properties():
    state = extend_to_good(_pair_state())
    gen = state.filter.generator
    for a in B4.elements():
        found = find_witness(state, a)
        if (gen & a).is_zero:
            assert found is None
        elif found is not None:
            xf, alpha = found
            c0 = state.designated[alpha][0]
            piece = gen & xf & c0
            assert not piece.is_zero
            assert (piece & ~a).is_zero


def _step_instance():
    algebra = BoolAlg(4)
    blocks = {F(): algebra.element([0]), F([0]): algebra.element([1]),
              F([1]): algebra.element([2]), F([0, 1]): algebra.element([3])}
    one = algebra.one
    a = Distribution((0, 1), algebra,
                     {F(): one, F([0]): one, F([1]): one, F([0, 1]): one})
    return algebra, blocks, a


def test_refinement_step_build_and_postconditions():
    algebra, blocks, a = _step_instance()
    e_filter = PrincipalFilter(algebra, algebra.one)
    b, new_filter = refinement_step(e_filter, blocks, a)
    assert b(F()).is_one
    assert b(F([0])) == algebra.element([1, 3])  # blocks of supersets of {0}
    assert b(F([0, 1])) == algebra.element([3])
    assert is_multiplicative(b)
    assert new_filter.generator == algebra.element([3])
    assert is_in_filter(b, new_filter)


def test_refinement_step_guards():
    algebra, blocks, a = _step_instance()
    with pytest.raises(PreconditionFailed):
        refinement_step(PrincipalFilter(algebra, algebra.atom(0)),
                        blocks, Distribution((0, 1), algebra,
                                             {F(): algebra.one,
                                              F([0]): algebra.element([1, 2, 3]),
                                              F([1]): algebra.one,
                                              F([0, 1]): algebra.element([1, 2, 3])}))
    with pytest.raises(NoFIP):
        refinement_step(PrincipalFilter(algebra, algebra.atom(0)), blocks, a)
    with pytest.raises(ValueError):
        refinement_step(PrincipalFilter(algebra, algebra.one),
                        {F(): algebra.one}, a)
