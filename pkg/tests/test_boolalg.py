"""Boolean algebra layer: lattice laws, antichains, filters, quotients."""

import pytest
from hypothesis import given, strategies as st

from bvmodels.boolalg import (
    Antichain,
    BoolAlg,
    Element,
    PrincipalFilter,
    all_antichains,
    all_filters,
    antichain_checks,
    big_join,
    big_meet,
    chain_condition,
    filter_ops,
    independent_family_check,
    make_independent_family,
    quotient,
    regular_sequence_from_antichain,
    ultrafilter_from_atom,
)
from bvmodels.errors import MixedAlgebras, NoFIP, SizeOverflow, ZeroElement

B3 = BoolAlg(3)

elements3 = st.integers(min_value=0, max_value=7).map(lambda m: Element(B3, m))


@given(elements3, elements3, elements3)
def test_lattice_laws(a, b, c):
    assert (a & b) == (b & a)
    assert (a | b) == (b | a)
    assert (a & (b | c)) == ((a & b) | (a & c))
    assert ~(a & b) == (~a | ~b)
    assert ~~a == a
    assert a.leq(b) == ((a & b) == a)
    assert (a & ~a).is_zero and (a | ~a).is_one


@given(elements3, elements3)
def test_decides_means_below_or_disjoint(a, b):
    if a.is_zero:
        with pytest.raises(ZeroElement):
            a.decides(b)
    else:
        assert a.decides(b) == (a.leq(b) or a.leq(~b))


def test_element_atom_round_trip():
    for e in B3.elements():
        assert B3.element(e.atoms) == e
    assert B3.atom(1).atoms == (1,)
    assert B3.zero.is_zero and B3.one.is_one
    assert all(a.is_atom for a in B3.atoms())


def test_mixed_algebras_rejected():
    with pytest.raises(MixedAlgebras):
        B3.one & BoolAlg(2).one


def test_big_meet_and_join_identities():
    assert big_meet(B3, []).is_one
    assert big_join(B3, []).is_zero
    assert big_meet(B3, B3.atoms()).is_zero
    assert big_join(B3, B3.atoms()).is_one


def test_antichain_checks_against_exhaustive_oracle():
    enumerated = {
        frozenset(e.mask for e in chain) for chain in all_antichains(B3)
    }
    for members in enumerated:
        ok, _ = antichain_checks([Element(B3, m) for m in members])
        assert ok
    # a comparable pair is never an antichain
    ok, _ = antichain_checks([B3.atom(0), B3.atom(0) | B3.atom(1)])
    assert not ok


def test_chain_condition_matches_largest_antichain():
    for n in (1, 2, 3):
        algebra = BoolAlg(n)
        largest = max(len(chain) for chain in all_antichains(algebra))
        assert largest == n
        assert chain_condition(algebra) == largest + 1


def test_antichain_maximality():
    assert Antichain(tuple(B3.atoms())).is_maximal
    assert not Antichain((B3.atom(0), B3.atom(1))).is_maximal


def test_independent_family_product_construction():
    algebra, family = make_independent_family(2, 2)
    assert algebra.atom_count == 4
    assert independent_family_check(family)
    for chain in family:
        assert chain.is_maximal and len(chain) == 2
    with pytest.raises(SizeOverflow):
        make_independent_family(5, 2)


def test_dependent_family_detected():
    blocks = Antichain((B3.atom(0), B3.atom(1) | B3.atom(2)))
    assert not independent_family_check([blocks, blocks])


def test_filters_basics():
    filters = list(all_filters(B3))
    assert len(filters) == 7
    assert sum(f.is_ultrafilter for f in filters) == 3
    u = ultrafilter_from_atom(B3, 2)
    # an ultrafilter decides every element
    for e in B3.elements():
        assert (e in u) != (~e in u)
    with pytest.raises(ZeroElement):
        PrincipalFilter(B3, B3.zero)


def test_filter_ops_meet_and_fip():
    f = filter_ops([B3.element([0, 1]), B3.element([1, 2])])
    assert f.generator == B3.atom(1)
    with pytest.raises(NoFIP):
        filter_ops([B3.atom(0), B3.atom(1)])
    assert sorted(e.mask for e in f.members()) == sorted(
        e.mask for e in B3.elements() if f.generator.leq(e)
    )


def test_quotient_is_a_homomorphism():
    d = PrincipalFilter(B3, B3.element([0, 2]))
    target, proj = quotient(B3, d)
    assert target.atom_count == 2
    for a in B3.elements():
        for b in B3.elements():
            assert proj.project(a & b) == proj.project(a) & proj.project(b)
            assert proj.project(a | b) == proj.project(a) | proj.project(b)
        assert proj.project(~a) == ~proj.project(a)
    assert proj.eq_mod(B3.atom(0), B3.element([0, 1]))
    assert not proj.eq_mod(B3.atom(0), B3.atom(2))


def test_regular_sequence_degree_two():
    # singleton blocks for the six subsets of {0,1,2} of size 1..2
    keys = [frozenset([0]), frozenset([1]), frozenset([2]),
            frozenset([0, 1]), frozenset([0, 2]), frozenset([1, 2])]
    algebra = BoolAlg(6)
    indexed = {s: algebra.atom(i) for i, s in enumerate(keys)}
    seq, report = regular_sequence_from_antichain(indexed)
    assert report.degree == 2
    assert report.fip_up_to == 2  # the triple meet is empty by design
    assert report.deciding_dense
    assert report.bounded_by_degree
    assert big_meet(algebra, seq).is_zero
