"""Boolean ultrapowers, partitions, and the Łoś embedding."""

import pytest

from bvmodels.boolalg import Antichain, BoolAlg, big_join, ultrafilter_from_atom
from bvmodels.bvalued import eval_recursive
from bvmodels.errors import NotMaximal, SizeOverflow
from bvmodels.finder import Structure
from bvmodels.logic import Param, Rel, Signature, parse
from bvmodels.ultrapower import (
    InversePartition,
    boolean_ultrapower,
    def_evaluation,
    equivalent,
    los_check,
    partition_map,
    pre_los,
    refinement_evaluation,
    to_canonical,
)

SIG = Signature((("R", 2),), (), ("c",))


def _base():
    return Structure(SIG, 2, {"R": frozenset({(0, 1)})}, {}, {"c": 0})


def test_ultrapower_is_the_full_product():
    power = boolean_ultrapower(_base(), BoolAlg(3))
    assert power.size == 8
    assert set(power.elements) == {
        (a, b, c) for a in (0, 1) for b in (0, 1) for c in (0, 1)
    }
    with pytest.raises(SizeOverflow):
        boolean_ultrapower(_base(), BoolAlg(3), element_cap=7)


def test_partition_maps_partition_the_algebra():
    power = boolean_ultrapower(_base(), BoolAlg(2))
    for index in range(power.size):
        pm = partition_map(power, index)
        assert big_join(power.algebra, pm.values()).is_one
        values = list(pm.values())
        for i, a in enumerate(values):
            for b in values[i + 1:]:
                assert (a & b).is_zero


def test_def_evaluation_matches_recursive_engine():
    base = _base()
    power = boolean_ultrapower(base, BoolAlg(2))
    for text in ("R(#0, #1)", "#0 = #2", "R(#3, #0)"):
        phi = parse(text, SIG)
        assert def_evaluation(base, power, phi) == eval_recursive(power, phi)


def test_pre_los_picks_constant_partitions():
    base = _base()
    power = boolean_ultrapower(base, BoolAlg(2))
    i = pre_los(base, power)
    assert power.elements[i[0]] == (0, 0)
    assert power.elements[i[1]] == (1, 1)


def test_inverse_partitions_convert_and_compare():
    base = _base()
    algebra = BoolAlg(2)
    power = boolean_ultrapower(base, algebra)
    chain = Antichain((algebra.atom(0), algebra.atom(1)))
    ip0 = InversePartition(chain, (0, 1))
    ip1 = InversePartition(Antichain((algebra.atom(1), algebra.atom(0))), (1, 0))
    assert power.elements[to_canonical(ip0, power)] == (0, 1)
    assert equivalent(ip0, ip1, power)
    with pytest.raises(NotMaximal):
        InversePartition(Antichain((algebra.atom(0),)), (0,))


def test_refinement_evaluation_matches_canonical():
    base = _base()
    algebra = BoolAlg(2)
    power = boolean_ultrapower(base, algebra)
    chain = Antichain((algebra.atom(0), algebra.atom(1)))
    ips = (InversePartition(chain, (0, 1)), InversePartition(chain, (1, 1)))
    phi = Rel("R", (Param(0), Param(1)))
    by_refinement = refinement_evaluation(base, algebra, ips, phi)
    canonical = parse("R(#{}, #{})".format(
        to_canonical(ips[0], power), to_canonical(ips[1], power)), SIG)
    assert by_refinement == eval_recursive(power, canonical)


def test_los_check_small_cases():
    for size in (1, 2):
        rel = frozenset((i, j) for i in range(size) for j in range(size) if i < j)
        base = Structure(SIG, size, {"R": rel}, {}, {"c": 0})
        for n in (1, 2):
            algebra = BoolAlg(n)
            for e in range(n):
                report = los_check(base, algebra,
                                   ultrafilter_from_atom(algebra, e),
                                   rank=1, size_cap=4)
                assert report.elementary, report.counterexample
                assert report.isomorphism_ok
                assert sorted(report.isomorphism.values()) == list(range(size))
