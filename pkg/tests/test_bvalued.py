"""B-valued structures: bundles, evaluation, specialization, compactness."""

import pytest

from bvmodels.boolalg import BoolAlg, ultrafilter_from_atom
from bvmodels.bvalued import (
    Abstract,
    Bundle,
    ValueConstraint,
    abstract_to_bundle,
    amalgamate_bounded,
    bundle_to_abstract,
    check_elementary,
    compactness_check_and_synthesize,
    convert,
    eval_bv,
    eval_coordinatewise,
    eval_recursive,
    fullness_check,
    make_bundle,
    remap_params,
    specialize,
)
from bvmodels.errors import (
    AxiomViolation,
    BadConstraint,
    FiberCountMismatch,
    InvalidTuple,
)
from bvmodels.finder import Structure, eval_ordinary
from bvmodels.logic import Signature, Theory, parse

SIG = Signature((("R", 2),), (), ("c",))
B2 = BoolAlg(2)


def _fiber(size, rel, c=0):
    return Structure(SIG, size, {"R": frozenset(rel)}, {}, {"c": c})


def _bundle():
    return make_bundle(B2, [_fiber(2, {(0, 1)}), _fiber(2, {(1, 0)}, c=1)])


def test_bundle_atomic_values():
    b = _bundle()
    assert b.size == 4
    i = b.elements.index((0, 1))
    j = b.elements.index((1, 0))
    assert b.atomic_eq(i, i).is_one
    assert b.atomic_eq(i, j).is_zero
    # R holds at atom 0 between (0,*) and (1,*), at atom 1 between (*,1) and (*,0)
    assert b.atomic_rel("R", [i, j]) == B2.one
    assert b.atomic_rel("R", [j, i]).is_zero


def test_bundle_validation():
    with pytest.raises(FiberCountMismatch):
        make_bundle(B2, [_fiber(2, set())])
    with pytest.raises(InvalidTuple):
        Bundle(B2, SIG, (_fiber(2, set()), _fiber(2, set())), ((0, 5),))
    with pytest.raises(InvalidTuple):
        # the constant's tuple (0, 0) must be an element
        Bundle(B2, SIG, (_fiber(2, set()), _fiber(2, set())), ((0, 1),))


def test_engines_agree_on_restricted_elements():
    fibers = (_fiber(2, {(0, 1)}), _fiber(2, {(0, 1)}))
    b = Bundle(B2, SIG, fibers, ((0, 0), (1, 1), (0, 1)))
    for text in ("exists x. R(c, x)", "forall x. (R(c, x) -> !(x = c))",
                 "exists x, y. R(x, y)", "exists x. !(exists y. R(x, y))"):
        phi = parse(text, SIG)
        assert eval_recursive(b, phi) == eval_coordinatewise(b, phi)
        assert eval_bv(b, phi, engine="both") == eval_recursive(b, phi)


def test_eval_known_values():
    b = _bundle()
    i = b.elements.index((0, 1))
    phi = parse("exists x. R(#0, x)", SIG)
    phi = remap_params(phi, {0: i})
    # fiber 0: element value 0 has a successor; fiber 1: value 1 relates to 0
    assert eval_recursive(b, phi) == B2.one
    assert eval_recursive(b, parse("R(c, c)", SIG)).is_zero


def test_abstract_round_trip_preserves_atomics():
    b = _bundle()
    a = bundle_to_abstract(b)
    assert isinstance(a, Abstract)
    for i in range(b.size):
        for jdx in range(b.size):
            assert a.atomic_eq(i, jdx) == b.atomic_eq(i, jdx)
            assert a.atomic_rel("R", [i, jdx]) == b.atomic_rel("R", [i, jdx])
    back = abstract_to_bundle(a)
    phi = parse("exists x, y. R(x, y)", SIG)
    assert eval_recursive(back, phi) == eval_recursive(b, phi)
    assert isinstance(convert(b), Abstract) and isinstance(convert(a), Bundle)


def test_abstract_axiom_violations():
    one, zero = B2.one, B2.zero
    with pytest.raises(AxiomViolation) as err:
        Abstract(B2, SIG, 2,
                 {(0, 0): one, (1, 1): one, (0, 1): one, (1, 0): one},
                 {"R": {}}, {"c": 0})
    assert err.value.clause == 7
    a = B2.atom(0)
    with pytest.raises(AxiomViolation) as err:
        # eq(0,1) = eq(1,2) = atom, eq(0,2) = 0 breaks transitivity
        Abstract(B2, SIG, 3,
                 {(0, 0): one, (1, 1): one, (2, 2): one,
                  (0, 1): a, (1, 0): a, (1, 2): a, (2, 1): a,
                  (0, 2): zero, (2, 0): zero},
                 {"R": {}}, {"c": 0})
    assert err.value.clause == 3
    with pytest.raises(AxiomViolation) as err:
        # R(0,0) = 1 but R(1,1) = 0 where 0 and 1 agree on an atom
        Abstract(B2, SIG, 2,
                 {(0, 0): one, (1, 1): one, (0, 1): a, (1, 0): a},
                 {"R": {(0, 0): one}}, {"c": 0})
    assert err.value.clause == 3
    # a well-formed table passes
    Abstract(B2, SIG, 2,
             {(0, 0): one, (1, 1): one, (0, 1): zero, (1, 0): zero},
             {"R": {(0, 0): one}}, {"c": 0})


def test_fullness_of_full_product():
    assert fullness_check(_bundle(), rank=1, size_cap=3) == (True, None)


def test_non_full_restricted_bundle_detected():
    fibers = (_fiber(2, {(0, 0)}), _fiber(2, {(1, 1)}))
    b = Bundle(B2, SIG, fibers, ((0, 0), (1, 1)))
    full, witness = fullness_check(b, rank=1, size_cap=2)
    assert not full and witness is not None


def test_specialize_defining_property():
    b = _bundle()
    for e in range(2):
        u = ultrafilter_from_atom(B2, e)
        quotient, projection = specialize(b, u)
        env = {p: projection[p] for p in range(b.size)}
        for text in ("R(#0, #1)", "exists x. R(x, #2)", "#0 = #3"):
            phi = parse(text, SIG)
            assert (eval_recursive(b, phi) in u) == eval_ordinary(quotient, phi, env)


def test_check_elementary_identity():
    b = _bundle()
    report = check_elementary({i: i for i in range(b.size)}, b, b,
                              rank=1, size_cap=3)
    assert report.ok and report.counterexample is None


def test_value_constraint_validation():
    phi = parse("R(#0, #0)", SIG)
    with pytest.raises(BadConstraint):
        ValueConstraint(B2, 1, (phi,), {phi: B2.one}, {phi: B2.zero})


def test_compactness_sat_and_bounds():
    phi = parse("R(#0, #1)", SIG)
    psi = parse("#0 = #1", SIG)
    vc = ValueConstraint(B2, 2, (phi, psi),
                         {phi: B2.atom(0), psi: B2.zero},
                         {phi: B2.one, psi: B2.zero})
    result = compactness_check_and_synthesize(vc, Theory(()), SIG, 2)
    assert result.status == "sat"
    mapping = dict(enumerate(result.parameter_elements))
    value = eval_recursive(result.structure, remap_params(phi, mapping))
    assert B2.atom(0).leq(value)
    assert eval_recursive(result.structure, remap_params(psi, mapping)).is_zero


def test_compactness_none_on_contradiction():
    phi = parse("R(c, c)", SIG)
    vc = ValueConstraint(B2, 0, (phi,), {phi: B2.one}, {phi: B2.one})
    theory = Theory((parse("forall x. !R(x, x)", SIG),))
    assert compactness_check_and_synthesize(vc, theory, SIG, 3).status == "none"


def test_amalgamation_of_shared_point():
    base = make_bundle(B2, [_fiber(1, set()), _fiber(1, set())])
    result = amalgamate_bounded(base, base, base,
                                {0: 0}, {0: 0}, rank=1, bound=2)
    assert result.status == "sat"
