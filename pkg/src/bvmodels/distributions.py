"""The distribution calculus over finite index sets.

A distribution assigns a nonzero algebra element to every subset of a
finite index set, monotonically decreasing, with value 1 at the empty
set.  Łoś maps, possibilities, multiplicative and conservative
refinements, goodness, and the realization translations all live here.
"""

from dataclasses import dataclass
from itertools import combinations, product
from typing import Mapping, Optional, Sequence

from .boolalg import BoolAlg, Element, PrincipalFilter, big_meet
from .bvalued import Bundle, eval_recursive, fiber_satisfies
from .errors import (
    EmptyJoin,
    FiberWitnessMissing,
    IndexMismatch,
    NotDownwardClosed,
    NotInFilter,
    NotRealized,
    PreconditionFailed,
)
from .finder import FinderTask, Theory, find_model
from .logic import (
    Eq,
    Formula,
    Param,
    Signature,
    Var,
    conjunction,
    exists_tuple,
    free_vars,
    substitute,
)


def _subsets(index):
    index = tuple(sorted(index))
    for size in range(len(index) + 1):
        for combo in combinations(index, size):
            yield frozenset(combo)


@dataclass(frozen=True)
class Distribution:
    index: tuple
    algebra: BoolAlg
    table: Mapping[frozenset, Element]

    def __post_init__(self):
        object.__setattr__(self, "index", tuple(sorted(self.index)))
        keys = set(self.table)
        if keys != set(_subsets(self.index)):
            raise ValueError("table must cover exactly the subsets of the index set")
        if not self.table[frozenset()].is_one:
            raise ValueError("value at the empty set must be 1")
        for s in keys:
            if self.table[s].is_zero:
                raise ValueError(f"value at {set(s) or '{}'} is 0")
            for i in s:
                if not self.table[s].leq(self.table[s - {i}]):
                    raise ValueError("table is not monotone decreasing")

    def __call__(self, s) -> Element:
        return self.table[frozenset(s)]

    def singleton_meet(self, s) -> Element:
        return big_meet(self.algebra, (self.table[frozenset([i])] for i in s))


def _same_shape(a: Distribution, b: Distribution):
    if a.index != b.index or a.algebra != b.algebra:
        raise IndexMismatch("distributions must share an index set and algebra")


def is_multiplicative(a: Distribution) -> bool:
    return all(a(s) == a.singleton_meet(s) for s in _subsets(a.index))


def refines(b: Distribution, a: Distribution) -> bool:
    _same_shape(a, b)
    return all(b(s).leq(a(s)) for s in _subsets(a.index))


def conservatively_refines(b: Distribution, a: Distribution) -> bool:
    _same_shape(a, b)
    return all(b(s) == a(s) & b.singleton_meet(s) for s in _subsets(a.index))


def is_in_filter(a: Distribution, f: PrincipalFilter) -> bool:
    return all(a(s) in f for s in _subsets(a.index))


def all_distributions(algebra: BoolAlg, index, in_filter: Optional[PrincipalFilter] = None):
    """Every distribution over the index set, in a fixed order; values
    restricted to the filter when one is given.  Exhaustive, so keep
    the algebra and index set small.
    """
    subsets = sorted(_subsets(index), key=lambda s: (len(s), sorted(s)))
    candidates = [
        e for e in algebra.elements()
        if not e.is_zero and (in_filter is None or e in in_filter)
    ]

    def extend(table, pos):
        if pos == len(subsets):
            yield Distribution(tuple(index), algebra, dict(table))
            return
        s = subsets[pos]
        cap = big_meet(algebra, (table[s - {i}] for i in s))
        for value in candidates:
            if value.leq(cap):
                table[s] = value
                yield from extend(table, pos + 1)
                del table[s]

    if not algebra.one.is_zero and (in_filter is None or algebra.one in in_filter):
        yield from extend({frozenset(): algebra.one}, 1)


# -- types and their Łoś maps -------------------------------------------------


@dataclass(frozen=True)
class PartialType:
    """Formulas over variables x̄ with parameters from a host structure;
    every finite subset must have nonzero existential value.
    """

    host: Bundle
    variables: tuple
    formulas: tuple

    def __post_init__(self):
        for phi in self.formulas:
            extra = free_vars(phi) - set(self.variables)
            if extra:
                raise ValueError(f"{phi} has free variables {extra} outside x̄")

    def existential_value(self, chosen: Sequence[Formula]) -> Element:
        if not chosen:
            return self.host.algebra.one
        return eval_recursive(
            self.host, exists_tuple(self.variables, conjunction(chosen))
        )

    def value_at(self, chosen: Sequence[Formula], witness: Sequence[int]) -> Element:
        """Value of the conjunction with x̄ sent to the given elements."""
        if not chosen:
            return self.host.algebra.one
        phi = conjunction(chosen)
        for x, b in zip(self.variables, witness):
            phi = substitute(phi, x, Param(b))
        return eval_recursive(self.host, phi)


def los_map_of_type(p: PartialType) -> Distribution:
    """s maps to the existential value of the conjunction of the s-th
    formulas; index i stands for p.formulas[i].
    """
    index = tuple(range(len(p.formulas)))
    table = {}
    for s in _subsets(index):
        value = p.existential_value([p.formulas[i] for i in sorted(s)])
        if value.is_zero:
            raise EmptyJoin(f"existential value at {sorted(s)} is 0; not a partial type")
        table[s] = value
    return Distribution(index, p.host.algebra, table)


# -- criterion checks ---------------------------------------------------------


@dataclass(frozen=True)
class FormulaSequence:
    """(φ_i(x̄, ȳ_i) : i) with the ȳ_i pairwise disjoint and disjoint
    from x̄; the ȳ_i act as per-formula parameter slots."""

    variables: tuple
    formulas: tuple
    y_vars: tuple  # one tuple of variable names per formula

    def __post_init__(self):
        if len(self.formulas) != len(self.y_vars):
            raise ValueError("one ȳ tuple per formula required")
        seen = set(self.variables)
        for ys in self.y_vars:
            for y in ys:
                if y in seen:
                    raise ValueError(f"variable {y} reused across tuples")
                seen.add(y)
        for phi, ys in zip(self.formulas, self.y_vars):
            extra = free_vars(phi) - set(self.variables) - set(ys)
            if extra:
                raise ValueError(f"{phi} has stray free variables {extra}")

    def parameter_slots(self) -> dict:
        slots = {}
        for ys in self.y_vars:
            for y in ys:
                slots[y] = len(slots)
        return slots

    def sentence_for(self, chosen) -> Optional[Formula]:
        """∃x̄ of the conjunction over the chosen indices, ȳ variables
        replaced by their parameter slots; None for the empty choice
        (true in every nonempty structure)."""
        chosen = sorted(chosen)
        if not chosen:
            return None
        slots = self.parameter_slots()
        parts = []
        for i in chosen:
            phi = self.formulas[i]
            for y in self.y_vars[i]:
                phi = substitute(phi, y, Param(slots[y]))
            parts.append(phi)
        return exists_tuple(self.variables, conjunction(parts))


def _pattern_tasks(a, seq, signature, theory, bound, budget, restrict_to_singletons):
    """Shared engine for the two criteria: for each atom and each index
    subset, demand a model realizing exactly the induced truth pattern.
    Atoms suffice on atomic algebras: any nonzero deciding element has
    the same membership pattern as each atom below it.
    """
    slots = seq.parameter_slots()
    unknown = False
    for e in range(a.algebra.atom_count):
        atom = a.algebra.atom(e)
        if restrict_to_singletons:
            scope = frozenset(i for i in a.index if atom.leq(a(frozenset([i]))))
            scopes = [scope]
        else:
            scopes = list(_subsets(a.index))
        for s in scopes:
            positive, negative = [], []
            for t in _subsets(s):
                sentence = seq.sentence_for(t)
                if sentence is None:
                    continue
                (positive if atom.leq(a(t)) else negative).append(sentence)
            task = FinderTask(
                signature, theory, tuple(positive), tuple(negative), bound, len(slots)
            )
            result = find_model(task, budget)
            if result.status == "none":
                return False
            if result.status == "unknown":
                unknown = True
    return "unknown" if unknown else True


def is_los_map(a: Distribution, seq: FormulaSequence, signature: Signature,
               theory: Theory, bound: int, budget: int = 500_000):
    """True / False / "unknown": for each atom and each s, some model of
    the theory realizes the exact pattern {t ⊆ s : atom ≤ A(t)} of
    existential conjunctions."""
    if len(a.index) != len(seq.formulas):
        raise IndexMismatch("one formula per index required")
    return _pattern_tasks(a, seq, signature, theory, bound, budget, False)


def is_possibility(a: Distribution, seq: FormulaSequence, signature: Signature,
                   theory: Theory, bound: int, budget: int = 500_000):
    """Like the Łoś-map criterion, but each atom is examined only on the
    indices whose singleton values it sits below."""
    if len(a.index) != len(seq.formulas):
        raise IndexMismatch("one formula per index required")
    return _pattern_tasks(a, seq, signature, theory, bound, budget, True)


# -- refinements --------------------------------------------------------------


def find_multiplicative_refinement(
    a: Distribution, f: PrincipalFilter
) -> Distribution:
    """A multiplicative refinement of `a` inside the filter.

    On a finite algebra one always exists: if `a` is not already
    multiplicative, the constant table at a(I) works (it is the
    one-step completeness construction, degenerate because every finite
    meet is available).
    """
    if not is_in_filter(a, f):
        raise NotInFilter("distribution has a value outside the filter")
    if is_multiplicative(a):
        return a
    full = a(frozenset(a.index))
    table = {
        s: (a.algebra.one if not s else full) for s in _subsets(a.index)
    }
    b = Distribution(a.index, a.algebra, table)
    assert is_multiplicative(b) and refines(b, a) and is_in_filter(b, f)
    return b


def transfer_refinement_conservative(
    a: Distribution,
    bc: Distribution,
    c: Distribution,
    u: PrincipalFilter,
) -> Distribution:
    """Given a conservative refinement `bc` of `a` lying in the filter
    and a multiplicative refinement `c` of `a` in the filter, produce a
    multiplicative refinement of `bc` in the filter:
    C'(s) = C(s) ∧ meet of bc-singletons over s.
    """
    if not conservatively_refines(bc, a):
        raise PreconditionFailed("second argument is not a conservative refinement")
    if not (is_multiplicative(c) and refines(c, a) and is_in_filter(c, u)):
        raise PreconditionFailed("third argument is not a multiplicative refinement in the filter")
    if not is_in_filter(bc, u):
        raise PreconditionFailed("the conservative refinement must lie in the filter")
    table = {s: c(s) & bc.singleton_meet(s) for s in _subsets(a.index)}
    out = Distribution(a.index, a.algebra, table)
    assert is_multiplicative(out) and refines(out, bc) and is_in_filter(out, u)
    return out


# -- realization <-> refinement ----------------------------------------------


def realization_to_mult_refinement(
    p: PartialType, witness: Sequence[int], u: PrincipalFilter
) -> Distribution:
    """From a tuple realizing the type at the ultrafilter, the table of
    conjunction values at that tuple: a multiplicative refinement of
    the type's Łoś map in the ultrafilter."""
    for phi in p.formulas:
        if p.value_at([phi], witness) not in u:
            raise NotRealized(f"{phi} fails at the witness modulo the ultrafilter")
    index = tuple(range(len(p.formulas)))
    table = {
        s: p.value_at([p.formulas[i] for i in sorted(s)], witness)
        for s in _subsets(index)
    }
    out = Distribution(index, p.host.algebra, table)
    los = los_map_of_type(p)
    assert is_multiplicative(out) and refines(out, los) and is_in_filter(out, u)
    return out


def realize_from_mult_refinement(
    p: PartialType, bref: Distribution, u: PrincipalFilter
) -> tuple:
    """From a multiplicative refinement of the type's Łoś map in the
    ultrafilter, assemble a realizing tuple fiber by fiber: the atom
    antichain decides every singleton value, each fiber realizes its
    induced finite subtype, and the pieces form an inverse partition.
    Returns element indices, one per type variable."""
    los = los_map_of_type(p)
    if not (is_multiplicative(bref) and refines(bref, los) and is_in_filter(bref, u)):
        raise PreconditionFailed("not a multiplicative refinement of the Łoś map in the filter")
    host = p.host
    algebra = host.algebra
    coords = [[None] * algebra.atom_count for _ in p.variables]
    for e in range(algebra.atom_count):
        atom = algebra.atom(e)
        gamma = [p.formulas[i] for i in bref.index
                 if atom.leq(bref(frozenset([i])))]
        found = None
        for values in product(
            *(sorted({tup[e] for tup in host.elements}) for _ in p.variables)
        ):
            env = dict(zip(p.variables, values))
            if all(fiber_satisfies(host, e, phi, env) for phi in gamma):
                found = values
                break
        if found is None:
            raise FiberWitnessMissing(f"fiber {e} realizes no witness for {gamma}")
        for k, v in enumerate(found):
            coords[k][e] = v
    witness = []
    for k in range(len(p.variables)):
        tup = tuple(coords[k])
        if tup not in host.elements:
            raise FiberWitnessMissing(f"assembled tuple {tup} is not an element")
        witness.append(host.elements.index(tup))
    for phi in p.formulas:
        assert p.value_at([phi], witness) in u
    return tuple(witness)


# -- goodness ------------------------------------------------------------------


@dataclass(frozen=True)
class GoodnessReport:
    good: bool
    checked: int
    failures: tuple = ()


def is_good(f: PrincipalFilter, index, cap: int = 100_000) -> GoodnessReport:
    """Enumerate every distribution over the index set with values in
    the filter and confirm each has a multiplicative refinement there.
    On finite algebras this always succeeds; the point of the report is
    that every witness is re-verified."""
    checked = 0
    failures = []
    for a in all_distributions(f.algebra, tuple(index), f):
        checked += 1
        if checked > cap:
            raise RuntimeError(f"distribution enumeration exceeded {cap}")
        try:
            b = find_multiplicative_refinement(a, f)
        except NotInFilter:
            failures.append(a)
            continue
        if not (is_multiplicative(b) and refines(b, a) and is_in_filter(b, f)):
            failures.append(a)
    return GoodnessReport(not failures, checked, tuple(failures))


def goodness_witness_sets(s, j) -> dict:
    """Finite sets (a_i : i in s) with nonempty intersections exactly on
    the members of the downward-closed family: one fresh token per
    family member, a_i collects the tokens of the sets containing i."""
    s = frozenset(s)
    j = {frozenset(t) for t in j}
    if frozenset() not in j:
        raise NotDownwardClosed("the empty set must belong to the family")
    for t in j:
        if not t <= s:
            raise NotDownwardClosed(f"{set(t)} is not a subset of the index set")
        for i in t:
            if t - {i} not in j:
                raise NotDownwardClosed(f"{set(t)} is in the family but {set(t - {i})} is not")
    tokens = {t: n for n, t in enumerate(sorted(j, key=lambda t: (len(t), sorted(t))))}
    out = {i: frozenset(tokens[t] for t in j if i in t) for i in sorted(s)}
    for size in range(1, len(s) + 1):
        for t in combinations(sorted(s), size):
            inter = frozenset.intersection(*(out[i] for i in t))
            assert bool(inter) == (frozenset(t) in j)
    return out


# -- saturation reports --------------------------------------------------------


@dataclass(frozen=True)
class SaturationEntry:
    distribution: Distribution
    los: object  # True / False / "unknown"
    possibility: object
    refinement: Optional[Distribution]


@dataclass(frozen=True)
class SaturationReport:
    entries: tuple

    @property
    def has_unknown(self) -> bool:
        return any("unknown" in (e.los, e.possibility) for e in self.entries)


def saturates(u: PrincipalFilter, seq: FormulaSequence, signature: Signature,
              theory: Theory, index, bound: int, budget: int = 500_000) -> SaturationReport:
    """Classify every distribution in the ultrafilter over the index set
    as Łoś map / possibility and attach its multiplicative refinement.
    Every Łoś map must come out a possibility as well."""
    entries = []
    for a in all_distributions(u.algebra, tuple(index), u):
        los = is_los_map(a, seq, signature, theory, bound, budget)
        poss = is_possibility(a, seq, signature, theory, bound, budget)
        if los is True and poss is False:
            raise AssertionError("a Łoś map must be a possibility")
        entries.append(SaturationEntry(a, los, poss, find_multiplicative_refinement(a, u)))
    return SaturationReport(tuple(entries))
