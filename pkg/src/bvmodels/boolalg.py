"""Finite complete Boolean algebras as powerset algebras over an atom set.

Every finite Boolean algebra is atomic and complete, so we represent an
algebra by its atom count and an element by the bit mask of the atoms
below it.  All operations are pure; elements are immutable.
"""

from dataclasses import dataclass
from itertools import combinations, product
from typing import Iterator, Mapping, Optional, Sequence

from .errors import (
    BadIndexing,
    MixedAlgebras,
    NoFIP,
    NotMaximal,
    SizeOverflow,
    ZeroElement,
)

DEFAULT_ATOM_CAP = 16


@dataclass(frozen=True)
class BoolAlg:
    """The powerset algebra over atoms {0, ..., atom_count - 1}."""

    atom_count: int
    atom_labels: Optional[tuple] = None

    def __post_init__(self):
        if self.atom_count < 1:
            raise ValueError("atom_count must be >= 1")
        if self.atom_labels is not None and len(self.atom_labels) != self.atom_count:
            raise ValueError("label count must equal atom_count")

    @property
    def zero(self) -> "Element":
        return Element(self, 0)

    @property
    def one(self) -> "Element":
        return Element(self, (1 << self.atom_count) - 1)

    def atom(self, i: int) -> "Element":
        if not 0 <= i < self.atom_count:
            raise ValueError(f"no atom {i} in P({self.atom_count})")
        return Element(self, 1 << i)

    def atoms(self) -> Iterator["Element"]:
        return (self.atom(i) for i in range(self.atom_count))

    def element(self, atoms) -> "Element":
        mask = 0
        for i in atoms:
            if not 0 <= i < self.atom_count:
                raise ValueError(f"no atom {i} in P({self.atom_count})")
            mask |= 1 << i
        return Element(self, mask)

    def elements(self) -> Iterator["Element"]:
        """All 2^n elements, in mask order (deterministic)."""
        return (Element(self, m) for m in range(1 << self.atom_count))

    def __repr__(self):
        return f"P({self.atom_count})"


@dataclass(frozen=True)
class Element:
    """A subset of the algebra's atom set, stored as a bit mask."""

    algebra: BoolAlg
    mask: int

    @property
    def atoms(self) -> tuple:
        return tuple(i for i in range(self.algebra.atom_count) if self.mask >> i & 1)

    @property
    def is_zero(self) -> bool:
        return self.mask == 0

    @property
    def is_one(self) -> bool:
        return self.mask == (1 << self.algebra.atom_count) - 1

    @property
    def is_atom(self) -> bool:
        return self.mask != 0 and self.mask & (self.mask - 1) == 0

    def _check(self, other: "Element"):
        if self.algebra != other.algebra:
            raise MixedAlgebras(f"{self.algebra} vs {other.algebra}")

    def __and__(self, other: "Element") -> "Element":
        self._check(other)
        return Element(self.algebra, self.mask & other.mask)

    def __or__(self, other: "Element") -> "Element":
        self._check(other)
        return Element(self.algebra, self.mask | other.mask)

    def __invert__(self) -> "Element":
        return Element(self.algebra, self.mask ^ self.algebra.one.mask)

    def leq(self, other: "Element") -> bool:
        self._check(other)
        return self.mask & ~other.mask == 0

    def decides(self, b: "Element") -> bool:
        """True iff self <= b or self <= not-b.  self must be nonzero."""
        if self.is_zero:
            raise ZeroElement("0 decides nothing")
        return self.leq(b) or self.leq(~b)

    def __repr__(self):
        return "{" + ",".join(map(str, self.atoms)) + "}"


def big_meet(algebra: BoolAlg, elements) -> Element:
    """Meet of a finite set of elements; the empty meet is 1."""
    out = algebra.one
    for a in elements:
        out = out & a
    return out


def big_join(algebra: BoolAlg, elements) -> Element:
    """Join of a finite set of elements; the empty join is 0."""
    out = algebra.zero
    for a in elements:
        out = out | a
    return out


# -- antichains --------------------------------------------------------------


@dataclass(frozen=True)
class Antichain:
    """A finite sequence of pairwise-disjoint nonzero elements."""

    members: tuple

    def __post_init__(self):
        ok, _ = antichain_checks(self.members)
        if not ok:
            raise ValueError("members are not an antichain")

    @property
    def algebra(self) -> BoolAlg:
        return self.members[0].algebra

    @property
    def is_maximal(self) -> bool:
        return antichain_checks(self.members)[1]

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)


def antichain_checks(members: Sequence[Element]) -> tuple:
    """(is_antichain, is_maximal) for a sequence of elements.

    Maximality uses the criterion: the meet of the complements is 0,
    equivalently the join of the members is 1.
    """
    members = tuple(members)
    if not members:
        return True, False
    algebra = members[0].algebra
    seen = 0
    for a in members:
        if a.algebra != algebra:
            raise MixedAlgebras("antichain members span distinct algebras")
        if a.is_zero or seen & a.mask:
            return False, False
        seen |= a.mask
    return True, seen == algebra.one.mask


def chain_condition(algebra: BoolAlg) -> int:
    """Least size that no antichain of the algebra attains.

    The largest antichain of P(n) is the atom set, so this is n + 1.
    (Jech takes the least *infinite* such cardinal; we follow the finite
    convention so that the value is informative here.)
    """
    return algebra.atom_count + 1


def all_antichains(algebra: BoolAlg) -> Iterator[tuple]:
    """Exhaustively enumerate antichains (as tuples of elements).

    Intended as a test oracle for small algebras only.
    """
    nonzero = [e for e in algebra.elements() if not e.is_zero]

    def extend(prefix, used_mask, start):
        yield tuple(prefix)
        for i in range(start, len(nonzero)):
            e = nonzero[i]
            if e.mask & used_mask:
                continue
            prefix.append(e)
            yield from extend(prefix, used_mask | e.mask, i + 1)
            prefix.pop()

    yield from extend([], 0, 0)


def independent_family_check(family: Sequence[Antichain]) -> bool:
    """True iff every choice function on the family has nonzero meet.

    Choice functions on subfamilies are covered automatically: a choice
    on a subfamily extends to one on the whole family, and meets only
    shrink under extension.
    """
    family = tuple(family)
    for chain in family:
        if not chain.is_maximal:
            raise NotMaximal("independent families consist of maximal antichains")
    if not family:
        return True
    algebra = family[0].algebra
    for choice in product(*(chain.members for chain in family)):
        if big_meet(algebra, choice).is_zero:
            return False
    return True


def make_independent_family(m: int, d: int, atom_cap: int = DEFAULT_ATOM_CAP):
    """Product construction: P(d^m) with m maximal antichains of size d.

    Atoms are the functions {0..m-1} -> {0..d-1} (encoded base d); the
    i-th antichain partitions them by their i-th coordinate.
    """
    if m < 0 or d < 1:
        raise ValueError("need m >= 0 and d >= 1")
    n = d**m
    if n > atom_cap:
        raise SizeOverflow(f"d^m = {n} exceeds atom cap {atom_cap}")
    algebra = BoolAlg(max(n, 1))
    family = []
    for i in range(m):
        blocks = []
        for v in range(d):
            atoms = [a for a in range(n) if (a // d**i) % d == v]
            blocks.append(algebra.element(atoms))
        family.append(Antichain(tuple(blocks)))
    return algebra, family


# -- filters -----------------------------------------------------------------


@dataclass(frozen=True)
class PrincipalFilter:
    """A filter stored by its generator (on a finite algebra every filter
    is principal, so this representation is lossless)."""

    algebra: BoolAlg
    generator: Element

    def __post_init__(self):
        if self.generator.is_zero:
            raise ZeroElement("a filter generator must be nonzero")

    def __contains__(self, a: Element) -> bool:
        return self.generator.leq(a)

    @property
    def is_ultrafilter(self) -> bool:
        return self.generator.is_atom

    @property
    def is_trivial(self) -> bool:
        return self.generator.is_one

    def members(self) -> Iterator[Element]:
        return (e for e in self.algebra.elements() if self.generator.leq(e))


def filter_ops(generators: Sequence[Element], algebra: Optional[BoolAlg] = None) -> PrincipalFilter:
    """The filter generated by a set of elements (their meet)."""
    generators = tuple(generators)
    if algebra is None:
        if not generators:
            raise ValueError("need an algebra for the empty generator set")
        algebra = generators[0].algebra
    d = big_meet(algebra, generators)
    if d.is_zero:
        raise NoFIP("generators have zero meet")
    return PrincipalFilter(algebra, d)


def ultrafilter_from_atom(algebra: BoolAlg, i: int) -> PrincipalFilter:
    return PrincipalFilter(algebra, algebra.atom(i))


def all_filters(algebra: BoolAlg) -> Iterator[PrincipalFilter]:
    """All filters on the algebra, in generator mask order."""
    for e in algebra.elements():
        if not e.is_zero:
            yield PrincipalFilter(algebra, e)


# -- quotients ---------------------------------------------------------------


@dataclass(frozen=True)
class QuotientMap:
    """Projection B -> B/D, realized on the atoms below D's generator."""

    source: BoolAlg
    target: BoolAlg
    filter: PrincipalFilter
    kept_atoms: tuple  # source atom indices below the generator, ascending

    def project(self, a: Element) -> Element:
        if a.algebra != self.source:
            raise MixedAlgebras("element is not in the quotient's source algebra")
        mask = 0
        for pos, i in enumerate(self.kept_atoms):
            if a.mask >> i & 1:
                mask |= 1 << pos
        return Element(self.target, mask)

    def eq_mod(self, a: Element, b: Element) -> bool:
        """a =_D b, i.e. the complement of the symmetric difference is in D."""
        return self.project(a) == self.project(b)

    def holds_mod_d(self, predicate, *args: Element) -> bool:
        """Evaluate a lattice predicate on the projections of the arguments."""
        return bool(predicate(*(self.project(a) for a in args)))


def quotient(algebra: BoolAlg, d_filter: PrincipalFilter):
    """(B/D, projection) for a principal filter D on B."""
    if d_filter.algebra != algebra:
        raise MixedAlgebras("filter lives on a different algebra")
    kept = d_filter.generator.atoms
    target = BoolAlg(len(kept))
    return target, QuotientMap(algebra, target, d_filter, kept)


# -- regular sequences (finite degree-k surrogate) ---------------------------


@dataclass(frozen=True)
class RegularSequenceReport:
    degree: int
    fip_up_to: int
    deciding_dense: bool
    bounded_by_degree: bool  # no nonzero deciding element under > degree members


def regular_sequence_from_antichain(indexed: Mapping[frozenset, Element]):
    """Build (a_i : i in I) with a_i = join of c_s over index sets s
    containing i, from an antichain indexed by the subsets of I of size
    1..k (the empty set optionally included).

    Returns the sequence together with a report certifying the degree-k
    regularity surrogate.
    """
    keys = [frozenset(s) for s in indexed]
    nonempty = [s for s in keys if s]
    if not nonempty:
        raise BadIndexing("need at least one nonempty index set")
    index_set = sorted(set().union(*nonempty))
    k = max(len(s) for s in nonempty)
    expected = {
        frozenset(c) for size in range(1, k + 1) for c in combinations(index_set, size)
    }
    if set(nonempty) != expected:
        raise BadIndexing(
            f"index sets must be exactly the subsets of {index_set} of size 1..{k}"
        )
    members = [indexed[s] for s in sorted(keys, key=lambda s: (len(s), sorted(s)))]
    ok, _ = antichain_checks(members)
    if not ok:
        raise ValueError("indexed elements are not an antichain")
    algebra = members[0].algebra

    seq = [
        big_join(algebra, (indexed[s] for s in nonempty if i in s)) for i in index_set
    ]

    fip_up_to = 0
    for m in range(1, len(index_set) + 1):
        if all(
            not big_meet(algebra, combo).is_zero
            for combo in combinations(seq, m)
        ):
            fip_up_to = m
        else:
            break

    deciding = [
        e
        for e in algebra.elements()
        if not e.is_zero and all(e.decides(a) for a in seq)
    ]
    deciding_dense = all(
        e.is_zero or any(c.leq(e) for c in deciding) for e in algebra.elements()
    )
    bounded = all(sum(c.leq(a) for a in seq) <= k for c in deciding)

    report = RegularSequenceReport(
        degree=k,
        fip_up_to=fip_up_to,
        deciding_dense=deciding_dense,
        bounded_by_degree=bounded,
    )
    return seq, report
