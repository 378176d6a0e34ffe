"""Homomorphisms between finite algebras and the transfer machinery:
pushforward and pullback of distributions, refinement transfer in both
directions, Łoś-map transfer, and the good-pair / refinement single
steps of the existence construction.

Surjective homomorphisms between finite powerset algebras all arise
from injective atom maps (target atom to source atom), which makes the
kernel computation immediate.
"""

from dataclasses import dataclass
from itertools import combinations
from typing import Mapping, Sequence

from .boolalg import (
    Antichain,
    BoolAlg,
    Element,
    PrincipalFilter,
    big_join,
    big_meet,
    quotient,
)
from .distributions import (
    Distribution,
    _subsets,
    find_multiplicative_refinement,
    is_in_filter,
    is_los_map,
    is_multiplicative,
    refines,
)
from .errors import (
    NoFIP,
    NotInjective,
    NotPregood,
    NotSurjective,
    PreconditionFailed,
    ZeroImage,
)


@dataclass(frozen=True)
class AlgebraHom:
    """Surjective homomorphism induced by an injective atom map: the
    image of a source element is the set of target atoms whose g-image
    it contains."""

    source: BoolAlg
    target: BoolAlg
    atom_map: tuple  # atom_map[y] = source atom index for target atom y

    def __post_init__(self):
        if len(self.atom_map) != self.target.atom_count:
            raise ValueError("one source atom per target atom required")
        for i in self.atom_map:
            if not 0 <= i < self.source.atom_count:
                raise ValueError(f"{i} is not a source atom")
        if len(set(self.atom_map)) != len(self.atom_map):
            raise NotInjective("atom map collides; the homomorphism would not be surjective")

    def __call__(self, a: Element) -> Element:
        if a.algebra != self.source:
            raise ValueError("element is not in the source algebra")
        return self.target.element(
            y for y, i in enumerate(self.atom_map) if a.mask >> i & 1
        )

    def kernel(self) -> PrincipalFilter:
        """Preimage of 1: generated by the join of the mapped atoms."""
        gen = big_join(self.source, (self.source.atom(i) for i in self.atom_map))
        return PrincipalFilter(self.source, gen)

    def minimal_preimage(self, b: Element) -> Element:
        """The join of the mapped atoms only; the canonical section."""
        if b.algebra != self.target:
            raise ValueError("element is not in the target algebra")
        return self.source.element(self.atom_map[y] for y in b.atoms)

    def preimage_filter(self, f1: PrincipalFilter) -> PrincipalFilter:
        """Preimage of a filter on the target; of an ultrafilter at atom
        y, the ultrafilter at the source atom g(y).  The preimage only
        constrains mapped atoms, so its generator is the minimal
        preimage of the target generator."""
        return PrincipalFilter(self.source, self.minimal_preimage(f1.generator))


def hom_from_atom_map(source: BoolAlg, target: BoolAlg, atom_map) -> AlgebraHom:
    if isinstance(atom_map, Mapping):
        atom_map = tuple(atom_map[y] for y in range(target.atom_count))
    return AlgebraHom(source, target, tuple(atom_map))


def kernel_quotient_agrees(j: AlgebraHom) -> bool:
    """The quotient by the kernel is the target, via the induced map."""
    _, projection = quotient(j.source, j.kernel())
    # both are algebras on the mapped atoms; compare through the sort
    # order of the atom map
    order = sorted(range(len(j.atom_map)), key=lambda y: j.atom_map[y])
    for a in j.source.elements():
        image = j(a)
        lifted = frozenset(order[p] for p in projection.project(a).atoms)
        if lifted != frozenset(image.atoms):
            return False
    return True


# -- distribution transfer ----------------------------------------------------


def pushforward(j: AlgebraHom, a0: Distribution) -> Distribution:
    if a0.algebra != j.source:
        raise ValueError("distribution lives on the wrong algebra")
    table = {}
    for s in _subsets(a0.index):
        image = j(a0(s))
        if image.is_zero:
            raise ZeroImage(f"image of the value at {sorted(s)} is 0")
        table[s] = image
    return Distribution(a0.index, j.target, table)


def pullback_distribution(j: AlgebraHom, a1: Distribution) -> Distribution:
    """A distribution on the source pushing forward to the given one.

    Minimal preimages are taken pointwise (with 1 at the empty set),
    the correction table C(s) = meet over t ⊆ t' ⊆ s of
    preimage(t) ∨ ¬preimage(t') measures where they form a
    distribution, and a multiplicative refinement of C in the kernel
    repairs them.
    """
    if a1.algebra != j.target:
        raise NotSurjective("distribution lives on the wrong algebra")
    kernel = j.kernel()
    raw = {s: j.minimal_preimage(a1(s)) for s in _subsets(a1.index)}
    raw[frozenset()] = j.source.one
    correction = {}
    for s in _subsets(a1.index):
        pieces = [
            raw[t] | ~raw[tp]
            for tp in _subsets(s)
            for t in _subsets(tp)
        ]
        correction[s] = big_meet(j.source, pieces)
    d = find_multiplicative_refinement(
        Distribution(a1.index, j.source, correction), kernel
    )
    table = {s: raw[s] & d(s) for s in _subsets(a1.index)}
    a0 = Distribution(a1.index, j.source, table)
    assert pushforward(j, a0).table == a1.table
    return a0


def pull_back_mult_refinement(
    j: AlgebraHom,
    a0: Distribution,
    b1: Distribution,
    u1: PrincipalFilter,
) -> Distribution:
    """From a multiplicative refinement of the pushforward in the target
    ultrafilter, a multiplicative refinement of the original in the
    preimage ultrafilter: lift the singletons, close multiplicatively,
    and repair with a multiplicative refinement in the kernel of
    C(s) = meet over t ⊆ s of a0(t) ∨ ¬lift(t).
    """
    u0 = j.preimage_filter(u1)
    if not is_in_filter(a0, u0):
        raise PreconditionFailed("the distribution is not in the preimage ultrafilter")
    a1 = pushforward(j, a0)
    if not (is_multiplicative(b1) and refines(b1, a1) and is_in_filter(b1, u1)):
        raise PreconditionFailed("not a multiplicative refinement of the pushforward")
    kernel = j.kernel()
    singles = {i: j.minimal_preimage(b1(frozenset([i]))) for i in a0.index}
    lifted = {
        s: big_meet(j.source, (singles[i] for i in s)) for s in _subsets(a0.index)
    }
    correction = {
        s: big_meet(j.source, (a0(t) | ~lifted[t] for t in _subsets(s)))
        for s in _subsets(a0.index)
    }
    d = find_multiplicative_refinement(
        Distribution(a0.index, j.source, correction), kernel
    )
    table = {s: lifted[s] & d(s) for s in _subsets(a0.index)}
    b0 = Distribution(a0.index, j.source, table)
    assert is_multiplicative(b0) and refines(b0, a0) and is_in_filter(b0, u0)
    return b0


def los_transfer_check(j, a0, seq, signature, theory, bound, budget=500_000):
    """(source verdict, target verdict) for the Łoś-map criterion,
    computed independently on both sides.

    A source Łoś map always pushes forward to one: a target
    counterexample atom pulls back along the deciding-element
    construction to a source atom with the same pattern.  The converse
    can fail at source atoms annihilated by the homomorphism, so only
    the forward implication is asserted.
    """
    v0 = is_los_map(a0, seq, signature, theory, bound, budget)
    v1 = is_los_map(pushforward(j, a0), seq, signature, theory, bound, budget)
    if v0 is True and v1 is False:
        raise AssertionError("pushforward of a Łoś map failed the criterion")
    return v0, v1


# -- good pairs ----------------------------------------------------------------


@dataclass(frozen=True)
class GoodPairState:
    """Designated pairs (c_α in the source, c'_α in the target), a
    reserve family of maximal antichains, and a filter, with a cap on
    the depth of the lattice terms considered."""

    designated: tuple  # pairs (Element of B0, Element of B1)
    reserve: tuple  # maximal Antichains of B0
    filter: PrincipalFilter
    term_depth: int = 3

    def __post_init__(self):
        for chain in self.reserve:
            if not chain.is_maximal:
                raise ValueError("reserve antichains must be maximal")

    @property
    def algebra(self) -> BoolAlg:
        return self.filter.algebra


def sigma_values(state: GoodPairState) -> frozenset:
    """All (source value, target value) pairs of lattice terms in the
    designated elements, up to the depth cap; terms are deduplicated
    semantically, so only the value pairs are kept."""
    if not state.designated:
        return frozenset()
    b1 = state.designated[0][1].algebra
    pairs = set(state.designated)
    pairs.add((state.algebra.zero, b1.zero))
    pairs.add((state.algebra.one, b1.one))
    for _ in range(state.term_depth):
        new = set(pairs)
        for v0, v1 in pairs:
            new.add((~v0, ~v1))
            for w0, w1 in pairs:
                new.add((v0 & w0, v1 & w1))
                new.add((v0 | w0, v1 | w1))
        if new == pairs:
            break
        pairs = new
    return frozenset(pairs)


def _choice_meets(reserve: Sequence[Antichain], algebra: BoolAlg):
    """Every x_f: the meet of one block from each antichain of a finite
    subfamily, including the empty choice (value 1); deterministic order."""
    out = [algebra.one]
    for size in range(1, len(reserve) + 1):
        for chains in combinations(range(len(reserve)), size):
            def extend(pos, acc):
                if pos == len(chains):
                    yield acc
                    return
                for block in reserve[chains[pos]].members:
                    yield from extend(pos + 1, acc & block)

            out.extend(extend(0, algebra.one))
    return out


def is_pregood(state: GoodPairState) -> bool:
    """Both conditions: target-1 terms land in the filter at the source,
    and every choice meet stays compatible modulo the filter with every
    term whose target value is nonzero."""
    gen = state.filter.generator
    values = sigma_values(state)
    for v0, v1 in values:
        if v1.is_one and v0 not in state.filter:
            return False
    for xf in _choice_meets(state.reserve, state.algebra):
        for v0, v1 in values:
            if not v1.is_zero and (gen & xf & v0).is_zero:
                return False
    return True


def extend_to_good(state: GoodPairState) -> GoodPairState:
    """Strengthen the filter generator greedily, in element mask order,
    as far as pre-goodness allows.  The result is maximal: no further
    single element can be added."""
    if not is_pregood(state):
        raise NotPregood("cannot extend a state that is not pre-good")
    current = state
    changed = True
    while changed:
        changed = False
        for b in current.algebra.elements():
            gen = current.filter.generator & b
            if gen.is_zero or gen == current.filter.generator:
                continue
            candidate = GoodPairState(
                current.designated,
                current.reserve,
                PrincipalFilter(current.algebra, gen),
                current.term_depth,
            )
            if is_pregood(candidate):
                current = candidate
                changed = True
    return current


def find_witness(state: GoodPairState, a: Element):
    """(x_f, designated index) with x_f ∧ c_α below `a` modulo the
    filter and nonzero modulo the filter; None when `a` is 0 modulo the
    filter.  On a good state a witness always exists otherwise."""
    gen = state.filter.generator
    if (gen & a).is_zero:
        return None
    for xf in _choice_meets(state.reserve, state.algebra):
        for alpha, (c0, c1) in enumerate(state.designated):
            if c1.is_zero:
                continue
            piece = gen & xf & c0
            if piece.is_zero:
                continue
            if (piece & ~a).is_zero:
                return xf, alpha
    return None


# -- the single refinement step ------------------------------------------------


def refinement_step(
    e_filter: PrincipalFilter,
    indexed_antichain: Mapping[frozenset, Element],
    a: Distribution,
):
    """One step of the existence construction: given an antichain
    indexed by all subsets of the index set, compatible with the
    filter, produce the multiplicative refinement
    B(s) = join over t ⊇ s of a(t) ∧ d_t (with B(∅) set to 1, which
    the join formula alone does not guarantee), together with the
    filter generated by the old one and B's range.
    """
    indexed = {frozenset(k): v for k, v in indexed_antichain.items()}
    if set(indexed) != set(_subsets(a.index)):
        raise ValueError("antichain must be indexed by all subsets of the index set")
    if not is_in_filter(a, e_filter):
        raise PreconditionFailed("the distribution must lie in the filter")
    algebra = a.algebra
    gen = e_filter.generator
    for t in _subsets(a.index):
        if (gen & indexed[t]).is_zero:
            raise NoFIP(f"filter generator is incompatible with the block at {sorted(t)}")

    table = {frozenset(): algebra.one}
    for s in _subsets(a.index):
        if not s:
            continue
        table[s] = big_join(
            algebra, (a(t) & indexed[t] for t in _subsets(a.index) if s <= t)
        )
    b = Distribution(a.index, algebra, table)
    assert is_multiplicative(b)
    assert all(b(s).leq(a(s)) for s in _subsets(a.index) if s)
    new_gen = big_meet(algebra, [gen] + [b(s) for s in _subsets(a.index)])
    if new_gen.is_zero:
        raise NoFIP("filter and refinement range lost the finite intersection property")
    return b, PrincipalFilter(algebra, new_gen)
