"""Structures valued in a finite Boolean algebra.

Two interconvertible representations:

* Bundle: one ordinary structure per atom, elements are atom-indexed
  tuples, evaluation is coordinatewise.
* Abstract: an element count plus a table of atomic truth values.

Over a finite algebra every full structure is, up to quotient, a bundle
of its per-atom specializations, which is what makes every criterion in
this package decidable atom by atom.

Formula parameters (`#k`) always denote the structure's k-th element.
Signatures here are relational with constants; function symbols are not
supported in B-valued evaluation.
"""

from dataclasses import dataclass
from itertools import product
from typing import Mapping, Optional, Sequence

from .boolalg import BoolAlg, Element, PrincipalFilter, big_join
from .errors import (
    AxiomViolation,
    BadConstraint,
    FiberCountMismatch,
    ForeignParameter,
    InvalidTuple,
    NotElementary,
    NotUltrafilter,
)
from .finder import FinderTask, Structure, find_model
from .logic import (
    And,
    Const,
    Eq,
    Exists,
    Forall,
    Formula,
    Implies,
    Not,
    Or,
    Param,
    Rel,
    Signature,
    Theory,
    Var,
    enumerate_formulas,
    substitute,
)

DEFAULT_RANK = 2


def _check_relational(signature: Signature):
    if signature.functions:
        raise ValueError("B-valued structures are relational (constants allowed)")


@dataclass(frozen=True)
class Bundle:
    """One fiber per atom; element k is the tuple of its fiber values."""

    algebra: BoolAlg
    signature: Signature
    fibers: tuple
    elements: tuple

    def __post_init__(self):
        _check_relational(self.signature)
        if len(self.fibers) != self.algebra.atom_count:
            raise FiberCountMismatch(
                f"{len(self.fibers)} fibers for {self.algebra.atom_count} atoms"
            )
        for fiber in self.fibers:
            if fiber.signature != self.signature:
                raise ValueError("all fibers must share the bundle signature")
        for tup in self.elements:
            if len(tup) != self.algebra.atom_count:
                raise InvalidTuple(f"{tup} has wrong length")
            for e, v in enumerate(tup):
                if not 0 <= v < self.fibers[e].size:
                    raise InvalidTuple(f"{tup} leaves fiber {e}'s domain")
        if not self.elements:
            raise InvalidTuple("element set must be nonempty")
        for name in self.signature.constants:
            if self.constant_tuple(name) not in self.elements:
                raise InvalidTuple(f"constant {name}'s fiber tuple is not an element")

    @property
    def size(self) -> int:
        return len(self.elements)

    def constant_tuple(self, name: str) -> tuple:
        return tuple(fiber.constants[name] for fiber in self.fibers)

    def constant_index(self, name: str) -> int:
        return self.elements.index(self.constant_tuple(name))

    def atomic_eq(self, i: int, j: int) -> Element:
        a, b = self.elements[i], self.elements[j]
        return self.algebra.element(
            e for e in range(self.algebra.atom_count) if a[e] == b[e]
        )

    def atomic_rel(self, name: str, idxs: Sequence[int]) -> Element:
        rows = [self.elements[i] for i in idxs]
        return self.algebra.element(
            e
            for e in range(self.algebra.atom_count)
            if tuple(r[e] for r in rows) in self.fibers[e].relations.get(name, frozenset())
        )


@dataclass(frozen=True)
class Abstract:
    """Element list plus atomic truth-value tables.

    eq_table keys are ordered pairs (i, j); rel_tables maps a relation
    name to a mapping from index tuples to values.  Missing relation
    rows default to 0.
    """

    algebra: BoolAlg
    signature: Signature
    size: int
    eq_table: Mapping[tuple, Element]
    rel_tables: Mapping[str, Mapping[tuple, Element]]
    constants: Mapping[str, int]

    def __post_init__(self):
        _check_relational(self.signature)
        if self.size < 1:
            raise ValueError("element set must be nonempty")
        self._validate_axioms()

    def _validate_axioms(self):
        one = self.algebra.one
        # (7): distinct elements never have equality value 1
        for i in range(self.size):
            for j in range(self.size):
                if i != j and self.atomic_eq(i, j) == one:
                    raise AxiomViolation(7, f"elements {i} and {j} with equality value 1")
        # (3), per the equality/congruence schema: reflexivity, symmetry,
        # transitivity, and congruence for every relation symbol
        for i in range(self.size):
            if self.atomic_eq(i, i) != one:
                raise AxiomViolation(3, f"reflexivity fails at element {i}")
        for i in range(self.size):
            for j in range(self.size):
                if self.atomic_eq(i, j) != self.atomic_eq(j, i):
                    raise AxiomViolation(3, f"symmetry fails at ({i},{j})")
                for k in range(self.size):
                    if not (self.atomic_eq(i, j) & self.atomic_eq(j, k)).leq(
                        self.atomic_eq(i, k)
                    ):
                        raise AxiomViolation(3, f"transitivity fails at ({i},{j},{k})")
        for name, arity in self.signature.relations:
            for rows in product(range(self.size), repeat=arity):
                for alt in product(range(self.size), repeat=arity):
                    agree = self.algebra.one
                    for a, b in zip(rows, alt):
                        agree = agree & self.atomic_eq(a, b)
                    if not (agree & self.atomic_rel(name, rows)).leq(
                        self.atomic_rel(name, alt)
                    ):
                        raise AxiomViolation(
                            3, f"congruence fails for {name} at {rows} vs {alt}"
                        )

    def atomic_eq(self, i: int, j: int) -> Element:
        return self.eq_table.get((i, j), self.algebra.zero)

    def atomic_rel(self, name: str, idxs: Sequence[int]) -> Element:
        return self.rel_tables.get(name, {}).get(tuple(idxs), self.algebra.zero)

    def constant_index(self, name: str) -> int:
        return self.constants[name]


BValuedStructure = (Bundle, Abstract)


def make_bundle(
    algebra: BoolAlg,
    fibers: Sequence[Structure],
    elements: Optional[Sequence[tuple]] = None,
) -> Bundle:
    """Bundle over the given fibers; default element set = full product.

    The full product is always full (a coordinatewise witness can be
    assembled from per-fiber witnesses).
    """
    fibers = tuple(fibers)
    if len(fibers) != algebra.atom_count:
        raise FiberCountMismatch(f"{len(fibers)} fibers for {algebra.atom_count} atoms")
    if elements is None:
        elements = tuple(product(*(range(f.size) for f in fibers)))
    return Bundle(algebra, fibers[0].signature, fibers, tuple(map(tuple, elements)))


# -- evaluation --------------------------------------------------------------


def _atomic_value(structure, phi) -> Element:
    def idx(t):
        if isinstance(t, Param):
            if not 0 <= t.index < structure.size:
                raise ForeignParameter(f"#{t.index} is not an element index")
            return t.index
        if isinstance(t, Const):
            return structure.constant_index(t.name)
        raise ValueError(f"cannot evaluate term {t} against a B-valued structure")

    if isinstance(phi, Eq):
        return structure.atomic_eq(idx(phi.left), idx(phi.right))
    return structure.atomic_rel(phi.name, [idx(a) for a in phi.args])


def eval_recursive(structure, phi: Formula) -> Element:
    """Evaluate by the defining clauses: complement for negation, meet
    for conjunction, join over all elements for the existential.
    Universal values are computed as the not-exists-not complement; on
    full structures this is the minimum over all elements.
    """
    if isinstance(phi, (Eq, Rel)):
        return _atomic_value(structure, phi)
    if isinstance(phi, Not):
        return ~eval_recursive(structure, phi.sub)
    if isinstance(phi, And):
        return eval_recursive(structure, phi.left) & eval_recursive(structure, phi.right)
    if isinstance(phi, Or):
        return eval_recursive(structure, phi.left) | eval_recursive(structure, phi.right)
    if isinstance(phi, Implies):
        return ~eval_recursive(structure, phi.left) | eval_recursive(structure, phi.right)
    if isinstance(phi, Exists):
        return big_join(
            structure.algebra,
            (
                eval_recursive(structure, substitute(phi.body, phi.var, Param(i)))
                for i in range(structure.size)
            ),
        )
    if isinstance(phi, Forall):
        return ~eval_recursive(structure, Exists(phi.var, Not(phi.body)))
    raise TypeError(f"not a formula: {phi!r}")


def fiber_satisfies(bundle: Bundle, e: int, phi: Formula, env=None) -> bool:
    """Truth of the projected formula in fiber e.  Parameters project to
    their fiber coordinate; quantifiers range over the e-projections of
    the element set; free variables are read from `env`.
    """
    fiber = bundle.fibers[e]
    env = env or {}

    def val(t):
        if isinstance(t, Param):
            if not 0 <= t.index < bundle.size:
                raise ForeignParameter(f"#{t.index} is not an element index")
            return bundle.elements[t.index][e]
        if isinstance(t, Const):
            return fiber.constants[t.name]
        if isinstance(t, Var):
            return env[t.name]
        raise ValueError(f"cannot evaluate term {t}")

    if isinstance(phi, Eq):
        return val(phi.left) == val(phi.right)
    if isinstance(phi, Rel):
        return tuple(map(val, phi.args)) in fiber.relations.get(phi.name, frozenset())
    if isinstance(phi, Not):
        return not fiber_satisfies(bundle, e, phi.sub, env)
    if isinstance(phi, And):
        return fiber_satisfies(bundle, e, phi.left, env) and fiber_satisfies(
            bundle, e, phi.right, env
        )
    if isinstance(phi, Or):
        return fiber_satisfies(bundle, e, phi.left, env) or fiber_satisfies(
            bundle, e, phi.right, env
        )
    if isinstance(phi, Implies):
        return (not fiber_satisfies(bundle, e, phi.left, env)) or fiber_satisfies(
            bundle, e, phi.right, env
        )
    if isinstance(phi, (Exists, Forall)):
        projections = sorted({tup[e] for tup in bundle.elements})
        hits = (
            fiber_satisfies(bundle, e, phi.body, {**env, phi.var: v})
            for v in projections
        )
        return any(hits) if isinstance(phi, Exists) else all(hits)
    raise TypeError(f"not a formula: {phi!r}")


def eval_coordinatewise(bundle: Bundle, phi: Formula) -> Element:
    """Atom e lies in the value iff the e-fiber satisfies the projected
    formula, with quantifiers ranging over the e-projections of the
    element set.
    """
    if not isinstance(bundle, Bundle):
        raise TypeError("coordinatewise evaluation needs a bundle")
    return bundle.algebra.element(
        e for e in range(bundle.algebra.atom_count) if fiber_satisfies(bundle, e, phi)
    )


def eval_bv(structure, phi: Formula, engine: str = "recursive") -> Element:
    """Value of a closed formula whose parameters index elements.

    engine: "recursive", "coordinatewise" (bundles only), or "both"
    (runs both and asserts agreement).
    """
    if engine == "recursive":
        return eval_recursive(structure, phi)
    if engine == "coordinatewise":
        return eval_coordinatewise(structure, phi)
    if engine == "both":
        r = eval_recursive(structure, phi)
        c = eval_coordinatewise(structure, phi)
        if r != c:
            raise AssertionError(f"engines disagree on {phi}: {r} vs {c}")
        return r
    raise ValueError(f"unknown engine {engine!r}")


# -- fullness ----------------------------------------------------------------


def fullness_check(structure, rank: int = DEFAULT_RANK, size_cap: int = 5):
    """(True, None) if every existential value of a rank-bounded formula
    with at most two parameters is attained by an element, otherwise
    (False, witness formula).
    """
    params = tuple(range(min(2, structure.size)))
    for phi in enumerate_formulas(
        structure.signature, rank, free_variables=("x",), params=params, size_cap=size_cap
    ):
        target = eval_recursive(structure, Exists("x", phi))
        attained = any(
            eval_recursive(structure, substitute(phi, "x", Param(i))) == target
            for i in range(structure.size)
        )
        if not attained:
            return False, Exists("x", phi)
    return True, None


# -- specialization and conversion -------------------------------------------


def specialize(structure, ultrafilter: PrincipalFilter):
    """Ordinary structure at an ultrafilter, with the element projection.

    Elements are identified when their equality value lies in the
    ultrafilter; relation rows hold when the atomic value does.
    Returns (Structure, projection tuple indexed by element).
    """
    if ultrafilter.algebra != structure.algebra:
        raise NotUltrafilter("ultrafilter lives on a different algebra")
    if not ultrafilter.is_ultrafilter:
        raise NotUltrafilter("filter generator is not an atom")
    in_u = lambda v: v in ultrafilter

    projection = []
    reps = []
    for i in range(structure.size):
        for cls, rep in enumerate(reps):
            if in_u(structure.atomic_eq(i, rep)):
                projection.append(cls)
                break
        else:
            projection.append(len(reps))
            reps.append(i)

    relations = {}
    for name, arity in structure.signature.relations:
        rows = set()
        for idxs in product(range(len(reps)), repeat=arity):
            if in_u(structure.atomic_rel(name, [reps[c] for c in idxs])):
                rows.add(idxs)
        relations[name] = frozenset(rows)
    constants = {
        name: projection[structure.constant_index(name)]
        for name in structure.signature.constants
    }
    ordinary = Structure(structure.signature, len(reps), relations, {}, constants)
    return ordinary, tuple(projection)


def bundle_to_abstract(bundle: Bundle) -> Abstract:
    eq_table = {
        (i, j): bundle.atomic_eq(i, j)
        for i in range(bundle.size)
        for j in range(bundle.size)
    }
    rel_tables = {}
    for name, arity in bundle.signature.relations:
        rel_tables[name] = {
            idxs: bundle.atomic_rel(name, idxs)
            for idxs in product(range(bundle.size), repeat=arity)
        }
    constants = {name: bundle.constant_index(name) for name in bundle.signature.constants}
    return Abstract(
        bundle.algebra, bundle.signature, bundle.size, eq_table, rel_tables, constants
    )


def abstract_to_bundle(abstract: Abstract) -> Bundle:
    """Specialize at every atom and record each element's image tuple."""
    fibers = []
    projections = []
    for i in range(abstract.algebra.atom_count):
        fiber, projection = specialize(
            abstract, PrincipalFilter(abstract.algebra, abstract.algebra.atom(i))
        )
        fibers.append(fiber)
        projections.append(projection)
    elements = tuple(
        tuple(projections[e][i] for e in range(abstract.algebra.atom_count))
        for i in range(abstract.size)
    )
    return Bundle(abstract.algebra, abstract.signature, tuple(fibers), elements)


def convert(structure):
    """Abstract <-> Bundle, via atomic tabulation / per-atom specialization."""
    if isinstance(structure, Bundle):
        return bundle_to_abstract(structure)
    return abstract_to_bundle(structure)


# -- elementary maps ---------------------------------------------------------


@dataclass(frozen=True)
class PartialElementaryMap:
    source: object
    target: object
    mapping: tuple  # (source index, target index) pairs
    rank: int


@dataclass(frozen=True)
class ElementaryCheck:
    ok: bool
    map: Optional[PartialElementaryMap] = None
    counterexample: Optional[Formula] = None


def remap_params(phi: Formula, mapping: Mapping[int, int]) -> Formula:
    """Rewrite every parameter index through the mapping."""

    def term(t):
        if isinstance(t, Param):
            return Param(mapping[t.index])
        return t

    if isinstance(phi, Eq):
        return Eq(term(phi.left), term(phi.right))
    if isinstance(phi, Rel):
        return Rel(phi.name, tuple(term(a) for a in phi.args))
    if isinstance(phi, Not):
        return Not(remap_params(phi.sub, mapping))
    if isinstance(phi, (And, Or, Implies)):
        return type(phi)(remap_params(phi.left, mapping), remap_params(phi.right, mapping))
    if isinstance(phi, (Exists, Forall)):
        return type(phi)(phi.var, remap_params(phi.body, mapping))
    raise TypeError(f"not a formula: {phi!r}")


def check_elementary(
    mapping: Mapping[int, int],
    source,
    target,
    rank: int = DEFAULT_RANK,
    size_cap: int = 5,
) -> ElementaryCheck:
    """Verify value preservation for all rank-bounded formulas over at
    most two parameters drawn from the mapped set; failure returns the
    first counterexample formula (in source parameter indices).
    """
    mapping = dict(mapping)
    if source.algebra != target.algebra:
        raise NotElementary("source and target share no algebra")
    domain = sorted(mapping)
    pairs = [(a, b) for a in domain for b in domain]
    if not domain:
        pairs = [()]
    seen = set()
    for params in pairs or [()]:
        params = tuple(params) if isinstance(params, tuple) else (params,)
        if params in seen:
            continue
        seen.add(params)
        for phi in enumerate_formulas(
            source.signature, rank, free_variables=(), params=params, size_cap=size_cap
        ):
            if eval_recursive(source, phi) != eval_recursive(
                target, remap_params(phi, mapping)
            ):
                return ElementaryCheck(False, counterexample=phi)
    # elementarity forces injectivity; assert it rather than re-deriving
    if len(set(mapping.values())) != len(mapping):
        raise NotElementary("value-preserving map collided; mapping is inconsistent")
    return ElementaryCheck(
        True, PartialElementaryMap(source, target, tuple(sorted(mapping.items())), rank)
    )


# -- compactness -------------------------------------------------------------


@dataclass(frozen=True)
class ValueConstraint:
    """Formulas over parameters #0..#param_count-1 with lower and upper
    value bounds."""

    algebra: BoolAlg
    param_count: int
    formulas: tuple
    lower: Mapping[Formula, Element]
    upper: Mapping[Formula, Element]

    def __post_init__(self):
        for phi in self.formulas:
            if not self.lower[phi].leq(self.upper[phi]):
                raise BadConstraint(f"lower exceeds upper at {phi}")


@dataclass(frozen=True)
class CompactnessResult:
    status: str  # "sat" | "none" | "unknown"
    structure: Optional[Bundle] = None
    parameter_elements: tuple = ()
    atom_results: tuple = ()


def compactness_check_and_synthesize(
    vc: ValueConstraint,
    theory: Theory,
    signature: Signature,
    bound: int,
    budget: int = 500_000,
) -> CompactnessResult:
    """Per-atom reduction: atom e needs a model of the theory making
    every formula with e below its lower bound true and every formula
    with e below the complement of its upper bound false.  All atoms
    solvable iff a bundle exists; on success the bundle is built from
    the per-atom models and the bounds are re-verified exactly.
    """
    results = []
    for e in range(vc.algebra.atom_count):
        atom = vc.algebra.atom(e)
        positive = tuple(phi for phi in vc.formulas if atom.leq(vc.lower[phi]))
        negative = tuple(phi for phi in vc.formulas if atom.leq(~vc.upper[phi]))
        task = FinderTask(signature, theory, positive, negative, bound, vc.param_count)
        results.append(find_model(task, budget))
    if any(r.status == "unknown" for r in results):
        return CompactnessResult("unknown", atom_results=tuple(results))
    if any(r.status == "none" for r in results):
        return CompactnessResult("none", atom_results=tuple(results))

    bundle = make_bundle(vc.algebra, [r.model for r in results])
    tau = []
    for k in range(vc.param_count):
        tup = tuple(r.params[k] for r in results)
        tau.append(bundle.elements.index(tup))
    mapping = dict(enumerate(tau))
    for phi in vc.formulas:
        value = eval_recursive(bundle, remap_params(phi, mapping))
        assert vc.lower[phi].leq(value) and value.leq(vc.upper[phi]), (
            f"synthesized value for {phi} escapes its bounds"
        )
    return CompactnessResult("sat", bundle, tuple(tau), tuple(results))


# -- bounded amalgamation ----------------------------------------------------


@dataclass(frozen=True)
class AmalgamResult:
    status: str  # "sat" | "unknown"
    amalgam: Optional[Bundle] = None
    map0: Optional[dict] = None
    map1: Optional[dict] = None
    verified_rank: int = -1


def _diagram_constraints(structure: Structure, names: Mapping[int, str]):
    """Quantifier-free diagram of a structure over fresh constant names."""
    positive, negative = [], []
    for a in structure.domain():
        for b in structure.domain():
            phi = Eq(Const(names[a]), Const(names[b]))
            (positive if a == b else negative).append(phi)
    for name, arity in structure.signature.relations:
        table = structure.relations.get(name, frozenset())
        for row in product(structure.domain(), repeat=arity):
            phi = Rel(name, tuple(Const(names[v]) for v in row))
            (positive if row in table else negative).append(phi)
    for cname in structure.signature.constants:
        positive.append(Eq(Const(cname), Const(names[structure.constants[cname]])))
    return positive, negative


def amalgamate_bounded(
    base: Bundle,
    left: Bundle,
    right: Bundle,
    map_left: Mapping[int, int],
    map_right: Mapping[int, int],
    rank: int = DEFAULT_RANK,
    bound: int = 4,
    budget: int = 500_000,
) -> AmalgamResult:
    """Amalgamate two rank-r elementary extensions of a common base,
    atom by atom, by solving for a joint model of both fiber diagrams
    glued along the base.  The returned maps are re-checked and the
    highest rank at which both verify elementary is reported.
    """
    for m, ext in ((map_left, left), (map_right, right)):
        check = check_elementary(m, base, ext, rank)
        if not check.ok:
            raise NotElementary(f"inclusion fails at {check.counterexample}")

    fibers = []
    fiber_maps_left, fiber_maps_right = [], []
    for e in range(base.algebra.atom_count):
        u = PrincipalFilter(base.algebra, base.algebra.atom(e))
        fib_base, proj_base = specialize(base, u)
        fib_left, proj_left = specialize(left, u)
        fib_right, proj_right = specialize(right, u)
        g_left = {proj_base[i]: proj_left[map_left[i]] for i in range(base.size)}
        g_right = {proj_base[i]: proj_right[map_right[i]] for i in range(base.size)}

        lnames = {a: f"_l{a}" for a in fib_left.domain()}
        rnames = {b: f"_r{b}" for b in fib_right.domain()}
        sig = Signature(
            base.signature.relations,
            (),
            base.signature.constants + tuple(lnames.values()) + tuple(rnames.values()),
        )
        pos_l, neg_l = _diagram_constraints(fib_left, lnames)
        pos_r, neg_r = _diagram_constraints(fib_right, rnames)
        glue = [
            Eq(Const(lnames[g_left[c]]), Const(rnames[g_right[c]]))
            for c in fib_base.domain()
        ]
        task = FinderTask(sig, Theory(()), tuple(pos_l + pos_r + glue),
                          tuple(neg_l + neg_r), bound)
        result = find_model(task, budget)
        if result.status != "sat":
            return AmalgamResult("unknown")
        model = result.model
        # strip the gluing constants back off
        fibers.append(
            Structure(
                base.signature,
                model.size,
                {name: model.relations.get(name, frozenset())
                 for name, _ in base.signature.relations},
                {},
                {name: model.constants[name] for name in base.signature.constants},
            )
        )
        fiber_maps_left.append({a: model.constants[lnames[a]] for a in fib_left.domain()})
        fiber_maps_right.append({b: model.constants[rnames[b]] for b in fib_right.domain()})
        # keep the per-atom projections for assembling element maps
        if e == 0:
            projs_left, projs_right = [], []
        projs_left.append(proj_left)
        projs_right.append(proj_right)

    amalgam = make_bundle(base.algebra, fibers)
    f0 = {
        i: amalgam.elements.index(
            tuple(fiber_maps_left[e][projs_left[e][i]] for e in range(len(fibers)))
        )
        for i in range(left.size)
    }
    f1 = {
        j: amalgam.elements.index(
            tuple(fiber_maps_right[e][projs_right[e][j]] for e in range(len(fibers)))
        )
        for j in range(right.size)
    }
    verified = -1
    for r in range(rank + 1):
        if (
            check_elementary(f0, left, amalgam, r).ok
            and check_elementary(f1, right, amalgam, r).ok
        ):
            verified = r
        else:
            break
    return AmalgamResult("sat", amalgam, f0, f1, verified)
