"""Boolean ultrapowers of finite ordinary structures.

The canonical form of an ultrapower element is the atom-indexed tuple
of base-structure values, so the ultrapower of M over P(n) is exactly
the full product bundle of n copies of M.  Partition maps M -> B and
labeled maximal antichains (inverse partitions) both convert to this
form.
"""

from dataclasses import dataclass
from typing import Optional

from .boolalg import Antichain, BoolAlg, Element, PrincipalFilter, big_join, big_meet
from .errors import NotMaximal, NotUltrafilter, SizeOverflow
from .finder import Structure, eval_ordinary
from .bvalued import Bundle, make_bundle, specialize
from .logic import Formula, enumerate_formulas, params_of

DEFAULT_ELEMENT_CAP = 4096


def boolean_ultrapower(base: Structure, algebra: BoolAlg,
                       element_cap: int = DEFAULT_ELEMENT_CAP) -> Bundle:
    """All atom->M functions, evaluated coordinatewise."""
    if base.size**algebra.atom_count > element_cap:
        raise SizeOverflow(
            f"{base.size}^{algebra.atom_count} elements exceed the cap {element_cap}"
        )
    return make_bundle(algebra, [base] * algebra.atom_count)


def partition_map(bundle: Bundle, index: int):
    """The element as a map M -> B: each base value's preimage of atoms.

    Values are pairwise disjoint and join to 1.
    """
    tup = bundle.elements[index]
    algebra = bundle.algebra
    return {
        m: algebra.element(e for e, v in enumerate(tup) if v == m)
        for m in range(bundle.fibers[0].size)
    }


def def_evaluation(base: Structure, bundle: Bundle, phi: Formula) -> Element:
    """Join, over base-value assignments making the formula true, of the
    meets of the partition values: an evaluation engine independent of
    the bundle machinery, used to cross-check it.
    """
    algebra = bundle.algebra
    params = sorted(params_of(phi))
    maps = {p: partition_map(bundle, p) for p in params}
    pieces = []
    from itertools import product

    for values in product(base.domain(), repeat=len(params)):
        env = dict(zip(params, values))
        if eval_ordinary(base, phi, env):
            pieces.append(big_meet(algebra, (maps[p][env[p]] for p in params)))
    return big_join(algebra, pieces)


def pre_los(base: Structure, bundle: Bundle) -> dict:
    """m maps to the constant partition valuing 1 at m."""
    return {
        m: bundle.elements.index((m,) * bundle.algebra.atom_count)
        for m in base.domain()
    }


# -- inverse partitions ------------------------------------------------------


@dataclass(frozen=True)
class InversePartition:
    """A maximal antichain with blocks labeled by base-structure values."""

    antichain: Antichain
    labels: tuple  # one base value per block

    def __post_init__(self):
        if not self.antichain.is_maximal:
            raise NotMaximal("inverse partitions need maximal antichains")
        if len(self.labels) != len(self.antichain.members):
            raise ValueError("one label per block required")


def to_canonical(ip: InversePartition, bundle: Bundle) -> int:
    """Element index of the partition sending each atom to its block's label."""
    algebra = bundle.algebra
    tup = [None] * algebra.atom_count
    for block, label in zip(ip.antichain.members, ip.labels):
        for e in block.atoms:
            tup[e] = label
    return bundle.elements.index(tuple(tup))


def equivalent(ip0: InversePartition, ip1: InversePartition, bundle: Bundle) -> bool:
    return to_canonical(ip0, bundle) == to_canonical(ip1, bundle)


def refinement_evaluation(base: Structure, algebra: BoolAlg,
                          ips: tuple, phi: Formula) -> Element:
    """Evaluate a formula whose parameter #k denotes ips[k], through the
    common refinement of the antichains: a block contributes iff the
    base structure satisfies the formula on its labels.
    """
    from itertools import product

    blocks = [algebra.one]
    labelings = [{}]
    for k, ip in enumerate(ips):
        new_blocks, new_labelings = [], []
        for block, labeling in zip(blocks, labelings):
            for piece, label in zip(ip.antichain.members, ip.labels):
                refined = block & piece
                if not refined.is_zero:
                    new_blocks.append(refined)
                    new_labelings.append({**labeling, k: label})
        blocks, labelings = new_blocks, new_labelings
    return big_join(
        algebra,
        (
            block
            for block, labeling in zip(blocks, labelings)
            if eval_ordinary(base, phi, labeling)
        ),
    )


# -- the Łoś embedding -------------------------------------------------------


def ordinary_elementary(mapping: dict, source: Structure, target: Structure,
                        rank: int, size_cap: int = 5):
    """(ok, counterexample) for rank-bounded truth preservation between
    ordinary structures, parameters drawn pairwise from the mapped set.
    """
    domain = sorted(mapping)
    pairs = [(a, b) for a in domain for b in domain] or [()]
    seen = set()
    for params in pairs:
        params = params if isinstance(params, tuple) else (params,)
        if params in seen:
            continue
        seen.add(params)
        for phi in enumerate_formulas(
            source.signature, rank, free_variables=(), params=params, size_cap=size_cap
        ):
            env_s = {p: p for p in params}
            env_t = {p: mapping[p] for p in params}
            if eval_ordinary(source, phi, env_s) != eval_ordinary(target, phi, env_t):
                return False, phi
    return True, None


@dataclass(frozen=True)
class LosReport:
    embedding: dict  # base value -> quotient-structure value
    elementary: bool
    counterexample: Optional[Formula]
    isomorphism: Optional[dict]  # quotient value -> base value, when bijective
    isomorphism_ok: bool


def los_check(base: Structure, algebra: BoolAlg, ultrafilter: PrincipalFilter,
              rank: int = 2, size_cap: int = 5) -> LosReport:
    """Build the composite of the pre-Łoś embedding with specialization,
    verify it elementary at the given rank, and exhibit the inverse
    isomorphism (projection to the ultrafilter's atom coordinate).
    """
    if not ultrafilter.is_ultrafilter:
        raise NotUltrafilter("need an ultrafilter")
    bundle = boolean_ultrapower(base, algebra)
    quotient, projection = specialize(bundle, ultrafilter)
    i = pre_los(base, bundle)
    j = {m: projection[i[m]] for m in base.domain()}

    ok, counterexample = ordinary_elementary(j, base, quotient, rank, size_cap)

    atom = ultrafilter.generator.atoms[0]
    # each quotient class is determined by the atom coordinate
    iso = {}
    iso_ok = quotient.size == base.size
    for index, tup in enumerate(bundle.elements):
        cls = projection[index]
        if cls in iso and iso[cls] != tup[atom]:
            iso_ok = False
        iso[cls] = tup[atom]
    if iso_ok:
        back, _ = ordinary_elementary(iso, quotient, base, rank, size_cap)
        iso_ok = back and sorted(iso.values()) == list(base.domain())
    return LosReport(j, ok, counterexample, iso if iso_ok else None, iso_ok)
