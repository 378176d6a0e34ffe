"""Finite Boolean-valued model theory: powerset algebras, a bounded
first-order model finder, B-valued structures with dual evaluation
engines, Boolean ultrapowers, the distribution and refinement calculus,
and transfer along surjective algebra homomorphisms."""

__version__ = "0.1.0"

from .boolalg import (
    Antichain,
    BoolAlg,
    Element,
    PrincipalFilter,
    big_join,
    big_meet,
    quotient,
    ultrafilter_from_atom,
)
from .bvalued import (
    Abstract,
    Bundle,
    ValueConstraint,
    compactness_check_and_synthesize,
    convert,
    eval_bv,
    eval_coordinatewise,
    eval_recursive,
    fullness_check,
    make_bundle,
    specialize,
)
from .distributions import (
    Distribution,
    FormulaSequence,
    PartialType,
    find_multiplicative_refinement,
    is_good,
    is_los_map,
    is_multiplicative,
    is_possibility,
    los_map_of_type,
    refines,
)
from .finder import FinderTask, Structure, eval_ordinary, find_model
from .logic import Signature, Theory, parse
from .transfer import (
    AlgebraHom,
    hom_from_atom_map,
    pullback_distribution,
    pushforward,
    refinement_step,
)
from .ultrapower import boolean_ultrapower, los_check
