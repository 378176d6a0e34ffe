"""Bounded-domain model finder and evaluator for ordinary structures.

`find_model` enumerates interpretations over domain sizes 1..N in a
fixed lexicographic order and returns the first one satisfying the
task, so results are deterministic and golden tests are stable.  A node
budget separates "no model up to the bound" from "search gave up".
"""

from dataclasses import dataclass, field
from itertools import product
from typing import Mapping, Optional

from .errors import UnboundVariable
from .logic import (
    And,
    Const,
    Eq,
    Exists,
    Forall,
    Formula,
    Func,
    Implies,
    Not,
    Or,
    Param,
    Rel,
    Signature,
    Term,
    Theory,
    Var,
)

DEFAULT_NODE_BUDGET = 500_000


@dataclass(frozen=True)
class Structure:
    """An ordinary finite structure: domain {0, ..., size - 1}."""

    signature: Signature
    size: int
    relations: Mapping[str, frozenset] = field(default_factory=dict)
    functions: Mapping[str, Mapping[tuple, int]] = field(default_factory=dict)
    constants: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("domain must be nonempty")
        for name, arity in self.signature.relations:
            table = self.relations.get(name, frozenset())
            for row in table:
                if len(row) != arity or any(not 0 <= v < self.size for v in row):
                    raise ValueError(f"bad row {row} in relation {name}")
        for name, arity in self.signature.functions:
            table = self.functions.get(name)
            if table is None or len(table) != self.size**arity:
                raise ValueError(f"function {name} must be total")
            for args, value in table.items():
                if len(args) != arity or not 0 <= value < self.size:
                    raise ValueError(f"bad entry {args}->{value} in function {name}")
        for name in self.signature.constants:
            if not 0 <= self.constants.get(name, -1) < self.size:
                raise ValueError(f"constant {name} is unassigned or out of domain")

    def domain(self):
        return range(self.size)


def _eval_term(structure: Structure, t: Term, assignment: Mapping) -> int:
    if isinstance(t, Var):
        if t.name not in assignment:
            raise UnboundVariable(f"variable {t.name} has no value")
        return assignment[t.name]
    if isinstance(t, Param):
        if t.index not in assignment:
            raise UnboundVariable(f"parameter #{t.index} has no value")
        return assignment[t.index]
    if isinstance(t, Const):
        if t.name not in structure.constants:
            raise UnboundVariable(f"constant {t.name} is uninterpreted")
        return structure.constants[t.name]
    if isinstance(t, Func):
        args = tuple(_eval_term(structure, a, assignment) for a in t.args)
        return structure.functions[t.name][args]
    raise TypeError(f"not a term: {t!r}")


def eval_ordinary(structure: Structure, phi: Formula, assignment: Optional[Mapping] = None) -> bool:
    """Tarskian truth; variables are assigned by name, parameters by index."""
    env = dict(assignment or {})

    def go(phi, env):
        if isinstance(phi, Eq):
            return _eval_term(structure, phi.left, env) == _eval_term(structure, phi.right, env)
        if isinstance(phi, Rel):
            row = tuple(_eval_term(structure, a, env) for a in phi.args)
            return row in structure.relations.get(phi.name, frozenset())
        if isinstance(phi, Not):
            return not go(phi.sub, env)
        if isinstance(phi, And):
            return go(phi.left, env) and go(phi.right, env)
        if isinstance(phi, Or):
            return go(phi.left, env) or go(phi.right, env)
        if isinstance(phi, Implies):
            return (not go(phi.left, env)) or go(phi.right, env)
        if isinstance(phi, (Exists, Forall)):
            hits = (go(phi.body, {**env, phi.var: v}) for v in structure.domain())
            return any(hits) if isinstance(phi, Exists) else all(hits)
        raise TypeError(f"not a formula: {phi!r}")

    return go(phi, env)


@dataclass(frozen=True)
class FinderTask:
    """One bounded satisfiability instance.

    `param_count` parameters (#0..#param_count-1) are treated as extra
    unknowns valued in the domain; the found assignment is reported.
    """

    signature: Signature
    axioms: Theory
    positive: tuple = ()
    negative: tuple = ()
    bound: int = 2
    param_count: int = 0

    def __post_init__(self):
        if self.bound < 1:
            raise ValueError("domain bound must be >= 1")


@dataclass(frozen=True)
class FinderResult:
    status: str  # "sat" | "none" | "unknown"
    model: Optional[Structure] = None
    params: tuple = ()  # parameter values when sat
    nodes: int = 0


def _interpretations(signature: Signature, n: int):
    """All interpretations of the signature on {0..n-1}, lexicographically.

    Order: constants (sorted by name, values ascending), then function
    tables (rows in argument-tuple order), then relation tables (subsets
    by ascending bit mask over argument tuples in lexicographic order).
    """
    const_names = sorted(signature.constants)
    func_items = sorted(signature.functions)
    rel_items = sorted(signature.relations)

    const_choices = product(range(n), repeat=len(const_names))
    for const_vals in const_choices:
        constants = dict(zip(const_names, const_vals))
        func_tables = []
        for name, arity in func_items:
            rows = list(product(range(n), repeat=arity))
            func_tables.append([dict(zip(rows, vals)) for vals in product(range(n), repeat=len(rows))])
        for funcs in product(*func_tables) if func_tables else [()]:
            functions = {name: table for (name, _), table in zip(func_items, funcs)}
            rel_tables = []
            for name, arity in rel_items:
                rows = list(product(range(n), repeat=arity))
                rel_tables.append(
                    [frozenset(r for j, r in enumerate(rows) if mask >> j & 1)
                     for mask in range(1 << len(rows))]
                )
            for rels in product(*rel_tables) if rel_tables else [()]:
                relations = {name: table for (name, _), table in zip(rel_items, rels)}
                yield Structure(signature, n, relations, functions, constants)


def find_model(task: FinderTask, budget: int = DEFAULT_NODE_BUDGET) -> FinderResult:
    """First structure (and parameter assignment) satisfying the task,
    over domain sizes 1..bound in order; "none" is exhaustive up to the
    bound, "unknown" means the node budget ran out.
    """
    nodes = 0
    for n in range(1, task.bound + 1):
        for structure in _interpretations(task.signature, n):
            for params in product(range(n), repeat=task.param_count):
                nodes += 1
                if nodes > budget:
                    return FinderResult("unknown", nodes=nodes)
                env = dict(enumerate(params))
                if not all(eval_ordinary(structure, phi, env) for phi in task.axioms):
                    continue
                if not all(eval_ordinary(structure, phi, env) for phi in task.positive):
                    continue
                if any(eval_ordinary(structure, phi, env) for phi in task.negative):
                    continue
                return FinderResult("sat", structure, params, nodes)
    return FinderResult("none", nodes=nodes)
