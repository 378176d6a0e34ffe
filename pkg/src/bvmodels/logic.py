"""First-order signatures, terms, formulas, parsing and bounded enumeration.

Formulas carry parameters as first-class AST leaves (`#k`), referring to
domain elements by index, so formulas-with-parameters stay lightweight.
Universal quantification is a real AST node but its semantics everywhere
are the not-exists-not reading.
"""

import re
from dataclasses import dataclass
from itertools import product
from typing import Optional, Sequence

from .errors import CaptureError, CapExceeded, ParseError, UnknownSymbol


@dataclass(frozen=True)
class Signature:
    relations: tuple = ()  # (name, arity) pairs
    functions: tuple = ()
    constants: tuple = ()

    def __post_init__(self):
        names = [n for n, _ in self.relations] + [n for n, _ in self.functions]
        names += list(self.constants)
        if len(set(names)) != len(names):
            raise ValueError("symbol names must be unique")
        for _, arity in self.relations + self.functions:
            if arity < 1:
                raise ValueError("relation/function arities must be >= 1")

    @property
    def relation_arities(self) -> dict:
        return dict(self.relations)

    @property
    def function_arities(self) -> dict:
        return dict(self.functions)


# -- terms -------------------------------------------------------------------


@dataclass(frozen=True)
class Term:
    pass


@dataclass(frozen=True)
class Var(Term):
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Const(Term):
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Param(Term):
    """Reference to a domain element, printed `#k`."""

    index: int

    def __str__(self):
        return f"#{self.index}"


@dataclass(frozen=True)
class Func(Term):
    name: str
    args: tuple

    def __str__(self):
        return f"{self.name}({', '.join(map(str, self.args))})"


# -- formulas ----------------------------------------------------------------


@dataclass(frozen=True)
class Formula:
    pass


@dataclass(frozen=True)
class Eq(Formula):
    left: Term
    right: Term

    def __str__(self):
        return f"{self.left} = {self.right}"


@dataclass(frozen=True)
class Rel(Formula):
    name: str
    args: tuple

    def __str__(self):
        return f"{self.name}({', '.join(map(str, self.args))})"


@dataclass(frozen=True)
class Not(Formula):
    sub: Formula

    def __str__(self):
        if isinstance(self.sub, Rel):
            return f"!{self.sub}"
        return f"!({self.sub})"


def _left_operand(phi) -> str:
    # a quantifier body extends maximally, so a quantified left operand
    # needs its own parentheses to reparse unambiguously
    if isinstance(phi, (Exists, Forall)):
        return f"({phi})"
    return str(phi)


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula

    def __str__(self):
        return f"({_left_operand(self.left)} & {self.right})"


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula

    def __str__(self):
        return f"({_left_operand(self.left)} | {self.right})"


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula

    def __str__(self):
        return f"({_left_operand(self.left)} -> {self.right})"


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    body: Formula

    def __str__(self):
        return f"exists {self.var}. {self.body}"


@dataclass(frozen=True)
class Forall(Formula):
    """Universal quantifier; evaluated as not-exists-not throughout."""

    var: str
    body: Formula

    def __str__(self):
        return f"forall {self.var}. {self.body}"


@dataclass(frozen=True)
class Theory:
    """A finite list of sentences."""

    sentences: tuple

    def __post_init__(self):
        for phi in self.sentences:
            if free_vars(phi):
                raise ValueError(f"theory axiom is not closed: {phi}")

    def __iter__(self):
        return iter(self.sentences)

    def __len__(self):
        return len(self.sentences)


# -- structural utilities ----------------------------------------------------


def term_vars(t: Term) -> frozenset:
    if isinstance(t, Var):
        return frozenset([t.name])
    if isinstance(t, Func):
        return frozenset().union(*(term_vars(a) for a in t.args)) if t.args else frozenset()
    return frozenset()


def term_params(t: Term) -> frozenset:
    if isinstance(t, Param):
        return frozenset([t.index])
    if isinstance(t, Func):
        return frozenset().union(*(term_params(a) for a in t.args)) if t.args else frozenset()
    return frozenset()


def free_vars(phi: Formula) -> frozenset:
    if isinstance(phi, Eq):
        return term_vars(phi.left) | term_vars(phi.right)
    if isinstance(phi, Rel):
        return frozenset().union(*(term_vars(a) for a in phi.args)) if phi.args else frozenset()
    if isinstance(phi, Not):
        return free_vars(phi.sub)
    if isinstance(phi, (And, Or, Implies)):
        return free_vars(phi.left) | free_vars(phi.right)
    if isinstance(phi, (Exists, Forall)):
        return free_vars(phi.body) - {phi.var}
    raise TypeError(f"not a formula: {phi!r}")


def params_of(phi: Formula) -> frozenset:
    if isinstance(phi, Eq):
        return term_params(phi.left) | term_params(phi.right)
    if isinstance(phi, Rel):
        return frozenset().union(*(term_params(a) for a in phi.args)) if phi.args else frozenset()
    if isinstance(phi, Not):
        return params_of(phi.sub)
    if isinstance(phi, (And, Or, Implies)):
        return params_of(phi.left) | params_of(phi.right)
    if isinstance(phi, (Exists, Forall)):
        return params_of(phi.body)
    raise TypeError(f"not a formula: {phi!r}")


def quantifier_rank(phi: Formula) -> int:
    if isinstance(phi, (Eq, Rel)):
        return 0
    if isinstance(phi, Not):
        return quantifier_rank(phi.sub)
    if isinstance(phi, (And, Or, Implies)):
        return max(quantifier_rank(phi.left), quantifier_rank(phi.right))
    if isinstance(phi, (Exists, Forall)):
        return quantifier_rank(phi.body) + 1
    raise TypeError(f"not a formula: {phi!r}")


def _subst_term(t: Term, var: str, replacement: Term) -> Term:
    if isinstance(t, Var):
        return replacement if t.name == var else t
    if isinstance(t, Func):
        return Func(t.name, tuple(_subst_term(a, var, replacement) for a in t.args))
    return t


def substitute(phi: Formula, var: str, replacement: Term) -> Formula:
    """Replace free occurrences of `var` by a term (typically a Param)."""
    if isinstance(phi, Eq):
        return Eq(_subst_term(phi.left, var, replacement), _subst_term(phi.right, var, replacement))
    if isinstance(phi, Rel):
        return Rel(phi.name, tuple(_subst_term(a, var, replacement) for a in phi.args))
    if isinstance(phi, Not):
        return Not(substitute(phi.sub, var, replacement))
    if isinstance(phi, (And, Or, Implies)):
        return type(phi)(
            substitute(phi.left, var, replacement), substitute(phi.right, var, replacement)
        )
    if isinstance(phi, (Exists, Forall)):
        if phi.var == var:
            return phi
        if phi.var in term_vars(replacement) and var in free_vars(phi.body):
            raise CaptureError(f"substitution would capture {phi.var}")
        return type(phi)(phi.var, substitute(phi.body, var, replacement))
    raise TypeError(f"not a formula: {phi!r}")


def conjunction(formulas: Sequence[Formula]) -> Formula:
    """Right-nested conjunction in a fixed (printed-form) order."""
    ordered = sorted(formulas, key=str)
    if not ordered:
        raise ValueError("empty conjunction; handle the empty case at the call site")
    out = ordered[-1]
    for phi in reversed(ordered[:-1]):
        out = And(phi, out)
    return out


def exists_tuple(variables: Sequence[str], body: Formula) -> Formula:
    for v in reversed(list(variables)):
        body = Exists(v, body)
    return body


# -- parsing -----------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<param>#\d+)"
    r"|(?P<op>->|[()&|!=,.]))"
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            if text[pos:].strip() == "":
                break
            raise ParseError(f"unexpected character {text[pos:].lstrip()[0]!r}",
                             len(text) - len(text[pos:].lstrip()))
        start = m.start("ident") if m.group("ident") else (
            m.start("param") if m.group("param") else m.start("op"))
        tokens.append((m.group("ident") or m.group("param") or m.group("op"), start))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str, signature: Optional[Signature]):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.sig = signature

    def peek(self):
        return self.tokens[self.i][0] if self.i < len(self.tokens) else None

    def pos(self):
        return self.tokens[self.i][1] if self.i < len(self.tokens) else len(self.text)

    def take(self, expected=None):
        if self.i >= len(self.tokens):
            raise ParseError(f"unexpected end of input, expected {expected or 'more'}",
                             len(self.text))
        tok, pos = self.tokens[self.i]
        if expected is not None and tok != expected:
            raise ParseError(f"expected {expected!r}, found {tok!r}", pos)
        self.i += 1
        return tok

    def parse(self) -> Formula:
        phi = self.implication()
        if self.i < len(self.tokens):
            raise ParseError(f"trailing input {self.peek()!r}", self.pos())
        return phi

    def implication(self) -> Formula:
        left = self.disjunction()
        if self.peek() == "->":
            self.take()
            return Implies(left, self.implication())
        return left

    def disjunction(self) -> Formula:
        out = self.conjunction()
        while self.peek() == "|":
            self.take()
            out = Or(out, self.conjunction())
        return out

    def conjunction(self) -> Formula:
        out = self.unary()
        while self.peek() == "&":
            self.take()
            out = And(out, self.unary())
        return out

    def unary(self) -> Formula:
        tok = self.peek()
        if tok == "!":
            self.take()
            return Not(self.unary())
        if tok in ("exists", "forall"):
            kind = Exists if tok == "exists" else Forall
            self.take()
            names = [self.ident()]
            while self.peek() == ",":
                self.take()
                names.append(self.ident())
            self.take(".")
            body = self.implication()
            for name in reversed(names):
                body = kind(name, body)
            return body
        return self.atom()

    def ident(self) -> str:
        tok = self.peek()
        if tok is None or not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", tok):
            raise ParseError(f"expected an identifier, found {tok!r}", self.pos())
        return self.take()

    def atom(self) -> Formula:
        tok = self.peek()
        if tok == "(":
            self.take()
            phi = self.implication()
            self.take(")")
            return phi
        # Either a relation application or a term followed by '='.
        if tok is not None and re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", tok):
            if self.sig is not None and tok in self.sig.relation_arities:
                name = self.take()
                args = self.arg_list()
                arity = self.sig.relation_arities[name]
                if len(args) != arity:
                    raise ParseError(f"{name} expects {arity} arguments", self.pos())
                return Rel(name, args)
            if self.sig is None and self.i + 1 < len(self.tokens) and self.tokens[self.i + 1][0] == "(":
                # Without a signature an applied symbol is a relation unless
                # an '=' follows the closing parenthesis.
                save = self.i
                name = self.take()
                args = self.arg_list()
                if self.peek() == "=":
                    self.i = save
                else:
                    return Rel(name, args)
        left = self.term()
        self.take("=")
        right = self.term()
        return Eq(left, right)

    def arg_list(self) -> tuple:
        self.take("(")
        args = [self.term()]
        while self.peek() == ",":
            self.take()
            args.append(self.term())
        self.take(")")
        return tuple(args)

    def term(self) -> Term:
        tok = self.peek()
        if tok is None:
            raise ParseError("expected a term", self.pos())
        if tok.startswith("#"):
            self.take()
            return Param(int(tok[1:]))
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", tok) or tok in ("exists", "forall"):
            raise ParseError(f"expected a term, found {tok!r}", self.pos())
        name = self.take()
        if self.peek() == "(":
            if self.sig is not None:
                if name not in self.sig.function_arities:
                    raise UnknownSymbol(f"{name} is not a function symbol")
                args = self.arg_list()
                if len(args) != self.sig.function_arities[name]:
                    raise ParseError(f"{name} expects {self.sig.function_arities[name]} arguments",
                                     self.pos())
                return Func(name, args)
            return Func(name, self.arg_list())
        if self.sig is not None and name in self.sig.constants:
            return Const(name)
        return Var(name)


def parse(text: str, signature: Optional[Signature] = None) -> Formula:
    """Parse a formula; `print(parse(t))` reparses to an equal AST.

    With a signature, identifiers are classified as relations, functions,
    constants or variables; without one, every unapplied identifier is a
    variable.
    """
    return _Parser(text, signature).parse()


# -- JSON AST export ---------------------------------------------------------


def term_to_json(t: Term):
    if isinstance(t, Var):
        return {"var": t.name}
    if isinstance(t, Const):
        return {"const": t.name}
    if isinstance(t, Param):
        return {"param": t.index}
    return {"func": t.name, "args": [term_to_json(a) for a in t.args]}


def formula_to_json(phi: Formula):
    if isinstance(phi, Eq):
        return {"eq": [term_to_json(phi.left), term_to_json(phi.right)]}
    if isinstance(phi, Rel):
        return {"rel": phi.name, "args": [term_to_json(a) for a in phi.args]}
    if isinstance(phi, Not):
        return {"not": formula_to_json(phi.sub)}
    if isinstance(phi, And):
        return {"and": [formula_to_json(phi.left), formula_to_json(phi.right)]}
    if isinstance(phi, Or):
        return {"or": [formula_to_json(phi.left), formula_to_json(phi.right)]}
    if isinstance(phi, Implies):
        return {"implies": [formula_to_json(phi.left), formula_to_json(phi.right)]}
    if isinstance(phi, Exists):
        return {"exists": phi.var, "body": formula_to_json(phi.body)}
    if isinstance(phi, Forall):
        return {"forall": phi.var, "body": formula_to_json(phi.body)}
    raise TypeError(f"not a formula: {phi!r}")


# -- bounded enumeration -----------------------------------------------------

RANK_CAP = 3
_QVARS = ("q0", "q1", "q2")


def enumerate_formulas(
    signature: Signature,
    rank: int,
    free_variables: Sequence[str] = (),
    params: Sequence[int] = (),
    size_cap: int = 7,
    rank_cap: int = RANK_CAP,
):
    """All formulas of quantifier rank <= rank and AST size <= size_cap
    over the connectives !, &, exists, deterministically ordered and
    duplicate-free modulo printed form.
    """
    if rank > rank_cap:
        raise CapExceeded(f"rank {rank} exceeds cap {rank_cap}")

    def atomic(variables):
        terms = [Var(v) for v in variables]
        terms += [Const(c) for c in signature.constants]
        terms += [Param(i) for i in params]
        for name, arity in signature.functions:
            for args in product(terms, repeat=arity):
                terms.append(Func(name, args))
        atoms = []
        for l, r in product(terms, repeat=2):
            atoms.append(Eq(l, r))
        for name, arity in signature.relations:
            for args in product(terms, repeat=arity):
                atoms.append(Rel(name, args))
        return atoms

    def build(variables, depth):
        # by_size[k] lists formulas of AST size k (atoms have size 1)
        by_size = [[] for _ in range(size_cap + 1)]
        if len(by_size) > 1:
            by_size[1] = atomic(variables)
        if depth > 0:
            qv = _QVARS[len(variables) - len(free_variables)]
            inner = build(tuple(variables) + (qv,), depth - 1)
            for phi in inner:
                size = _ast_size(phi)
                if size + 1 <= size_cap:
                    by_size[size + 1].append(Exists(qv, phi))
        for size in range(2, size_cap + 1):
            for phi in list(by_size[size - 1]):
                by_size[size].append(Not(phi))
            for lsize in range(1, size - 1):
                rsize = size - 1 - lsize
                for l in by_size[lsize]:
                    for r in by_size[rsize]:
                        by_size[size].append(And(l, r))
        out = []
        for bucket in by_size:
            out.extend(bucket)
        return out

    seen = set()
    for phi in build(tuple(free_variables), rank):
        key = str(phi)
        if key not in seen:
            seen.add(key)
            yield phi


def _ast_size(phi: Formula) -> int:
    if isinstance(phi, (Eq, Rel)):
        return 1
    if isinstance(phi, Not):
        return 1 + _ast_size(phi.sub)
    if isinstance(phi, (And, Or, Implies)):
        return 1 + _ast_size(phi.left) + _ast_size(phi.right)
    if isinstance(phi, (Exists, Forall)):
        return 1 + _ast_size(phi.body)
    raise TypeError(f"not a formula: {phi!r}")
