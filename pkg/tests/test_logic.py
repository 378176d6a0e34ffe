"""Formula AST, parser, printing, substitution, enumeration."""

import pytest

from bvmodels.errors import CaptureError, ParseError, UnknownSymbol
from bvmodels.logic import (
    And,
    CapExceeded,
    Const,
    Eq,
    Exists,
    Forall,
    Implies,
    Not,
    Or,
    Param,
    Rel,
    Signature,
    Theory,
    Var,
    conjunction,
    enumerate_formulas,
    exists_tuple,
    free_vars,
    params_of,
    parse,
    quantifier_rank,
    substitute,
)

SIG = Signature((("R", 2), ("P", 1)), (("f", 1),), ("c",))


def test_parse_precedence():
    phi = parse("P(x) & P(y) | P(z) -> P(w)", SIG)
    assert isinstance(phi, Implies)
    assert isinstance(phi.left, Or)
    assert isinstance(phi.left.left, And)


def test_implication_is_right_associative():
    phi = parse("P(x) -> P(y) -> P(z)", SIG)
    assert isinstance(phi.right, Implies)


def test_quantifier_body_extends_maximally():
    phi = parse("exists x. P(x) & P(y)", SIG)
    assert isinstance(phi, Exists)
    assert isinstance(phi.body, And)


def test_multi_variable_quantifier():
    phi = parse("exists x, y. R(x, y)", SIG)
    assert phi == Exists("x", Exists("y", Rel("R", (Var("x"), Var("y")))))


def test_signature_classification():
    phi = parse("R(f(c), x)", SIG)
    assert phi == Rel("R", (Const("c").__class__("f", (Const("c"),)) if False
                            else phi.args[0], Var("x")))
    assert phi.args[0].name == "f"
    assert phi.args[0].args == (Const("c"),)


def test_params_parse_and_print():
    phi = parse("R(#0, #1)", SIG)
    assert params_of(phi) == {0, 1}
    assert str(phi) == "R(#0, #1)"


def test_round_trip_fixed_examples():
    texts = [
        "forall x. x = x",
        "(P(x) & !P(y))",
        "((exists q0. R(q0, q0)) & P(c))",
        "exists x. (R(x, c) -> !(x = c))",
        "!(exists x. !P(x))",
    ]
    for text in texts:
        phi = parse(text, SIG)
        assert parse(str(phi), SIG) == phi


def test_parse_errors_carry_positions():
    with pytest.raises(ParseError) as err:
        parse("P(x) &", SIG)
    assert err.value.position == 6
    with pytest.raises(ParseError):
        parse("R(x)", SIG)  # wrong arity
    with pytest.raises(UnknownSymbol):
        parse("g(x) = x", SIG)  # undeclared function


def test_without_signature_equality_backtrack():
    # f(x) = y must parse as an equation, not a relation application
    phi = parse("f(x) = y")
    assert isinstance(phi, Eq)
    assert parse("f(x, y)") == Rel("f", (Var("x"), Var("y")))


def test_substitute_avoids_capture():
    phi = Exists("y", Rel("R", (Var("x"), Var("y"))))
    assert substitute(phi, "x", Param(0)) == Exists(
        "y", Rel("R", (Param(0), Var("y")))
    )
    with pytest.raises(CaptureError):
        substitute(phi, "x", Var("y"))
    # bound occurrences are untouched
    assert substitute(phi, "y", Param(1)) == phi


def test_free_vars_and_rank():
    phi = parse("exists x. (R(x, y) & forall z. P(z))", SIG)
    assert free_vars(phi) == {"y"}
    assert quantifier_rank(phi) == 2
    assert quantifier_rank(parse("P(c)", SIG)) == 0


def test_conjunction_order_and_exists_tuple():
    parts = [parse("P(y)", SIG), parse("P(x)", SIG)]
    assert str(conjunction(parts)) == "(P(x) & P(y))"
    with pytest.raises(Exception):
        conjunction([])
    phi = exists_tuple(("x", "y"), parse("R(x, y)", SIG))
    assert phi == parse("exists x, y. R(x, y)", SIG)


def test_theory_requires_sentences():
    Theory((parse("forall x. P(x) -> P(x)", SIG),))
    with pytest.raises(ValueError):
        Theory((parse("P(x)", SIG),))


def test_enumeration_rank_and_dedup():
    formulas = list(enumerate_formulas(SIG, 1, free_variables=(), params=(0,),
                                       size_cap=3))
    assert formulas
    seen = set()
    for phi in formulas:
        assert quantifier_rank(phi) <= 1
        assert not free_vars(phi)
        assert str(phi) not in seen
        seen.add(str(phi))
        assert parse(str(phi), SIG) == phi
    with pytest.raises(CapExceeded):
        list(enumerate_formulas(SIG, 9, size_cap=3))


def test_printed_forms_reparse_to_same_ast():
    for phi in enumerate_formulas(SIG, 2, free_variables=("x",), params=(),
                                  size_cap=4):
        assert parse(str(phi), SIG) == phi
