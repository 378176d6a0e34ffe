"""Bounded model finder and ordinary Tarskian evaluation."""

import pytest

from bvmodels.finder import FinderTask, Structure, eval_ordinary, find_model
from bvmodels.logic import Signature, Theory, parse

SIG = Signature((("R", 2),), (), ("c",))
SIG_UNARY = Signature((("P", 1),), (), ())


def _theory(*texts, sig=SIG):
    return Theory(tuple(parse(t, sig) for t in texts))


def test_eval_ordinary_truth_table():
    m = Structure(SIG, 2, {"R": frozenset({(0, 1)})}, {}, {"c": 0})
    assert eval_ordinary(m, parse("R(c, #1)", SIG), {1: 1})
    assert not eval_ordinary(m, parse("R(#1, c)", SIG), {1: 1})
    assert eval_ordinary(m, parse("exists x. R(c, x)", SIG), {})
    assert not eval_ordinary(m, parse("forall x. R(c, x)", SIG), {})
    assert eval_ordinary(m, parse("exists x. (R(c, x) -> !(x = c))", SIG), {})


def test_find_model_returns_least_model():
    task = FinderTask(SIG, _theory("forall x. R(x, x)"),
                      (parse("exists x. R(x, x)", SIG),), (), 2, 0)
    result = find_model(task)
    assert result.status == "sat"
    # smallest size, then lexicographically least interpretation
    assert result.model.size == 1
    assert result.model.relations["R"] == frozenset({(0, 0)})
    assert result.model.constants["c"] == 0


def test_find_model_none_when_unsatisfiable():
    task = FinderTask(SIG, _theory("forall x. !R(x, x)"),
                      (parse("R(c, c)", SIG),), (), 3, 0)
    result = find_model(task)
    assert result.status == "none"
    assert result.model is None


def test_find_model_unknown_on_tiny_budget():
    task = FinderTask(SIG, Theory(()),
                      (parse("exists x, y. (R(x, y) & !R(y, x))", SIG),), (), 3, 0)
    result = find_model(task, budget=2)
    assert result.status == "unknown"


def test_find_model_solves_parameters():
    task = FinderTask(SIG_UNARY, _theory("exists x. P(x)", sig=SIG_UNARY),
                      (parse("P(#0)", SIG_UNARY),
                       parse("!P(#1)", SIG_UNARY)), (), 2, 2)
    result = find_model(task)
    assert result.status == "sat"
    p0, p1 = result.params
    rows = result.model.relations["P"]
    assert (p0,) in rows and (p1,) not in rows


def test_find_model_is_deterministic():
    task = FinderTask(SIG, Theory(()),
                      (parse("exists x. !R(x, x)", SIG),),
                      (parse("forall x. R(x, c)", SIG),), 2, 1)
    first = find_model(task)
    second = find_model(task)
    assert first.status == second.status == "sat"
    assert first.model == second.model and first.params == second.params


def test_negative_constraints_respected():
    task = FinderTask(SIG_UNARY, Theory(()), (),
                      (parse("exists x. P(x)", SIG_UNARY),), 2, 0)
    result = find_model(task)
    assert result.status == "sat"
    assert result.model.relations["P"] == frozenset()


def test_structure_validation():
    with pytest.raises(ValueError):
        Structure(SIG, 2, {"R": frozenset({(0, 2)})}, {}, {"c": 0})
    with pytest.raises(ValueError):
        Structure(SIG, 2, {"R": frozenset()}, {}, {"c": 5})
