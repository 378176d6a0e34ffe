"""JSON encodings for every value the CLI reads or writes.

Loaders validate and raise FormatError with a JSON pointer to the
offending field; dumps use sorted keys so canonical files are stable.
"""

import json

from .boolalg import BoolAlg, Element, PrincipalFilter
from .bvalued import Bundle, ValueConstraint, make_bundle
from .distributions import Distribution, FormulaSequence
from .errors import FormatError, ParseError, UnknownSymbol
from .finder import FinderTask, Structure
from .logic import Signature, Theory, parse
from .transfer import AlgebraHom, hom_from_atom_map


def canonical_dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _expect(condition, message, pointer):
    if not condition:
        raise FormatError(message, pointer)


def _get(doc, key, kind, pointer, optional=False, default=None):
    if key not in doc:
        if optional:
            return default
        raise FormatError(f"missing key {key!r}", pointer)
    value = doc[key]
    if kind is not None and not isinstance(value, kind):
        raise FormatError(f"{key!r} has the wrong type", f"{pointer}/{key}")
    return value


# -- algebras and elements ----------------------------------------------------


def algebra_to_json(algebra: BoolAlg) -> dict:
    out = {"atoms": algebra.atom_count}
    if algebra.atom_labels is not None:
        out["labels"] = list(algebra.atom_labels)
    return out


def algebra_from_json(doc, pointer="") -> BoolAlg:
    _expect(isinstance(doc, dict), "algebra must be an object", pointer)
    atoms = _get(doc, "atoms", int, pointer)
    _expect(atoms >= 1, "atom count must be >= 1", f"{pointer}/atoms")
    labels = _get(doc, "labels", list, pointer, optional=True)
    return BoolAlg(atoms, tuple(labels) if labels is not None else None)


def element_to_json(a: Element) -> list:
    return list(a.atoms)


def element_from_json(doc, algebra: BoolAlg, pointer="") -> Element:
    _expect(isinstance(doc, list), "element must be an array of atom indices", pointer)
    for k, i in enumerate(doc):
        _expect(isinstance(i, int) and 0 <= i < algebra.atom_count,
                f"{i!r} is not an atom index", f"{pointer}/{k}")
    return algebra.element(doc)


def filter_to_json(f: PrincipalFilter) -> dict:
    return {"algebra": algebra_to_json(f.algebra),
            "generator": element_to_json(f.generator)}


def filter_from_json(doc, pointer="") -> PrincipalFilter:
    algebra = algebra_from_json(_get(doc, "algebra", dict, pointer), f"{pointer}/algebra")
    gen = element_from_json(_get(doc, "generator", list, pointer), algebra,
                            f"{pointer}/generator")
    _expect(not gen.is_zero, "filter generator must be nonzero", f"{pointer}/generator")
    return PrincipalFilter(algebra, gen)


def _index_key(s) -> str:
    return ",".join(str(i) for i in sorted(s))


def _index_from_key(key: str, pointer: str) -> frozenset:
    if key == "":
        return frozenset()
    try:
        return frozenset(int(part) for part in key.split(","))
    except ValueError:
        raise FormatError(f"bad index-set key {key!r}", pointer)


def indexed_antichain_to_json(indexed: dict) -> dict:
    return {_index_key(s): element_to_json(e) for s, e in indexed.items()}


def indexed_antichain_from_json(doc, algebra: BoolAlg, pointer="") -> dict:
    _expect(isinstance(doc, dict), "indexed antichain must be an object", pointer)
    return {
        _index_from_key(key, f"{pointer}/{key}"):
            element_from_json(value, algebra, f"{pointer}/{key}")
        for key, value in doc.items()
    }


# -- distributions -------------------------------------------------------------


def distribution_to_json(a: Distribution) -> dict:
    return {
        "algebra": algebra_to_json(a.algebra),
        "index": list(a.index),
        "values": {_index_key(s): element_to_json(v) for s, v in a.table.items()},
    }


def distribution_from_json(doc, pointer="") -> Distribution:
    algebra = algebra_from_json(_get(doc, "algebra", dict, pointer), f"{pointer}/algebra")
    index = tuple(_get(doc, "index", list, pointer))
    values = _get(doc, "values", dict, pointer)
    table = {}
    for key, value in values.items():
        s = _index_from_key(key, f"{pointer}/values/{key}")
        _expect(s <= set(index), f"key {key!r} leaves the index set",
                f"{pointer}/values/{key}")
        table[s] = element_from_json(value, algebra, f"{pointer}/values/{key}")
    try:
        return Distribution(index, algebra, table)
    except ValueError as err:
        raise FormatError(str(err), f"{pointer}/values")


# -- homomorphisms --------------------------------------------------------------


def hom_to_json(j: AlgebraHom) -> dict:
    return {
        "source": algebra_to_json(j.source),
        "target": algebra_to_json(j.target),
        "atom_map": {str(y): i for y, i in enumerate(j.atom_map)},
    }


def hom_from_json(doc, pointer="") -> AlgebraHom:
    source = algebra_from_json(_get(doc, "source", dict, pointer), f"{pointer}/source")
    target = algebra_from_json(_get(doc, "target", dict, pointer), f"{pointer}/target")
    raw = _get(doc, "atom_map", dict, pointer)
    atom_map = {}
    for key, value in raw.items():
        try:
            y = int(key)
        except ValueError:
            raise FormatError(f"bad target atom {key!r}", f"{pointer}/atom_map/{key}")
        _expect(isinstance(value, int), "source atom must be an integer",
                f"{pointer}/atom_map/{key}")
        atom_map[y] = value
    _expect(set(atom_map) == set(range(target.atom_count)),
            "atom_map must cover every target atom", f"{pointer}/atom_map")
    return hom_from_atom_map(source, target, atom_map)


# -- logic and structures --------------------------------------------------------


def signature_to_json(sig: Signature) -> dict:
    return {
        "relations": {name: arity for name, arity in sig.relations},
        "functions": {name: arity for name, arity in sig.functions},
        "constants": list(sig.constants),
    }


def signature_from_json(doc, pointer="") -> Signature:
    _expect(isinstance(doc, dict), "signature must be an object", pointer)
    relations = _get(doc, "relations", dict, pointer, optional=True, default={})
    functions = _get(doc, "functions", dict, pointer, optional=True, default={})
    constants = _get(doc, "constants", list, pointer, optional=True, default=[])
    try:
        return Signature(
            tuple(sorted(relations.items())),
            tuple(sorted(functions.items())),
            tuple(constants),
        )
    except ValueError as err:
        raise FormatError(str(err), pointer)


def formula_from_json(doc, signature, pointer=""):
    _expect(isinstance(doc, str), "formula must be a string", pointer)
    try:
        return parse(doc, signature)
    except (ParseError, UnknownSymbol) as err:
        raise FormatError(f"bad formula: {err}", pointer)


def structure_to_json(m: Structure) -> dict:
    return {
        "signature": signature_to_json(m.signature),
        "size": m.size,
        "relations": {name: sorted(list(row) for row in table)
                      for name, table in m.relations.items()},
        "functions": {name: {_index_key2(args): value for args, value in table.items()}
                      for name, table in m.functions.items()},
        "constants": dict(m.constants),
    }


def _index_key2(args: tuple) -> str:
    return ",".join(str(v) for v in args)


def structure_from_json(doc, pointer="", signature=None) -> Structure:
    _expect(isinstance(doc, dict), "structure must be an object", pointer)
    if signature is None:
        signature = signature_from_json(_get(doc, "signature", dict, pointer),
                                        f"{pointer}/signature")
    size = _get(doc, "size", int, pointer)
    relations = {
        name: frozenset(tuple(row) for row in rows)
        for name, rows in _get(doc, "relations", dict, pointer,
                               optional=True, default={}).items()
    }
    functions = {}
    for name, table in _get(doc, "functions", dict, pointer,
                            optional=True, default={}).items():
        functions[name] = {
            tuple(int(v) for v in key.split(",")): value
            for key, value in table.items()
        }
    constants = _get(doc, "constants", dict, pointer, optional=True, default={})
    try:
        return Structure(signature, size, relations, functions, dict(constants))
    except ValueError as err:
        raise FormatError(str(err), pointer)


def theory_from_json(doc, signature, pointer="") -> Theory:
    _expect(isinstance(doc, list), "theory must be an array of sentences", pointer)
    sentences = tuple(
        formula_from_json(text, signature, f"{pointer}/{k}")
        for k, text in enumerate(doc)
    )
    try:
        return Theory(sentences)
    except ValueError as err:
        raise FormatError(str(err), pointer)


def task_from_json(doc, pointer="") -> FinderTask:
    signature = signature_from_json(_get(doc, "signature", dict, pointer),
                                    f"{pointer}/signature")
    axioms = theory_from_json(_get(doc, "axioms", list, pointer, optional=True,
                                   default=[]), signature, f"{pointer}/axioms")
    positive = tuple(
        formula_from_json(t, signature, f"{pointer}/positive/{k}")
        for k, t in enumerate(_get(doc, "positive", list, pointer,
                                   optional=True, default=[]))
    )
    negative = tuple(
        formula_from_json(t, signature, f"{pointer}/negative/{k}")
        for k, t in enumerate(_get(doc, "negative", list, pointer,
                                   optional=True, default=[]))
    )
    bound = _get(doc, "bound", int, pointer, optional=True, default=2)
    params = _get(doc, "params", int, pointer, optional=True, default=0)
    try:
        return FinderTask(signature, axioms, positive, negative, bound, params)
    except ValueError as err:
        raise FormatError(str(err), pointer)


# -- bundles ---------------------------------------------------------------------


def bundle_to_json(bundle: Bundle) -> dict:
    return {
        "algebra": algebra_to_json(bundle.algebra),
        "signature": signature_to_json(bundle.signature),
        "fibers": [structure_to_json(f) for f in bundle.fibers],
        "elements": [list(tup) for tup in bundle.elements],
    }


def bundle_from_json(doc, pointer="") -> Bundle:
    algebra = algebra_from_json(_get(doc, "algebra", dict, pointer), f"{pointer}/algebra")
    signature = signature_from_json(_get(doc, "signature", dict, pointer),
                                    f"{pointer}/signature")
    fibers = [
        structure_from_json(f, f"{pointer}/fibers/{k}", signature)
        for k, f in enumerate(_get(doc, "fibers", list, pointer))
    ]
    elements = _get(doc, "elements", list, pointer, optional=True)
    try:
        if elements is None:
            return make_bundle(algebra, fibers)
        return Bundle(algebra, signature, tuple(fibers),
                      tuple(tuple(tup) for tup in elements))
    except Exception as err:
        raise FormatError(str(err), pointer)


# -- formula sequences and constraints --------------------------------------------


def sequence_from_json(doc, signature, pointer="") -> FormulaSequence:
    variables = tuple(_get(doc, "variables", list, pointer))
    formulas = tuple(
        formula_from_json(t, signature, f"{pointer}/formulas/{k}")
        for k, t in enumerate(_get(doc, "formulas", list, pointer))
    )
    y_vars = tuple(tuple(ys) for ys in _get(doc, "y_vars", list, pointer))
    try:
        return FormulaSequence(variables, formulas, y_vars)
    except ValueError as err:
        raise FormatError(str(err), pointer)


def constraint_from_json(doc, signature, pointer=""):
    """(ValueConstraint, Signature) from {algebra, params, rows}; each
    row is {formula, lower, upper}."""
    algebra = algebra_from_json(_get(doc, "algebra", dict, pointer), f"{pointer}/algebra")
    params = _get(doc, "params", int, pointer, optional=True, default=0)
    formulas, lower, upper = [], {}, {}
    for k, row in enumerate(_get(doc, "rows", list, pointer)):
        rp = f"{pointer}/rows/{k}"
        phi = formula_from_json(_get(row, "formula", str, rp), signature, f"{rp}/formula")
        formulas.append(phi)
        lower[phi] = element_from_json(_get(row, "lower", list, rp), algebra, f"{rp}/lower")
        upper[phi] = element_from_json(
            _get(row, "upper", list, rp, optional=True,
                 default=list(range(algebra.atom_count))),
            algebra, f"{rp}/upper")
    try:
        return ValueConstraint(algebra, params, tuple(formulas), lower, upper)
    except Exception as err:
        raise FormatError(str(err), pointer)
