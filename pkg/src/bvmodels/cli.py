"""Command-line front end and the reproducible verification-suite runner.

Exit codes: 0 all checks pass, 1 a check failed, 2 usage or format
error, 3 unknown results present (budget exhaustion is never folded
into pass or fail).
"""

import argparse
import json
import os
import random
import sys
from dataclasses import dataclass

from . import jsonio
from .boolalg import BoolAlg, PrincipalFilter, ultrafilter_from_atom
from .bvalued import (
    compactness_check_and_synthesize,
    eval_coordinatewise,
    eval_recursive,
    make_bundle,
    specialize,
)
from .distributions import (
    Distribution,
    conservatively_refines,
    find_multiplicative_refinement,
    goodness_witness_sets,
    is_good,
    is_in_filter,
    is_los_map,
    is_multiplicative,
    is_possibility,
    refines,
    saturates,
)
from .errors import BvError, FormatError, ParseError
from .finder import Structure, eval_ordinary, find_model
from .logic import Signature, enumerate_formulas, formula_to_json, parse
from .transfer import (
    GoodPairState,
    extend_to_good,
    find_witness,
    is_pregood,
    los_transfer_check,
    pullback_distribution,
    pushforward,
    refinement_step,
)
from .boolalg import Antichain

DEFAULT_BUDGET = int(os.environ.get("BVMODELS_BUDGET", "500000"))

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_UNKNOWN = 3


def _emit(doc):
    sys.stdout.write(jsonio.canonical_dumps(doc))


def _load(path):
    try:
        with open(path) as handle:
            return json.load(handle)
    except OSError as err:
        raise FormatError(f"cannot read {path}: {err}", "")
    except json.JSONDecodeError as err:
        raise FormatError(f"{path} is not JSON: {err}", "")


def _status_exit(status):
    return {"sat": EXIT_PASS, "none": EXIT_FAIL, "unknown": EXIT_UNKNOWN}[status]


def _verdict_exit(verdict):
    if verdict is True:
        return EXIT_PASS
    if verdict is False:
        return EXIT_FAIL
    return EXIT_UNKNOWN


def _verdict_json(verdict):
    return verdict if isinstance(verdict, str) else bool(verdict)


# -- plain subcommands --------------------------------------------------------


def cmd_parse(args):
    signature = None
    if args.signature:
        signature = jsonio.signature_from_json(_load(args.signature))
    phi = parse(args.formula, signature)
    _emit({"ast": formula_to_json(phi), "text": str(phi)})
    return EXIT_PASS


def cmd_find_model(args):
    task = jsonio.task_from_json(_load(args.task))
    result = find_model(task, args.budget)
    _emit({
        "status": result.status,
        "model": jsonio.structure_to_json(result.model) if result.model else None,
        "params": list(result.params) if result.params is not None else None,
        "nodes": result.nodes,
    })
    return _status_exit(result.status)


def cmd_eval(args):
    bundle = jsonio.bundle_from_json(_load(args.bundle))
    if args.algebra:
        other = jsonio.algebra_from_json(_load(args.algebra))
        if other != bundle.algebra:
            raise FormatError("algebra file does not match the bundle's algebra", "")
    phi = parse(args.formula, bundle.signature)
    if args.engine in ("recursive", "both"):
        value = eval_recursive(bundle, phi)
    else:
        value = eval_coordinatewise(bundle, phi)
    if args.engine == "both" and value != eval_coordinatewise(bundle, phi):
        _emit({"error": "engines disagree", "formula": str(phi)})
        return EXIT_FAIL
    _emit({"value": jsonio.element_to_json(value)})
    return EXIT_PASS


def cmd_specialize(args):
    bundle = jsonio.bundle_from_json(_load(args.bundle))
    u = ultrafilter_from_atom(bundle.algebra, args.atom)
    quotient, projection = specialize(bundle, u)
    _emit({
        "structure": jsonio.structure_to_json(quotient),
        "projection": list(projection),
    })
    return EXIT_PASS


def cmd_compactness(args):
    doc = _load(args.task)
    signature = jsonio.signature_from_json(doc.get("signature", {}), "/signature")
    vc, theory = (
        jsonio.constraint_from_json(doc.get("constraint", {}), signature, "/constraint"),
        jsonio.theory_from_json(doc.get("theory", []), signature, "/theory"),
    )
    bound = doc.get("bound", 2)
    result = compactness_check_and_synthesize(vc, theory, signature, bound, args.budget)
    _emit({
        "status": result.status,
        "bundle": jsonio.bundle_to_json(result.structure) if result.structure else None,
        "parameters": list(result.parameter_elements),
    })
    return _status_exit(result.status)


def cmd_ultrapower(args):
    from .ultrapower import boolean_ultrapower, los_check

    base = jsonio.structure_from_json(_load(args.structure))
    algebra = BoolAlg(args.atoms)
    if args.action == "build":
        _emit(jsonio.bundle_to_json(boolean_ultrapower(base, algebra)))
        return EXIT_PASS
    atoms = [args.atom] if args.atom is not None else range(args.atoms)
    reports, ok = {}, True
    for e in atoms:
        report = los_check(base, algebra, ultrafilter_from_atom(algebra, e), args.rank)
        ok = ok and report.elementary and report.isomorphism_ok
        reports[str(e)] = {
            "embedding": {str(m): v for m, v in report.embedding.items()},
            "elementary": report.elementary,
            "counterexample": str(report.counterexample) if report.counterexample else None,
            "isomorphism_ok": report.isomorphism_ok,
        }
    _emit(reports)
    return EXIT_PASS if ok else EXIT_FAIL


# -- dist subcommands ----------------------------------------------------------


def _load_task(path):
    """(sequence, signature, theory, bound) from a task file."""
    doc = _load(path)
    signature = jsonio.signature_from_json(doc.get("signature", {}), "/signature")
    seq = jsonio.sequence_from_json(doc.get("sequence", {}), signature, "/sequence")
    theory = jsonio.theory_from_json(doc.get("theory", []), signature, "/theory")
    return seq, signature, theory, doc.get("bound", 2)


def cmd_dist(args):
    if args.action == "check":
        a = jsonio.distribution_from_json(_load(args.dist))
        out = {"multiplicative": is_multiplicative(a)}
        if args.other:
            b = jsonio.distribution_from_json(_load(args.other))
            out["refines"] = refines(a, b)
            out["conservatively_refines"] = conservatively_refines(a, b)
        _emit(out)
        return EXIT_PASS
    if args.action in ("los", "possibility"):
        a = jsonio.distribution_from_json(_load(args.dist))
        seq, signature, theory, bound = _load_task(args.task)
        check = is_los_map if args.action == "los" else is_possibility
        verdict = check(a, seq, signature, theory, bound, args.budget)
        _emit({"verdict": _verdict_json(verdict)})
        return _verdict_exit(verdict)
    if args.action == "refine":
        a = jsonio.distribution_from_json(_load(args.dist))
        f = jsonio.filter_from_json(_load(args.filter))
        _emit(jsonio.distribution_to_json(find_multiplicative_refinement(a, f)))
        return EXIT_PASS
    if args.action == "good":
        f = jsonio.filter_from_json(_load(args.filter))
        report = is_good(f, range(args.index), args.cap)
        _emit({"good": report.good, "checked": report.checked,
               "failures": len(report.failures)})
        return EXIT_PASS if report.good else EXIT_FAIL
    if args.action == "saturates":
        u = jsonio.filter_from_json(_load(args.filter))
        seq, signature, theory, bound = _load_task(args.task)
        report = saturates(u, seq, signature, theory,
                           range(len(seq.formulas)), bound, args.budget)
        _emit({
            "entries": [
                {
                    "distribution": jsonio.distribution_to_json(e.distribution),
                    "los": _verdict_json(e.los),
                    "possibility": _verdict_json(e.possibility),
                }
                for e in report.entries
            ]
        })
        return EXIT_UNKNOWN if report.has_unknown else EXIT_PASS
    raise FormatError(f"unknown dist action {args.action}", "")


# -- transfer subcommands --------------------------------------------------------


def _goodpair_state(doc):
    algebra = jsonio.algebra_from_json(doc.get("algebra", {}), "/algebra")
    target = jsonio.algebra_from_json(doc.get("target", {}), "/target")
    pairs = tuple(
        (jsonio.element_from_json(p[0], algebra, f"/pairs/{k}/0"),
         jsonio.element_from_json(p[1], target, f"/pairs/{k}/1"))
        for k, p in enumerate(doc.get("pairs", []))
    )
    reserve = tuple(
        Antichain(tuple(
            jsonio.element_from_json(e, algebra, f"/reserve/{k}/{n}")
            for n, e in enumerate(chain)
        ))
        for k, chain in enumerate(doc.get("reserve", []))
    )
    gen = jsonio.element_from_json(doc.get("generator", list(range(algebra.atom_count))),
                                   algebra, "/generator")
    return GoodPairState(pairs, reserve, PrincipalFilter(algebra, gen),
                         doc.get("depth", 3))


def cmd_transfer(args):
    if args.action in ("push", "pull"):
        j = jsonio.hom_from_json(_load(args.hom))
        a = jsonio.distribution_from_json(_load(args.dist))
        result = pushforward(j, a) if args.action == "push" else pullback_distribution(j, a)
        _emit(jsonio.distribution_to_json(result))
        return EXIT_PASS
    if args.action == "check":
        j = jsonio.hom_from_json(_load(args.hom))
        a0 = jsonio.distribution_from_json(_load(args.dist))
        seq, signature, theory, bound = _load_task(args.task)
        v0, v1 = los_transfer_check(j, a0, seq, signature, theory, bound, args.budget)
        _emit({"source": _verdict_json(v0), "target": _verdict_json(v1)})
        return EXIT_UNKNOWN if "unknown" in (v0, v1) else EXIT_PASS
    if args.action == "goodpair":
        state = _goodpair_state(_load(args.state))
        if args.extend:
            extended = extend_to_good(state)
            _emit({"generator": jsonio.element_to_json(extended.filter.generator)})
            return EXIT_PASS
        if args.witness is not None:
            a = jsonio.element_from_json(json.loads(args.witness), state.algebra)
            found = find_witness(state, a)
            if found is None:
                _emit({"witness": None})
                return EXIT_FAIL
            xf, alpha = found
            _emit({"witness": {"choice_meet": jsonio.element_to_json(xf),
                               "pair": alpha}})
            return EXIT_PASS
        ok = is_pregood(state)
        _emit({"pregood": ok})
        return EXIT_PASS if ok else EXIT_FAIL
    if args.action == "step":
        f = jsonio.filter_from_json(_load(args.filter))
        a = jsonio.distribution_from_json(_load(args.dist))
        indexed = jsonio.indexed_antichain_from_json(_load(args.antichain), a.algebra)
        b, new_filter = refinement_step(f, indexed, a)
        _emit({"refinement": jsonio.distribution_to_json(b),
               "filter": jsonio.filter_to_json(new_filter)})
        return EXIT_PASS
    raise FormatError(f"unknown transfer action {args.action}", "")


# -- the suite runner ------------------------------------------------------------


@dataclass(frozen=True)
class SuiteConfig:
    seed: int = 0
    atoms: int = 2
    fibers: int = 3
    rank: int = 1
    bound: int = 2
    budget: int = DEFAULT_BUDGET
    index_size: int = 2
    suites: tuple = ()  # empty means all


_SUITE_SIGNATURE = Signature((("R", 2),), (), ("c",))


def _random_fiber(rng, size_cap):
    size = rng.randrange(1, size_cap + 1)
    pairs = [(i, j) for i in range(size) for j in range(size)]
    rel = frozenset(p for p in pairs if rng.random() < 0.5)
    return Structure(_SUITE_SIGNATURE, size, {"R": rel}, {}, {"c": rng.randrange(size)})


def _suite_bundles(cfg):
    rng = random.Random(cfg.seed)
    bundles = []
    for n in range(1, cfg.atoms + 1):
        algebra = BoolAlg(n)
        for _ in range(5):
            bundles.append(make_bundle(algebra, [_random_fiber(rng, cfg.fibers)
                                                 for _ in range(n)]))
    return bundles


def _suite_formulas(cfg, bundle):
    params = (0, 1) if bundle.size >= 2 else (0,)
    return enumerate_formulas(_SUITE_SIGNATURE, cfg.rank, free_variables=(),
                              params=params, size_cap=4)


def _suite_eval_agreement(cfg):
    checked = 0
    for bundle in _suite_bundles(cfg):
        for phi in _suite_formulas(cfg, bundle):
            checked += 1
            if eval_recursive(bundle, phi) != eval_coordinatewise(bundle, phi):
                return {"status": "fail", "checked": checked,
                        "counterexample": str(phi)}
    return {"status": "pass", "checked": checked, "counterexample": None}


def _suite_specialization(cfg):
    checked = 0
    for bundle in _suite_bundles(cfg):
        for e in range(bundle.algebra.atom_count):
            u = ultrafilter_from_atom(bundle.algebra, e)
            quotient, projection = specialize(bundle, u)
            for phi in _suite_formulas(cfg, bundle):
                checked += 1
                value = eval_recursive(bundle, phi)
                env = {p: projection[p] for p in range(bundle.size)}
                if (value in u) != eval_ordinary(quotient, phi, env):
                    return {"status": "fail", "checked": checked,
                            "counterexample": f"atom {e}: {phi}"}
    return {"status": "pass", "checked": checked, "counterexample": None}


def _suite_refinement_step(cfg):
    rng = random.Random(cfg.seed + 1)
    algebra = BoolAlg(max(4, 2 ** cfg.index_size))
    index = tuple(range(cfg.index_size))
    subsets = []
    for size in range(len(index) + 1):
        from itertools import combinations

        subsets.extend(frozenset(t) for t in combinations(index, size))
    checked = 0
    for _ in range(25):
        order = list(range(algebra.atom_count))
        rng.shuffle(order)
        blocks, cut = {}, 0
        for k, t in enumerate(subsets):
            width = 1 if k < len(subsets) - 1 else algebra.atom_count - cut
            blocks[t] = algebra.element(order[cut:cut + width])
            cut += width
        # one atom from each block, so the filter meets every block
        gen = algebra.element(rng.choice(blocks[t].atoms) for t in subsets)
        singles = {
            i: gen | algebra.element({a for a in range(algebra.atom_count)
                                      if rng.random() < 0.5})
            for i in index
        }
        table = {frozenset(): algebra.one}
        for s in subsets:
            if s:
                value = algebra.one
                for i in s:
                    value = value & singles[i]
                table[s] = value
        a = Distribution(index, algebra, table)
        checked += 1
        b, new_filter = refinement_step(PrincipalFilter(algebra, gen), blocks, a)
        ok = (is_multiplicative(b)
              and all(b(s).leq(a(s)) for s in subsets if s)
              and is_in_filter(b, new_filter))
        if not ok:
            return {"status": "fail", "checked": checked,
                    "counterexample": jsonio.distribution_to_json(a)}
    return {"status": "pass", "checked": checked, "counterexample": None}


def _suite_parser_roundtrip(cfg):
    checked = 0
    for phi in enumerate_formulas(_SUITE_SIGNATURE, cfg.rank, free_variables=(),
                                  params=(0, 1), size_cap=5):
        checked += 1
        if str(parse(str(phi), _SUITE_SIGNATURE)) != str(phi):
            return {"status": "fail", "checked": checked, "counterexample": str(phi)}
    return {"status": "pass", "checked": checked, "counterexample": None}


def _suite_witness_sets(cfg):
    s = frozenset(range(min(cfg.index_size + 1, 3)))
    from itertools import combinations

    subsets = [frozenset(t) for size in range(len(s) + 1)
               for t in combinations(sorted(s), size)]
    checked = 0
    for mask in range(1, 2 ** len(subsets)):
        family = {subsets[k] for k in range(len(subsets)) if mask >> k & 1}
        if frozenset() not in family:
            continue
        if any(t - {i} not in family for t in family for i in t):
            continue
        checked += 1
        goodness_witness_sets(s, family)
    return {"status": "pass", "checked": checked, "counterexample": None}


SUITES = {
    "evaluation-agreement": _suite_eval_agreement,
    "parser-roundtrip": _suite_parser_roundtrip,
    "refinement-step": _suite_refinement_step,
    "specialization": _suite_specialization,
    "witness-sets": _suite_witness_sets,
}


def run_suites(cfg: SuiteConfig) -> dict:
    names = cfg.suites or tuple(sorted(SUITES))
    report = {"config": {
        "seed": cfg.seed, "atoms": cfg.atoms, "fibers": cfg.fibers,
        "rank": cfg.rank, "bound": cfg.bound, "index_size": cfg.index_size,
    }, "suites": {}}
    for name in sorted(names):
        if name not in SUITES:
            raise FormatError(f"unknown suite {name!r}", "")
        report["suites"][name] = SUITES[name](cfg)
    return report


def cmd_suite(args):
    cfg = SuiteConfig(
        seed=args.seed, atoms=args.atoms, fibers=args.fibers, rank=args.rank,
        bound=args.bound, budget=args.budget, index_size=args.index_size,
        suites=tuple(args.suites.split(",")) if args.suites else (),
    )
    report = run_suites(cfg)
    for name, entry in report["suites"].items():
        line = f"{name}: {entry['status']} ({entry['checked']} checks)"
        if entry["counterexample"] is not None:
            line += f" counterexample: {entry['counterexample']}"
        print(line)
    _emit(report)
    statuses = {entry["status"] for entry in report["suites"].values()}
    if "fail" in statuses:
        return EXIT_FAIL
    if "unknown" in statuses:
        return EXIT_UNKNOWN
    return EXIT_PASS


# -- argument parsing --------------------------------------------------------------


def _build_parser():
    parser = argparse.ArgumentParser(prog="bvmodels")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse a formula and dump its AST")
    p.add_argument("formula")
    p.add_argument("--signature")
    p.set_defaults(run=cmd_parse)

    p = sub.add_parser("find-model", help="run a bounded model-finding task")
    p.add_argument("task")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.set_defaults(run=cmd_find_model)

    p = sub.add_parser("eval", help="evaluate a formula on a bundle")
    p.add_argument("--bundle", required=True)
    p.add_argument("--formula", required=True)
    p.add_argument("--engine", choices=("recursive", "coordinatewise", "both"),
                   default="both")
    p.add_argument("--algebra")
    p.set_defaults(run=cmd_eval)

    p = sub.add_parser("specialize", help="quotient a bundle along an atom ultrafilter")
    p.add_argument("--bundle", required=True)
    p.add_argument("--atom", type=int, required=True)
    p.set_defaults(run=cmd_specialize)

    p = sub.add_parser("compactness", help="check and synthesize a value constraint")
    p.add_argument("task")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.set_defaults(run=cmd_compactness)

    p = sub.add_parser("ultrapower", help="build or check a Boolean ultrapower")
    p.add_argument("action", choices=("build", "check"))
    p.add_argument("--structure", required=True)
    p.add_argument("--atoms", type=int, required=True)
    p.add_argument("--atom", type=int)
    p.add_argument("--rank", type=int, default=2)
    p.set_defaults(run=cmd_ultrapower)

    p = sub.add_parser("dist", help="distribution operations")
    p.add_argument("action",
                   choices=("check", "los", "possibility", "refine", "good",
                            "saturates"))
    p.add_argument("--dist")
    p.add_argument("--other")
    p.add_argument("--task")
    p.add_argument("--filter")
    p.add_argument("--index", type=int, default=2)
    p.add_argument("--cap", type=int, default=100_000)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.set_defaults(run=cmd_dist)

    p = sub.add_parser("transfer", help="homomorphism transfer operations")
    p.add_argument("action", choices=("push", "pull", "check", "goodpair", "step"))
    p.add_argument("--hom")
    p.add_argument("--dist")
    p.add_argument("--task")
    p.add_argument("--state")
    p.add_argument("--filter")
    p.add_argument("--antichain")
    p.add_argument("--extend", action="store_true")
    p.add_argument("--witness")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.set_defaults(run=cmd_transfer)

    p = sub.add_parser("suite", help="run the verification suites")
    p.add_argument("action", choices=("run",))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--atoms", type=int, default=2)
    p.add_argument("--fibers", type=int, default=3)
    p.add_argument("--rank", type=int, default=1)
    p.add_argument("--bound", type=int, default=2)
    p.add_argument("--index-size", type=int, default=2, dest="index_size")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--suites")
    p.set_defaults(run=cmd_suite)

    return parser


def run_command(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return EXIT_USAGE if err.code else EXIT_PASS
    try:
        return args.run(args)
    except (FormatError, ParseError, BvError, ValueError, KeyError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
