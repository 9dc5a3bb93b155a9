"""``fairdiv`` command line.

Exit codes: 0 success or property holds, 1 property fails, 2 usage or
input error, 3 budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import algorithms, hardness
from .core import (
    Allocation,
    BudgetExceeded,
    Instance,
    allocation_to_json,
    format_rational,
    instance_to_json,
    parse_allocation,
    parse_instance,
    parse_rational,
    serialize_allocation,
    serialize_instance,
)
from .fairness import Notion, check, efx_factor, vefx_factor
from .generators import FIXTURE_DEFAULTS, KINDS, GeneratorSpec, fixture, generate, search_mnw_vs_efx, verify_fixture
from .nash import DEFAULT_BUDGET, binary_mnw, brute_force_mnw, mnw_key, nash_welfare

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _load(args) -> tuple[Instance, Allocation | None]:
    inst = parse_instance(_read(args.instance))
    alloc = None
    if getattr(args, "allocation", None):
        alloc = parse_allocation(_read(args.allocation), inst.n)
    return inst, alloc


def _emit(args, payload: dict, human: str) -> None:
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(human.rstrip("\n"))


def _key_text(key) -> str:
    return f"{key.positive_count} {format_rational(key.product)}"


def _witness_text(w) -> str:
    # human output uses 1-based labels like the printed allocations
    if w.good is None:
        return f"agent {w.envier + 1} envies agent {w.envied + 1}"
    return f"agent {w.envier + 1} envies agent {w.envied + 1} even without g{w.good + 1}"


def _params(items: list[str] | None) -> dict[str, str]:
    out = {}
    for item in items or []:
        for part in item.split(";") if ";" in item else [item]:
            if not part:
                continue
            if "=" not in part:
                raise UsageError(f"parameter {part!r} is not KEY=VALUE")
            k, v = part.split("=", 1)
            out[k.strip()] = v.strip()
    return out


def parse_goods(text: str) -> list[int]:
    """``3``, ``1..5`` or ``2,4``."""
    try:
        if ".." in text:
            lo, hi = text.split("..")
            return list(range(int(lo), int(hi) + 1))
        return [int(x) for x in text.split(",")]
    except ValueError:
        raise UsageError(f"bad good count {text!r}; use N, LO..HI or a comma list") from None


# --- verbs -------------------------------------------------------------------------


def cmd_check(args) -> int:
    inst, alloc = _load(args)
    report = check(inst, alloc, args.notion)
    label = report.notion.label
    if report.holds:
        human = f"{alloc} is {label}"
    else:
        human = f"{alloc} is not {label}: {_witness_text(report.witness)}"
    _emit(args, report.to_json(), human)
    return EXIT_OK if report.holds else EXIT_FAIL


def cmd_factor(args) -> int:
    inst, alloc = _load(args)
    if args.kind == "efx":
        f = efx_factor(inst, alloc)
        _emit(args, {"kind": "efx", "factor": format_rational(f)}, f"efx factor {format_rational(f)}")
    else:
        rep = vefx_factor(inst, alloc)
        lines = [f"vefx factor {format_rational(rep.factor)}"]
        for i, (chi, ratio) in enumerate(zip(rep.chi, rep.ratios)):
            lines.append(f"  agent {i + 1}: chi {format_rational(chi)}, ratio {format_rational(ratio)}")
        _emit(args, {"kind": "vefx", **rep.to_json()}, "\n".join(lines))
    return EXIT_OK


def cmd_mnw(args) -> int:
    inst, _ = _load(args)
    if args.method == "binary":
        if args.all_optima:
            raise UsageError("--all-optima needs --method brute")
        allocs = [binary_mnw(inst)]
        key = mnw_key(inst, allocs[0])
        space = None
    else:
        res = brute_force_mnw(inst, args.all_optima, args.budget, args.threads)
        allocs, key, space = list(res.allocations), res.key, res.search_space_size
    if args.output:
        for k, a in enumerate(allocs, start=1):
            path = args.output if len(allocs) == 1 else f"{args.output}.{k}"
            _write(path, serialize_allocation(a))
    payload = {
        "method": args.method,
        "key": key.to_json(),
        "allocations": [allocation_to_json(a) for a in allocs],
        "search_space": space,
    }
    human = [f"key {_key_text(key)}"]
    for a in allocs:
        human.append(f"{a}\n{serialize_allocation(a)}")
    _emit(args, payload, "\n".join(human))
    return EXIT_OK


def cmd_solve(args) -> int:
    inst, _ = _load(args)
    trace = None
    if args.alg == "match-freeze":
        alloc, trace = algorithms.match_and_freeze(inst)
        notion = "efx0"
    else:
        alloc = algorithms.modified_round_robin(inst, strict=not args.no_strict)
        notion = "efx"
    if args.trace:
        if trace is None:
            raise UsageError("--trace is only available for match-freeze")
        _write(args.trace, json.dumps(trace.to_json(), indent=2) + "\n")
    if args.output:
        _write(args.output, serialize_allocation(alloc))
    report = check(inst, alloc, notion)
    payload = {"algorithm": args.alg, "allocation": allocation_to_json(alloc), "check": report.to_json()}
    _emit(args, payload, f"{alloc}\n{serialize_allocation(alloc)}")
    return EXIT_OK


def cmd_perturb(args) -> int:
    inst, _ = _load(args)
    pert = algorithms.perturb_for_efx0(inst)
    eps = None if pert.epsilon is None else format_rational(pert.epsilon)
    if args.output:
        _write(args.output, serialize_instance(pert.instance))
    payload = {"epsilon": eps, "instance": instance_to_json(pert.instance)}
    _emit(args, payload, f"# epsilon {eps}\n{serialize_instance(pert.instance)}")
    return EXIT_OK


def cmd_gen(args) -> int:
    try:
        spec = GeneratorSpec(args.kind, args.agents, args.goods, args.seed, _params(args.param))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    inst = generate(spec)
    if args.output:
        _write(args.output, serialize_instance(inst))
    _emit(args, instance_to_json(inst), serialize_instance(inst))
    return EXIT_OK


def cmd_fixture(args) -> int:
    fx = fixture(args.id, _params(args.params))
    checks = verify_fixture(fx) if args.verify else None
    if args.output:
        _write(args.output, serialize_instance(fx.instance))
    payload = {
        "id": fx.id,
        "params": {k: format_rational(v) for k, v in fx.params.items()},
        "instance": instance_to_json(fx.instance),
        "allocations": {k: allocation_to_json(a) for k, a in fx.allocations.items()},
        "facts": [f.describe() for f in fx.facts],
    }
    lines = [serialize_instance(fx.instance).rstrip("\n")]
    for name, a in fx.allocations.items():
        lines.append(f"# {name}: {a}")
    if checks is None:
        lines.extend(f"# fact: {f.describe()}" for f in fx.facts)
    else:
        payload["verified"] = [{"fact": c.fact.describe(), "ok": c.ok} for c in checks]
        lines.extend(f"# {'ok  ' if c.ok else 'FAIL'} {c.fact.describe()}" for c in checks)
    _emit(args, payload, "\n".join(lines))
    return EXIT_FAIL if checks and not all(c.ok for c in checks) else EXIT_OK


def cmd_search(args) -> int:
    values = [v for v in args.values.split(",") if v]
    try:
        values = [parse_rational(v) for v in values]
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    res = search_mnw_vs_efx(
        values,
        args.agents,
        parse_goods(args.goods),
        budget=args.budget,
        cursor=args.cursor,
        notion=args.notion,
        threads=args.threads,
    )
    payload = {
        "hits": [
            {
                "instance": instance_to_json(h.instance),
                "key": h.key.to_json(),
                "failing": [allocation_to_json(a) for a in h.failing],
            }
            for h in res.hits
        ],
        "examined": res.examined,
        "complete": res.complete,
        "cursor": res.cursor,
    }
    lines = [f"{len(res.hits)} instance(s) with an MNW optimum that is not {Notion(args.notion).label}"]
    for h in res.hits:
        lines.append(serialize_instance(h.instance).rstrip("\n"))
        lines.extend(f"# fails: {a}" for a in h.failing)
    lines.append(f"# examined {res.examined} canonical instances")
    if not res.complete:
        lines.append(f"# budget exhausted; resume with --cursor {res.cursor}")
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK if res.complete else EXIT_BUDGET


def cmd_hardness_reduce(args) -> int:
    r = hardness.reduce(hardness.parse_formula(_read(args.formula)))
    if args.output:
        _write(args.output, serialize_instance(r.instance))
    payload = {
        "instance": instance_to_json(r.instance),
        "a": str(r.a),
        "U": str(r.U),
        "agents": list(r.agent_roles),
        "goods": list(r.good_roles),
    }
    human = f"# a = {r.a}, U = {r.U}\n"
    if not args.output:
        human += serialize_instance(r.instance)
    _emit(args, payload, human)
    return EXIT_OK


def cmd_hardness_build(args) -> int:
    r = hardness.reduce(hardness.parse_formula(_read(args.formula)))
    try:
        assignment = [{"1": True, "0": False}[t.strip()] for t in args.assignment.split(",")]
    except KeyError:
        raise UsageError("--assignment takes a comma list of 0/1 values") from None
    alloc = hardness.allocation_from_assignment(r, assignment)
    if args.output:
        _write(args.output, serialize_allocation(alloc))
    nw = nash_welfare(r.instance, alloc)
    payload = {"allocation": allocation_to_json(alloc), "nash_welfare": format_rational(nw), "U": str(r.U)}
    human = f"# NW = {format_rational(nw)}, U = {r.U}\n"
    if not args.output:
        human += serialize_allocation(alloc)
    _emit(args, payload, human)
    return EXIT_OK


def cmd_hardness_verify(args) -> int:
    inst, alloc = _load(args)
    n, m, a = hardness.infer_parameters(inst)
    threshold = hardness.threshold_for(inst)
    nw = nash_welfare(inst, alloc)
    ok = nw >= threshold
    payload = {
        "variables": n,
        "clauses": m,
        "a": format_rational(a),
        "nash_welfare": format_rational(nw),
        "U": format_rational(threshold),
        "meets_threshold": ok,
    }
    human = f"NW = {format_rational(nw)}\nU  = {format_rational(threshold)}\nNW {'>=' if ok else '<'} U"
    _emit(args, payload, human)
    return EXIT_OK if ok else EXIT_FAIL


# --- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="print a JSON document instead of text")

    parser = argparse.ArgumentParser(prog="fairdiv", description="Exact fair division of indivisible goods.")
    parser.add_argument("--version", action="version", version="%(prog)s 0.1.0")
    sub = parser.add_subparsers(dest="verb", required=True, metavar="VERB")

    p = sub.add_parser("check", parents=[common], help="test an allocation for EF/EF1/EFX/EFX0")
    p.add_argument("--notion", required=True, choices=[n.value for n in Notion])
    p.add_argument("instance")
    p.add_argument("allocation")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("factor", parents=[common], help="alpha-EFX or vEFX factor of an allocation")
    p.add_argument("--kind", required=True, choices=["efx", "vefx"])
    p.add_argument("instance")
    p.add_argument("allocation")
    p.set_defaults(func=cmd_factor)

    p = sub.add_parser("mnw", parents=[common], help="maximum Nash welfare allocation(s)")
    p.add_argument("--method", choices=["brute", "binary"], default="brute")
    p.add_argument("--all-optima", action="store_true")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="max assignments to enumerate")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("-o", "--output", help="write allocation file(s); several optima get suffixes .1, .2, ...")
    p.add_argument("instance")
    p.set_defaults(func=cmd_mnw)

    p = sub.add_parser("solve", parents=[common], help="run Match&Freeze or modified round-robin")
    p.add_argument("--alg", required=True, choices=["match-freeze", "round-robin"])
    p.add_argument("--trace", help="write the Match&Freeze round trace as JSON")
    p.add_argument("--no-strict", action="store_true", help="round-robin: warn instead of failing on ratio > 2")
    p.add_argument("-o", "--output")
    p.add_argument("instance")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("perturb", parents=[common], help="replace zeros so that EFX implies EFX0")
    p.add_argument("-o", "--output")
    p.add_argument("instance")
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("gen", parents=[common], help="generate a random instance")
    p.add_argument("--kind", required=True, choices=KINDS)
    p.add_argument("--agents", type=int, required=True)
    p.add_argument("--goods", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--param", action="append", metavar="KEY=VALUE", help="generator parameter (repeatable)")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("fixture", parents=[common], help="print a worked-example instance")
    p.add_argument("id", choices=list(FIXTURE_DEFAULTS))
    p.add_argument("--params", action="append", metavar="KEY=VALUE", help="e.g. eps=1/10 (repeatable, or ';'-separated)")
    p.add_argument("--verify", action="store_true", help="recompute the expected facts; exit 1 if any fails")
    p.add_argument("-o", "--output", help="write the instance file")
    p.set_defaults(func=cmd_fixture)

    p = sub.add_parser("search", parents=[common], help="exhaustive search for MNW optima that are not EFX0")
    p.add_argument("--values", required=True, help="comma-separated value set")
    p.add_argument("--agents", type=int, required=True)
    p.add_argument("--goods", required=True, help="N, LO..HI or a comma list")
    p.add_argument("--notion", choices=[n.value for n in Notion], default="efx0")
    p.add_argument("--budget", type=int, default=10**9, help="max allocations enumerated in total")
    p.add_argument("--cursor", help="resume point printed by a budget-limited run")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_search)

    hp = sub.add_parser("hardness", help="2P2N-3SAT reduction tools")
    hsub = hp.add_subparsers(dest="action", required=True, metavar="ACTION")
    p = hsub.add_parser("reduce", parents=[common], help="build the MNW instance of a DIMACS formula")
    p.add_argument("formula")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_hardness_reduce)
    p = hsub.add_parser("build-alloc", parents=[common], help="allocation from a satisfying assignment")
    p.add_argument("formula")
    p.add_argument("--assignment", required=True, help="comma list of 0/1, one per variable")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_hardness_build)
    p = hsub.add_parser("verify", parents=[common], help="compare an allocation's Nash welfare with U")
    p.add_argument("instance")
    p.add_argument("allocation")
    p.set_defaults(func=cmd_hardness_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    if getattr(args, "threads", 1) < 1:
        print("fairdiv: --threads must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        print(f"fairdiv: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (UsageError, ValueError, OSError) as exc:
        print(f"fairdiv: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
