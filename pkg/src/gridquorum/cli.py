"""Command-line frontend: every analysis as a subcommand.

Identical invocations produce byte-identical output (seeds default to 0,
floats are fixed to six decimals, JSON keys are sorted).  Exit codes for
``check``: 0 = property holds, 1 = counterexample found, 2 = enumeration
budget exceeded; malformed input exits 3.
"""

from __future__ import annotations

import argparse
import io
import json
import sys
from typing import Sequence

from ._parallel import default_threads
from .failprone import BudgetExceeded, GridSystem
from .resilience import (
    ADVERSARIAL,
    EXHAUSTIVE,
    check_b3_availability,
    check_b3_consistency_direct,
    check_b3_exhaustive,
    check_q3_exhaustive,
)
from .scenario import Scenario, check_availability, check_pairwise_safety, classify
from .threshold import sweep_2d, sweep_equal, verify_usefulness_inequalities, write_scan_csv
from .tightness import alpha_tightness_sweep, max_alpha, write_alpha_csv
from .universe import AttributeSchema, UnsupportedCardinality


class InputError(Exception):
    """Bad file, schema, or argument combination."""


def parse_range(text: str) -> list[int]:
    """Inclusive integer ranges: '4..20', '7', or '7,8,10'."""
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    if not out:
        raise InputError(f"empty range {text!r}")
    return out


def _load_schema(path: str) -> AttributeSchema:
    try:
        return AttributeSchema.load(path)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot load schema {path}: {exc}") from exc


def _emit(args, text: str) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump_json(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True)


def _build_system(args) -> GridSystem:
    schema = _load_schema(args.schema)
    system = GridSystem(schema)
    force_f = getattr(args, "force_f", None)
    force_alpha = getattr(args, "force_alpha", None)
    if force_f is not None or force_alpha is not None:
        belief = args.i
        system = system.with_overrides(belief, f=force_f, alpha=force_alpha)
    return system


def cmd_universe(args) -> int:
    schema = _load_schema(args.schema)
    system = GridSystem(schema)
    beliefs = []
    for i in range(schema.d):
        par = system.params(i)
        beliefs.append({
            "attribute": schema.attribute_name(i),
            "belief": i, "k": par.k, "f": par.f, "p": par.p, "alpha": par.alpha,
            "eps": str(par.eps), "delta": str(par.delta),
            "set_cardinality": par.set_cardinality,
        })
    if args.format == "text":
        lines = [f"universe: n={schema.n} d={schema.d}"]
        for b in beliefs:
            lines.append(
                f"belief {b['belief']} ({b['attribute']}): k={b['k']} f={b['f']} "
                f"p={b['p']} alpha={b['alpha']} eps={b['eps']} delta={b['delta']} "
                f"|F|={b['set_cardinality']}")
        _emit(args, "\n".join(lines))
    else:
        _emit(args, _dump_json({"n": schema.n, "d": schema.d, "beliefs": beliefs}))
    return 0


def cmd_check(args) -> int:
    system = _build_system(args)
    budget = None if args.budget == 0 else args.budget
    needs_j = args.property in ("b3", "b3-direct")
    if needs_j and args.j is None:
        if system.d == 2:
            args.j = 1 - args.i
        else:
            raise InputError(f"--j is required for property {args.property}")
    try:
        if args.property == "q3":
            verdict = check_q3_exhaustive(system, args.i, budget=budget)
        elif args.property == "b3":
            verdict = check_b3_exhaustive(system, args.i, args.j, budget=budget)
        elif args.property == "b3-direct":
            verdict = check_b3_consistency_direct(system, args.i, args.j, budget=budget)
        else:
            verdict = check_b3_availability(system, args.i, budget=budget, seed=args.seed)
    except BudgetExceeded as exc:
        _emit(args, _dump_json({"error": "budget_exceeded",
                                "required": exc.required, "budget": exc.budget}))
        return 2
    _emit(args, _dump_json(verdict.to_json()))
    return 0 if verdict.holds else 1


def cmd_sweep(args) -> int:
    threads = args.threads
    buf = io.StringIO()
    if args.kind == "equal":
        records = list(sweep_equal(parse_range(args.d), parse_range(args.k), threads=threads))
        write_scan_csv(records, buf)
    elif args.kind == "2d":
        records = list(sweep_2d(parse_range(args.k1), parse_range(args.k2), threads=threads))
        write_scan_csv(records, buf)
    elif args.kind == "alpha":
        rows = list(alpha_tightness_sweep(parse_range(args.k1), parse_range(args.k2),
                                          mode=args.mode, effort=args.effort,
                                          seed=args.seed, threads=threads))
        write_alpha_csv(rows, buf)
    else:  # lemmas
        report = verify_usefulness_inequalities()
        if args.format == "csv":
            buf.write("lemma,domain,checked,violations\n")
            for c in report.checks:
                buf.write(f"{c.name},\"{c.domain}\",{c.checked},{len(c.violations)}\n")
        else:
            buf.write(_dump_json(report.to_json()))
    _emit(args, buf.getvalue())
    return 0


def cmd_scenario(args) -> int:
    try:
        scenario = Scenario.load(args.file)
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot load scenario {args.file}: {exc}") from exc
    system = scenario.system
    verdicts = check_availability(scenario) if args.availability else classify(scenario)
    counts = {"FAULTY": 0, "WISE": 0, "NAIVE": 0}
    for v in verdicts:
        counts[v.status] += 1
    report = {
        "n": system.n,
        "fault_count": len(scenario.faults),
        "degenerate": len(scenario.faults) == system.n,
        "summary": counts,
        "processes": [v.to_json() for v in verdicts],
    }
    if args.safety:
        pairs = ([(args.i, args.j)] if args.i is not None and args.j is not None
                 else [(i, j) for i in range(system.d) for j in range(i + 1, system.d)])
        report["safety"] = [check_pairwise_safety(scenario, i, j).to_json()
                            for i, j in pairs]
    _emit(args, _dump_json(report))
    return 0


def cmd_alpha(args) -> int:
    schema = _load_schema(args.schema)
    try:
        result = max_alpha(schema, args.i, args.j, mode=args.mode,
                           effort=args.effort, seed=args.seed)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    _emit(args, _dump_json(result.to_json()))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gridquorum",
        description="Construct and analyze asymmetric grid quorum systems.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, schema_required=True):
        if schema_required:
            p.add_argument("--schema", required=True, help="attribute schema JSON file")
        p.add_argument("--out", default=None, help="output file (default stdout)")
        p.add_argument("--budget", type=int, default=10**4,
                       help="enumeration-space budget; 0 disables the gate")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int, default=default_threads())
        p.add_argument("--format", choices=("json", "csv", "text"), default="json")

    p = sub.add_parser("universe", help="print n and per-belief parameters")
    common(p)
    p.set_defaults(func=cmd_universe, format="text")
    p.add_argument("--json", dest="format", action="store_const", const="json")

    p = sub.add_parser("check", help="verify a resilience/consistency property")
    p.add_argument("property", choices=("q3", "b3", "b3-direct", "availability"))
    common(p)
    p.add_argument("--i", type=int, required=True, help="belief attribute index")
    p.add_argument("--j", type=int, default=None, help="second belief (pair checks)")
    p.add_argument("--force-f", type=int, default=None,
                   help="override belief i's full-failure value count")
    p.add_argument("--force-alpha", type=int, default=None,
                   help="override belief i's per-value partial budget")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("sweep", help="parameter sweeps, CSV output")
    p.add_argument("kind", choices=("equal", "2d", "alpha", "lemmas"))
    common(p, schema_required=False)
    p.add_argument("--d", default="2", help="dimension range, e.g. 2..4")
    p.add_argument("--k", default="4..16", help="cardinality range for equal sweeps")
    p.add_argument("--k1", default="4..16")
    p.add_argument("--k2", default="4..16")
    p.add_argument("--mode", choices=(EXHAUSTIVE, ADVERSARIAL), default=EXHAUSTIVE)
    p.add_argument("--effort", type=int, default=16, help="adversarial restarts")
    p.set_defaults(func=cmd_sweep, format="csv")

    p = sub.add_parser("scenario", help="classify a concrete fault scenario")
    p.add_argument("--file", required=True, help="scenario JSON file")
    common(p, schema_required=False)
    p.add_argument("--availability", action="store_true",
                   help="include per-process availability witnesses")
    p.add_argument("--safety", action="store_true",
                   help="include pairwise quorum-intersection safety reports")
    p.add_argument("--i", type=int, default=None)
    p.add_argument("--j", type=int, default=None)
    p.set_defaults(func=cmd_scenario)

    p = sub.add_parser("alpha", help="largest feasible partial budget for one belief")
    common(p)
    p.add_argument("--i", type=int, required=True)
    p.add_argument("--j", type=int, default=None)
    p.add_argument("--mode", choices=(EXHAUSTIVE, ADVERSARIAL), default=EXHAUSTIVE)
    p.add_argument("--effort", type=int, default=16)
    p.set_defaults(func=cmd_alpha)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, UnsupportedCardinality) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
