"""Command line entry point ``aspax``."""
from __future__ import annotations

import argparse
import json
import os
import random
import sys
from pathlib import Path

from .checker import check_coverage
from .core import format_interpretation
from .domain import abstract_program
from .errors import AspaxError, ResourceError
from .mapping import DomainMapping
from .omission import omit_literals
from .parser import SourceProgram, parse_mapping, parse_program, print_program
from .solver import Limits, enumerate_answer_sets, ground

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3


class _UsageError(Exception):
    pass


def _read(path: str) -> SourceProgram:
    try:
        return SourceProgram(Path(path).read_text(), path)
    except OSError as exc:
        raise _UsageError(f"cannot read {path}: {exc.strerror}") from None


def _facts_text(value):
    """``--facts`` takes inline facts or the name of a file holding them."""
    if value is None:
        return None
    if os.path.isfile(value):
        return Path(value).read_text()
    return value


def _program(args):
    path = args.program or args.file
    if path is None:
        raise _UsageError("no program given")
    return parse_program(_read(path), _facts_text(getattr(args, "facts", None)))


def _mapping(args, required=True) -> DomainMapping:
    if args.map is None:
        if required:
            raise _UsageError("--map is required")
        return None
    return parse_mapping(_read(args.map))


def _limits(args) -> Limits:
    try:
        return Limits.from_env(max_instances=args.max_instances, max_nodes=args.max_nodes,
                               max_answer_sets=args.max_answers)
    except ValueError as exc:
        raise _UsageError(str(exc)) from None


def _emit(args, text: str):
    if getattr(args, "out", None):
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_parse(args) -> int:
    _emit(args, print_program(_program(args)))
    return EXIT_OK


def cmd_solve(args) -> int:
    limits = _limits(args)
    res = enumerate_answer_sets(ground(_program(args), limits), limits=limits)
    if args.format == "json":
        doc = {"answerSets": [sorted(str(a) for a in s) for s in res.answer_sets], "truncated": res.truncated}
        _emit(args, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    else:
        lines = [format_interpretation(s) for s in res.answer_sets]
        if res.truncated:
            lines.append("% truncated by the answer-set cap")
        _emit(args, "".join(line + "\n" for line in lines))
    return EXIT_OK


def cmd_omit(args) -> int:
    p = _program(args)
    m = _mapping(args)
    m.check_program(p)
    res = omit_literals(p, m.omitted, shrink_constraints=args.shrink_constraints)
    if args.format == "json":
        doc = {"program": print_program(res.program), "report": [[i, tag] for i, tag in res.report]}
        _emit(args, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    else:
        _emit(args, print_program(res.program))
    return EXIT_OK


def cmd_abstract(args) -> int:
    p = _program(args)
    res = abstract_program(p, _mapping(args), symbolic=args.symbolic_types, shift=args.shift)
    if args.format == "json":
        doc = {"program": print_program(res.program), "steps": res.steps()}
        _emit(args, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    else:
        _emit(args, print_program(res.program))
    return EXIT_OK


def cmd_check(args) -> int:
    p = _program(args)
    m = _mapping(args)
    limits = _limits(args)
    abstract = abstract_program(p, m, shift=args.shift).program
    report = check_coverage(p, abstract, m, limits)
    if args.format == "json":
        _emit(args, report.to_json(timings=args.timings) + "\n")
    else:
        text = report.to_text()
        if not args.timings:
            text = "".join(line + "\n" for line in text.splitlines() if not line.startswith("time "))
        _emit(args, text)
    return EXIT_OK if report.ok else EXIT_VIOLATION


def cmd_policy_check(args) -> int:
    from .policy import (Goal, GridScenario, check_spurious, find_counterexample,
                         generate_abstract_system)

    limits = _limits(args)
    scen = GridScenario(n=args.n, start=tuple(args.start), sensing=args.sensing, limits=limits,
                        domain_text=_read(args.domain).text if args.domain else None,
                        policy_text=_read(args.policy).text if args.policy else None)
    if args.map is None:
        m = GridScenario.mapping("quadrant")
    elif args.map in ("quadrant", "refined") and not os.path.exists(args.map):
        m = GridScenario.mapping(args.map)
    else:
        m = parse_mapping(_read(args.map))
    goal = Goal(args.goal)
    ps = scen.system()
    hist, pol = scen.programs()
    system = generate_abstract_system(ps, m, args.mode, hist, pol)
    pattern = None
    if args.regions:
        regions = args.regions.split(",")
        pattern = GridScenario.region_pattern(regions, regions[1:], person=args.person)
    cex = find_counterexample(system, goal, args.bound, pattern)
    verdict = check_spurious(cex, ps, m) if cex is not None else None
    if args.format == "json":
        doc = {"mode": args.mode, "abstractStates": len(system.states),
               "counterexample": None if cex is None else cex.to_json(),
               "spurious": None if verdict is None else verdict.spurious,
               "failStep": None if verdict is None else verdict.fail_step,
               "failureKind": None if verdict is None else verdict.failure_kind}
        _emit(args, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    else:
        lines = [f"abstract states: {len(system.states)}"]
        if cex is None:
            lines.append(f"no counterexample up to bound {args.bound}")
        else:
            lines.append("counterexample: " + cex.to_text(GridScenario.show))
            lines.append(verdict.to_text())
        _emit(args, "".join(line + "\n" for line in lines))
    return EXIT_VIOLATION if verdict is not None and not verdict.spurious else EXIT_OK


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="aspax", description="Abstraction of answer set programs.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--max-instances", type=int)
    common.add_argument("--max-nodes", type=int)
    common.add_argument("--max-answers", type=int)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out")
    prog = argparse.ArgumentParser(add_help=False)
    prog.add_argument("file", nargs="?")
    prog.add_argument("--program")
    prog.add_argument("--facts", help="inline facts or a file with facts")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("parse", parents=[common, prog], help="parse and print a program")
    s.set_defaults(run=cmd_parse)
    s = sub.add_parser("solve", parents=[common, prog], help="enumerate answer sets")
    s.set_defaults(run=cmd_solve)
    s = sub.add_parser("omit", parents=[common, prog], help="omit the mapping's predicates")
    s.add_argument("--map")
    s.add_argument("--shrink-constraints", action="store_true",
                   help="shrink constraints instead of dropping them (unsound, for testing)")
    s.set_defaults(run=cmd_omit)
    s = sub.add_parser("abstract", parents=[common, prog], help="apply omission and domain abstraction")
    s.add_argument("--map")
    s.add_argument("--symbolic-types", action="store_true")
    s.add_argument("--shift", action="store_true", help="shift uncertain negative literals")
    s.set_defaults(run=cmd_abstract)
    s = sub.add_parser("check", parents=[common, prog], help="check that the abstraction covers the program")
    s.add_argument("--map")
    s.add_argument("--shift", action="store_true")
    s.add_argument("--timings", action="store_true")
    s.set_defaults(run=cmd_check)
    s = sub.add_parser("policy-check", parents=[common], help="search abstract counterexamples on the grid")
    s.add_argument("--domain")
    s.add_argument("--policy")
    s.add_argument("--map", help="mapping file, or quadrant / refined")
    s.add_argument("--goal", default="caught")
    s.add_argument("--bound", type=int, default=3)
    s.add_argument("--n", type=int, default=4)
    s.add_argument("--start", type=int, nargs=2, default=(1, 1))
    s.add_argument("--sensing", type=int, default=1)
    s.add_argument("--regions", help="robot regions per state, e.g. nw,nw,ne,ne")
    s.add_argument("--person", help="person region for --regions")
    mode = s.add_mutually_exclusive_group()
    mode.add_argument("--exact", dest="mode", action="store_const", const="exact")
    mode.add_argument("--overapprox", dest="mode", action="store_const", const="overapprox")
    mode.add_argument("--reachable", dest="mode", action="store_const", const="reachable")
    s.set_defaults(run=cmd_policy_check, mode="reachable")
    return ap


def main(argv=None) -> int:
    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    random.seed(args.seed)
    try:
        return args.run(args)
    except _UsageError as exc:
        print(f"aspax: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceError as exc:
        print(f"aspax: resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except AspaxError as exc:
        print(f"aspax: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
