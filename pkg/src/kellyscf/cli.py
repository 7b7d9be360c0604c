"""Command-line front end.

Reports go to stdout as JSON lines (one record per check or scenario);
diagnostics go to stderr.  Exit codes: 0 pass or match, 1 fail or
mismatch, 2 usage or parse error, 3 budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .axioms import CHECKERS, nominators, run_check
from .enumeration import CapacityError, DomainSpec
from .prefcore import (
    DomainError,
    ParseError,
    Profile,
    majority_relation,
    margin_matrix,
    parse_order,
    rank_matrix,
    render_grid,
    render_set,
    support_matrix,
)
from .proofreplay import Budget, get_scenario, parse_scenario, render_scenario, scenario_names, solve, verify
from .rules import REGISTRY, get_rule

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# profile files


def parse_profile_text(text: str) -> tuple[Profile, list[str]]:
    """One voter per line in ``a~b > c`` syntax.

    Blank lines and ``#`` comments are ignored.  An ``alternatives:`` header
    pins the name order; otherwise names are indexed by first appearance.
    """
    names: list[str] | None = None
    rows: list[tuple[int, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.lower().startswith("alternatives:"):
            if names is not None or rows:
                raise ParseError("the alternatives header must come first and only once", lineno, 1)
            names = line.split(":", 1)[1].split()
            if not names or len(set(names)) != len(names):
                raise ParseError("alternatives header needs distinct names", lineno, 1)
            continue
        rows.append((lineno, line))
    if not rows:
        raise ParseError("profile file lists no voters")
    if names is None:
        names = []
        for _, line in rows:
            for tok in line.replace(">", " ").replace("~", " ").split():
                if tok not in names:
                    names.append(tok)
    voters = []
    for lineno, line in rows:
        try:
            voters.append(parse_order(line, names))
        except ParseError as exc:
            col = _column_of_problem(line, names)
            raise ParseError(str(exc), lineno, col) from None
    return Profile(tuple(voters)), names


def _column_of_problem(line: str, names: Sequence[str]) -> int:
    for tok in re.finditer(r"[^\s>~]+", line):
        if tok.group() not in names:
            return tok.start() + 1
    return 1


def read_profile(path: str) -> tuple[Profile, list[str]]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return parse_profile_text(text)
    except ParseError as exc:
        raise ParseError(f"{path}: {exc}") from None


# ---------------------------------------------------------------------------
# output


def _emit(rec: dict) -> None:
    sys.stdout.write(json.dumps(rec, sort_keys=False) + "\n")


def _header(args: argparse.Namespace) -> dict:
    return {"tool": "kellyscf", "version": __version__, "command": args.argv}


def _spec(args: argparse.Namespace) -> DomainSpec:
    if args.m < 1 or args.n < 1:
        raise UsageError("--m and --n must be positive")
    spec = DomainSpec(args.m, args.n, strict_only=args.strict, exclude_indifferent=args.exclude_indifferent)
    spec.check_capacity()
    return spec


def _jobs(args: argparse.Namespace) -> int:
    if args.jobs < 1:
        raise UsageError("--jobs must be at least 1")
    return args.jobs


# ---------------------------------------------------------------------------
# commands


def cmd_eval(args) -> int:
    rule = get_rule(args.rule)
    profile, names = read_profile(args.file)
    print(render_set(rule(profile), names))
    return EXIT_OK


def cmd_check(args) -> int:
    rule = get_rule(args.rule)
    if args.axiom not in CHECKERS:
        run_check(args.axiom, rule, DomainSpec(1, 1))  # raises with suggestions
    spec = _spec(args)
    rule.check_domain(spec.m, spec.n, spec.strict_only)
    res = run_check(args.axiom, rule, spec, jobs=_jobs(args))
    _emit({**_header(args), **res.to_record(timing=not args.stable)})
    return EXIT_OK if res.passed else EXIT_FAIL


def cmd_nominators(args) -> int:
    rule = get_rule(args.rule)
    spec = _spec(args)
    rule.check_domain(spec.m, spec.n, spec.strict_only)
    voters = sorted(nominators(rule, spec, jobs=_jobs(args)))
    _emit({**_header(args), "kind": "nominators", "rule": rule.name, "domain": spec.describe(),
           "nominators": [v + 1 for v in voters]})
    return EXIT_OK


def _load_scenario(args):
    if args.file:
        try:
            text = Path(args.file).read_text()
        except OSError as exc:
            raise UsageError(f"cannot read {args.file}: {exc.strerror}") from None
        try:
            return parse_scenario(text)
        except ParseError as exc:
            raise ParseError(f"{args.file}: {exc}") from None
    if not args.name:
        raise UsageError("give a scenario name or --file")
    return get_scenario(args.name)


def _budget(args) -> Budget:
    return Budget(nodes=args.nodes, seconds=args.seconds)


def cmd_verify(args) -> int:
    if args.jobs is not None:
        raise UsageError("verify is single-threaded to keep traces reproducible; drop --jobs")
    sc = _load_scenario(args)
    res = verify(sc, _budget(args))
    rec = res.to_record(with_trace=args.trace, timing=not args.stable)
    _emit({**_header(args), **rec})
    if res.state == "budget-exceeded":
        return EXIT_BUDGET
    if not res.matched:
        for p in res.problems:
            print(f"mismatch: {p}", file=sys.stderr)
    return EXIT_OK if res.matched else EXIT_FAIL


def cmd_solve(args) -> int:
    sc = _load_scenario(args)
    res = solve(sc, _budget(args), collapse=not args.no_collapse)
    _emit({**_header(args), "kind": "solve", "scenario": sc.name, **res.to_record(sc, timing=not args.stable)})
    return EXIT_BUDGET if res.status == "budget-exceeded" else EXIT_OK


def cmd_matrix(args) -> int:
    profile, names = read_profile(args.file)
    if args.which == "rank":
        lines = rank_matrix(profile).render(names)
    elif args.which == "support":
        lines = support_matrix(profile).render(names)
    elif args.which == "majority":
        lines = majority_relation(profile).render(names)
    else:
        lines = render_grid(margin_matrix(profile), names)
    print("\n".join(lines))
    return EXIT_OK


def cmd_scenarios(args) -> int:
    for name in scenario_names():
        sc = get_scenario(name)
        _emit({"kind": "scenario", "name": name, "m": sc.m, "n": sc.n, "profiles": len(sc.profiles),
               "axioms": sorted(sc.axioms), "expect": sc.expect.kind if sc.expect else None})
    return EXIT_OK


def cmd_export(args) -> int:
    sys.stdout.write(render_scenario(get_scenario(args.name)))
    return EXIT_OK


def cmd_rules(args) -> int:
    for name, rule in REGISTRY.items():
        _emit({"kind": "rule", "name": name, "strict_only": rule.requires_strict,
               "description": rule.description})
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kellyscf", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"kellyscf {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def domain(sp):
        sp.add_argument("--m", type=int, required=True, help="number of alternatives")
        sp.add_argument("--n", type=int, required=True, help="number of voters")
        sp.add_argument("--strict", action="store_true", help="linear orders only")
        sp.add_argument("--exclude-indifferent", action="store_true",
                        help="drop the order that ties every alternative")
        sp.add_argument("--jobs", type=int, default=1, help="worker processes for the outcome table")
        sp.add_argument("--stable", action="store_true", help="omit timings for byte-identical reports")

    sp = sub.add_parser("eval", help="evaluate a rule on a profile file")
    sp.add_argument("rule")
    sp.add_argument("file")
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("check", help="check an axiom on a whole domain")
    sp.add_argument("rule")
    sp.add_argument("axiom")
    domain(sp)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("nominators", help="list the voters who are nominators")
    sp.add_argument("rule")
    domain(sp)
    sp.set_defaults(func=cmd_nominators)

    def scenario_args(sp):
        sp.add_argument("name", nargs="?")
        sp.add_argument("--file", help="scenario text file instead of a library name")
        sp.add_argument("--nodes", type=int, help="search node budget")
        sp.add_argument("--seconds", type=float, help="search time budget")
        sp.add_argument("--stable", action="store_true", help="omit timings")

    sp = sub.add_parser("verify", help="replay a proof scenario")
    scenario_args(sp)
    sp.add_argument("--trace", action="store_true", help="include the full deduction trace")
    sp.add_argument("--jobs", type=int, help=argparse.SUPPRESS)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("solve", help="backtracking search over a scenario")
    scenario_args(sp)
    sp.add_argument("--no-collapse", action="store_true", help="keep linked profiles as separate variables")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("matrix", help="print a derived structure of a profile")
    sp.add_argument("file")
    sp.add_argument("--which", choices=["rank", "support", "majority", "margins"], default="rank")
    sp.set_defaults(func=cmd_matrix)

    sp = sub.add_parser("scenarios", help="list built-in scenarios")
    sp.set_defaults(func=cmd_scenarios)

    sp = sub.add_parser("export-scenario", help="print a built-in scenario in text form")
    sp.add_argument("name")
    sp.set_defaults(func=cmd_export)

    sp = sub.add_parser("rules", help="list registered rules")
    sp.set_defaults(func=cmd_rules)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    args.argv = argv
    try:
        return args.func(args)
    except KeyError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
    except (DomainError, CapacityError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
