"""Batch command-line front-end.

Commands: judge, lint, profile-check, explain. Exit codes partition outcomes
so lint can drive CI gates: 0 ok, 1 malformed input, 2 IO failure, 3 conflicts
found. Reports go to standard output; diagnostics to standard error.
"""
from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .dsl import Scenario, ScenarioParseError, parse_scenario
from .engine import ValidationFailure, explain, export_judgment, judge
from .model import CultureProfile
from .policy import detect_conflicts, export_conflicts
from .profiles import ProfileParseError, load_profile, serialize_profile

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_IO = 2
EXIT_CONFLICTS = 3

PROFILE_ENV_VAR = "MORALDYAD_PROFILE"


class _CliInputError(Exception):
    """Input rejected; diagnostics already formatted."""

    def __init__(self, messages: list[str]):
        self.messages = messages
        super().__init__("\n".join(messages))


def _read_text(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _load_scenario(path: str) -> Scenario:
    try:
        return parse_scenario(_read_text(path))
    except ScenarioParseError as exc:
        raise _CliInputError(
            [f"{path}:{e.line}:{e.column}: {e.kind.value}: {e.message}" for e in exc.errors])


def _resolve_profile(path: str | None) -> CultureProfile:
    if path is None:
        path = os.environ.get(PROFILE_ENV_VAR)
    if path is None:
        return CultureProfile()
    try:
        return load_profile(_read_text(path))
    except ProfileParseError as exc:
        raise _CliInputError(
            [f"{path}:{e.line}:{e.column}: {e.kind.value}: {e.message}" for e in exc.errors])


def _map_files(paths: list[str], jobs: int, fn) -> list:
    if jobs > 1 and len(paths) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, paths))
    return [fn(path) for path in paths]


def _cmd_judge(args: argparse.Namespace) -> int:
    profile = _resolve_profile(args.profile)

    def judge_one(path: str) -> str:
        scenario = _load_scenario(path)
        judgment = judge(scenario.graph, profile)
        text = export_judgment(judgment, fmt=args.format)
        if args.trace:
            text += explain(judgment)
        if args.figures:
            from .figures import render_judgment_figures

            render_judgment_figures(judgment, args.figures, Path(path).stem)
        return text

    outputs = _map_files(args.scenario, args.jobs, judge_one)
    for index, (path, text) in enumerate(zip(args.scenario, outputs)):
        if len(args.scenario) > 1:
            if index:
                sys.stdout.write("\n")
            sys.stdout.write(f"# scenario: {path}\n")
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_lint(args: argparse.Namespace) -> int:
    profile = _resolve_profile(args.profile)

    def lint_one(path: str):
        scenario = _load_scenario(path)
        reports = detect_conflicts(scenario.obligations, scenario.graph, profile)
        if args.figures and reports:
            from .figures import render_conflict_figures

            render_conflict_figures(reports, args.figures, Path(path).stem)
        return export_conflicts(reports), bool(reports)

    results = _map_files(args.scenario, args.jobs, lint_one)
    any_conflicts = False
    for index, (path, (text, found)) in enumerate(zip(args.scenario, results)):
        any_conflicts = any_conflicts or found
        if len(args.scenario) > 1:
            if index:
                sys.stdout.write("\n")
            sys.stdout.write(f"# scenario: {path}\n")
        sys.stdout.write(text)
    return EXIT_CONFLICTS if any_conflicts else EXIT_OK


def _cmd_profile_check(args: argparse.Namespace) -> int:
    try:
        profile = load_profile(_read_text(args.profile_path))
    except ProfileParseError as exc:
        raise _CliInputError(
            [f"{args.profile_path}:{e.line}:{e.column}: {e.kind.value}: {e.message}"
             for e in exc.errors])
    sys.stdout.write(serialize_profile(profile))
    return EXIT_OK


def _cmd_explain(args: argparse.Namespace) -> int:
    profile = _resolve_profile(args.profile)
    scenario = _load_scenario(args.scenario)
    judgment = judge(scenario.graph, profile)
    sys.stdout.write(explain(judgment))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="moraldyad",
        description="Judge dyadic moral scenarios and lint policy obligations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    judge_p = sub.add_parser("judge", help="score one or more scenario files")
    judge_p.add_argument("scenario", nargs="+", help="scenario file path(s)")
    judge_p.add_argument("--profile", default=None,
                         help=f"culture profile path (default: ${PROFILE_ENV_VAR} or neutral)")
    judge_p.add_argument("--format", choices=("json", "tsv"), default="json",
                         help="export style (default: json)")
    judge_p.add_argument("--trace", action="store_true",
                         help="append the human-readable trace report")
    judge_p.add_argument("--figures", default=None, metavar="DIR",
                         help="also render report figures into DIR")
    judge_p.add_argument("--jobs", type=int, default=1,
                         help="parallelize over multiple scenario files")
    judge_p.set_defaults(fn=_cmd_judge)

    lint_p = sub.add_parser("lint", help="detect policy obligation conflicts")
    lint_p.add_argument("scenario", nargs="+", help="scenario file path(s)")
    lint_p.add_argument("--profile", default=None)
    lint_p.add_argument("--figures", default=None, metavar="DIR")
    lint_p.add_argument("--jobs", type=int, default=1)
    lint_p.set_defaults(fn=_cmd_lint)

    check_p = sub.add_parser("profile-check", help="validate and dump a profile")
    check_p.add_argument("profile_path")
    check_p.set_defaults(fn=_cmd_profile_check)

    explain_p = sub.add_parser("explain", help="print only the judgment trace report")
    explain_p.add_argument("scenario")
    explain_p.add_argument("--profile", default=None)
    explain_p.set_defaults(fn=_cmd_explain)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except _CliInputError as exc:
        for message in exc.messages:
            print(message, file=sys.stderr)
        return EXIT_INPUT
    except ValidationFailure as exc:
        for violation in exc.violations:
            print(f"invalid input: {violation.invariant}({violation.offender}): "
                  f"{violation.message}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
