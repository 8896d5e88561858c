"""Command-line front end.

Subcommands: ``paths`` (bounded path count), ``waypoints`` (the inevitable
waypoint chain), ``explain`` (the full explanation pipeline), ``check``
(one bounded reachability verdict), ``bench`` (run every bundled benchmark
and diff the structural fields against the expectations file).

Exit codes: 0 classified/answered, 2 input error, 3 resource cap exceeded,
4 internal invariant failure.  ``WPX_LOG`` selects the logging level.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass
from typing import List, Optional, Tuple

from .chain import chain_from_lcs
from .explain import ExplanationReport, explain
from .graph import (
    DEFAULT_PATH_CAP,
    ResourceCapExceeded,
    build_graph,
    enumerate_paths,
)
from .lcs import DEFAULT_CANDIDATE_CAP, lcs_multi
from .model import PlanningProblem
from .reach import bounded_reachable, extract_witness
from .textio import (
    ModelDocument,
    ParseError,
    format_rational,
    parse_model,
    parse_problem,
    serialize_report,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CAP = 3
EXIT_INTERNAL = 4

log = logging.getLogger("wpx")


@dataclass
class CliConfig:
    subcommand: str
    model: Optional[str]
    problem: Optional[str]
    depth: Optional[int]
    json_output: bool
    max_paths: int
    max_candidates: int
    parallel: int
    dump_lp: Optional[str]
    verbose: bool


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wpx",
        description="Waypoint-chain explanations for unsolvable bounded "
        "planning problems on linear hybrid automata.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name, help_text in (
        ("paths", "count (and optionally list) the bounded discrete paths"),
        ("waypoints", "print the chain of inevitable waypoints"),
        ("explain", "locate the first unreachable waypoint"),
        ("check", "decide bounded reachability of the problem as given"),
        ("bench", "run the bundled benchmarks against the expectations file"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--model", help="path to the .lha model file")
        p.add_argument("--problem", help="path to the .prob problem file")
        p.add_argument("--depth", type=int, help="override the problem depth")
        p.add_argument("--json", action="store_true", help="JSON output")
        p.add_argument(
            "--max-paths", type=int, default=DEFAULT_PATH_CAP,
            help="cap on enumerated paths",
        )
        p.add_argument(
            "--max-candidates", type=int, default=DEFAULT_CANDIDATE_CAP,
            help="cap on LCS candidate sequences",
        )
        p.add_argument(
            "--parallel", type=int, default=1,
            help="worker processes for reachability (output is identical for any value)",
        )
        p.add_argument("--dump-lp", help="directory for per-path LP dumps")
        p.add_argument(
            "-v", "--verbose", action="store_true", help="print full detail"
        )
    return parser


def _configure_logging() -> None:
    level_name = os.environ.get("WPX_LOG", "warning").upper()
    level = getattr(logging, level_name, logging.WARNING)
    logging.basicConfig(level=level, format="%(name)s %(levelname)s %(message)s")


def _load(config: CliConfig) -> Tuple[ModelDocument, PlanningProblem, str]:
    """Parse the model and problem; the model path may come from the
    problem file's ``model`` line, resolved relative to the problem file."""
    if config.problem is None:
        raise ParseError("a --problem file is required", 0, 0)
    with open(config.problem, encoding="utf-8") as fh:
        problem_text = fh.read()

    model_path = config.model
    if model_path is None:
        for raw in problem_text.split("\n"):
            stripped = raw.strip()
            if stripped.startswith("model "):
                ref = stripped[len("model "):].strip()
                model_path = os.path.join(os.path.dirname(config.problem), ref)
                break
    if model_path is None:
        raise ParseError(
            "no --model given and the problem file has no 'model' line", 0, 0
        )
    with open(model_path, encoding="utf-8") as fh:
        model_text = fh.read()
    model = parse_model(model_text, source=model_path)
    doc = parse_problem(problem_text, model, source=config.problem)
    problem = doc.problem
    if config.depth is not None:
        if config.depth < 0:
            raise ParseError("depth must be non-negative", 0, 0)
        problem = PlanningProblem(
            domain=problem.domain,
            init=problem.init,
            goal=problem.goal,
            depth=config.depth,
        )
    name = os.path.splitext(os.path.basename(config.problem))[0]
    return model, problem, name


def cmd_paths(config: CliConfig) -> int:
    _model, problem, _name = _load(config)
    graph = build_graph(problem.domain)
    init_loc, _ = problem.init
    paths = enumerate_paths(
        graph, init_loc, problem.goal.location, problem.depth, cap=config.max_paths
    )
    if config.json_output:
        doc = {"path_count": paths.count}
        if config.verbose:
            doc["paths"] = [
                [problem.domain.location(l).name for l in p.locations]
                for p in paths.paths
            ]
        print(json.dumps(doc, indent=2))
    else:
        print(paths.count)
        if config.verbose:
            for p in paths.paths:
                print(" ".join(problem.domain.location(l).name for l in p.locations))
    return EXIT_OK


def cmd_waypoints(config: CliConfig) -> int:
    _model, problem, _name = _load(config)
    graph = build_graph(problem.domain)
    init_loc, _ = problem.init
    paths = enumerate_paths(
        graph, init_loc, problem.goal.location, problem.depth, cap=config.max_paths
    )
    if paths.count == 0:
        if config.json_output:
            print(json.dumps({"chain": [], "note": "discrete-infeasible"}))
        else:
            print("discrete-infeasible: no bounded path reaches the goal location")
        return EXIT_OK
    lcs = lcs_multi(paths, cap=config.max_candidates)
    chain = chain_from_lcs(problem, lcs)
    names = [e.location_name for e in chain.entries]
    trivial = len(chain) <= 2
    if config.json_output:
        doc = {"chain": names, "trivial": trivial}
        if chain.deduplicated_repeats:
            doc["deduplicated_repeats"] = True
        print(json.dumps(doc, indent=2))
    else:
        print(" ".join(names))
        if trivial:
            print("note: trivial chain (endpoints only)")
        if chain.deduplicated_repeats:
            print("note: consecutive repeats in the LCS were collapsed")
    return EXIT_OK


def _print_text_report(report: ExplanationReport) -> None:
    print("outcome: %s" % report.outcome)
    print("path_count: %d" % report.path_count)
    if report.chain is not None:
        print("chain: %s" % " ".join(e.location_name for e in report.chain.entries))
    for v in report.verdicts:
        status = "unreachable" if v.status == "UNSAT" else "reachable"
        print(
            "  %-12s %-11s paths_checked=%d" % (v.location_name, status, v.paths_checked)
        )
    if report.explanation_name is not None:
        print("explanation: %s" % report.explanation_name)
    plan = report.witness_plan
    if plan is not None:
        for t, label in plan.steps:
            print("  plan step t=%s %s" % (format_rational(t), label))
        print("  makespan %s" % format_rational(plan.makespan))
    for note in report.annotations:
        print("note: %s" % note)
    print(
        "timings_ms: path_enumeration=%.2f lcs=%.2f reachability=%.2f"
        % (
            report.timings_ms["path_enumeration"],
            report.timings_ms["lcs"],
            report.timings_ms["reachability"],
        )
    )


def cmd_explain(config: CliConfig) -> int:
    _model, problem, name = _load(config)
    report = explain(
        problem,
        name=name,
        cap=config.max_paths,
        parallel=config.parallel,
        dump_dir=config.dump_lp,
    )
    if config.json_output:
        print(serialize_report(report))
    else:
        _print_text_report(report)
    return EXIT_OK


def cmd_check(config: CliConfig) -> int:
    _model, problem, _name = _load(config)
    verdict = bounded_reachable(
        problem, cap=config.max_paths, parallel=config.parallel, dump_dir=config.dump_lp
    )
    if config.json_output:
        doc = {"status": verdict.status, "paths_checked": verdict.paths_checked}
        if verdict.is_sat:
            _run, plan = extract_witness(problem, verdict)
            doc["plan"] = {
                "steps": [[format_rational(t), label] for t, label in plan.steps],
                "makespan": format_rational(plan.makespan),
            }
        print(json.dumps(doc, indent=2))
    else:
        print("%s (paths_checked=%d)" % (verdict.status, verdict.paths_checked))
        if verdict.is_sat:
            _run, plan = extract_witness(problem, verdict)
            for t, label in plan.steps:
                print("  plan step t=%s %s" % (format_rational(t), label))
            print("  makespan %s" % format_rational(plan.makespan))
    return EXIT_OK


def benchmarks_root() -> str:
    return os.path.join(os.path.dirname(os.path.abspath(__file__)), "benchmarks")


def cmd_bench(config: CliConfig) -> int:
    root = benchmarks_root()
    with open(os.path.join(root, "expectations.json"), encoding="utf-8") as fh:
        expectations = json.load(fh)
    mismatches = 0
    for entry in expectations["rows"]:
        bench_dir = os.path.join(root, entry["dir"])
        sub = CliConfig(
            subcommand="explain",
            model=os.path.join(bench_dir, entry["model"]),
            problem=os.path.join(bench_dir, entry["problem"]),
            depth=entry["depth"],
            json_output=False,
            max_paths=config.max_paths,
            max_candidates=config.max_candidates,
            parallel=config.parallel,
            dump_lp=None,
            verbose=False,
        )
        _model, problem, name = _load(sub)
        report = explain(
            problem, name=name, cap=config.max_paths, parallel=config.parallel
        )
        actual = {
            "path_count": report.path_count,
            "chain_length": len(report.chain) if report.chain else 0,
            "feasible": report.feasible_count,
            "explanation": report.explanation_name,
        }
        row_ok = True
        diffs = []
        for key, expected in entry["expected"].items():
            if expected is None:
                continue
            if actual.get(key) != expected:
                row_ok = False
                diffs.append("%s: expected %r, got %r" % (key, expected, actual.get(key)))
        tag = "ok" if row_ok else "MISMATCH"
        print("%-24s depth=%-3d %s" % (entry["name"], entry["depth"], tag))
        for d in diffs:
            print("    " + d)
        if not row_ok:
            mismatches += 1
    print("%d row(s) diverged from expectations" % mismatches)
    return EXIT_OK


_COMMANDS = {
    "paths": cmd_paths,
    "waypoints": cmd_waypoints,
    "explain": cmd_explain,
    "check": cmd_check,
    "bench": cmd_bench,
}


def main(argv: Optional[List[str]] = None) -> int:
    _configure_logging()
    args = _build_parser().parse_args(argv)
    config = CliConfig(
        subcommand=args.subcommand,
        model=args.model,
        problem=args.problem,
        depth=args.depth,
        json_output=args.json,
        max_paths=args.max_paths,
        max_candidates=args.max_candidates,
        parallel=args.parallel,
        dump_lp=args.dump_lp,
        verbose=args.verbose,
    )
    if config.max_paths <= 0 or config.max_candidates <= 0 or config.parallel <= 0:
        print("caps and parallelism must be positive", file=sys.stderr)
        return EXIT_INPUT
    try:
        return _COMMANDS[config.subcommand](config)
    except (ParseError, OSError) as exc:
        print("input error: %s" % exc, file=sys.stderr)
        return EXIT_INPUT
    except ResourceCapExceeded as exc:
        print("resource cap: %s" % exc, file=sys.stderr)
        return EXIT_CAP
    except AssertionError as exc:
        print("internal invariant failure: %s" % exc, file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
