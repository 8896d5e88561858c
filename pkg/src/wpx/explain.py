"""End-to-end explanation of unsolvable bounded planning problems.

Pipeline: enumerate the bounded path set of the discrete abstraction,
reduce it to the chain of inevitable waypoints via the multi-string LCS,
then walk the chain with the widened sub-problems until the first waypoint
whose bounded reachability check comes back infeasible.  Four mutually
exclusive outcomes cover every case, including the degenerate ones where
the discrete abstraction already fails or where the original problem turns
out to be solvable after all.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

from .chain import WaypointChain, chain_from_lcs
from .graph import DEFAULT_PATH_CAP, build_graph, enumerate_paths
from .lcs import lcs_multi
from .model import PlanningProblem, init_within_invariant
from .reach import Verdict, bounded_reachable

OUTCOME_DISCRETE_INFEASIBLE = "DiscreteInfeasible"
OUTCOME_FIRST_UNREACHABLE = "FirstUnreachableWaypoint"
OUTCOME_NO_WAYPOINT = "NoWaypointExplanation"
OUTCOME_SOLVABLE = "SolvableContradiction"

STATUS_SAT = "SAT"
STATUS_UNSAT = "UNSAT"
STATUS_TRIVIAL = "TRIVIAL"
STATUS_SKIPPED = "SKIPPED"


@dataclass(frozen=True)
class WaypointVerdict:
    location: int
    location_name: str
    status: str
    paths_checked: int


@dataclass(frozen=True)
class ExplanationReport:
    problem_name: str
    problem: PlanningProblem
    outcome: str
    path_count: int
    chain: Optional[WaypointChain]
    verdicts: Tuple[WaypointVerdict, ...]
    explanation: Optional[int]
    explanation_name: Optional[str]
    witness_verdict: Optional[Verdict]
    timings_ms: Dict[str, float] = field(default_factory=dict)
    annotations: Tuple[str, ...] = ()

    @property
    def feasible_count(self) -> int:
        """Reachable chain entries, counting the trivially reachable init."""
        return sum(
            1 for v in self.verdicts if v.status in (STATUS_SAT, STATUS_TRIVIAL)
        )

    # --- serialization adapters ------------------------------------------

    @property
    def problem_summary(self) -> Dict[str, object]:
        domain = self.problem.domain
        init_loc, _ = self.problem.init
        return {
            "name": self.problem_name,
            "init_location": domain.location(init_loc).name,
            "goal_location": domain.location(self.problem.goal.location).name,
            "depth": self.problem.depth,
        }

    @property
    def chain_locations(self) -> Tuple[str, ...]:
        if self.chain is None:
            return ()
        return tuple(e.location_name for e in self.chain.entries)

    def explanation_json(self) -> Dict[str, object]:
        return {"outcome": self.outcome, "location": self.explanation_name}

    @property
    def witness_plan(self):
        if self.witness_verdict is None or not self.witness_verdict.is_sat:
            return None
        from .reach import extract_witness

        _run, plan = extract_witness(self.problem, self.witness_verdict)
        return plan


def classify_trivial_chain(chain: WaypointChain) -> bool:
    """A chain holding only the endpoints carries no interior waypoint and
    therefore cannot localize a cause beyond the goal itself."""
    return len(chain) <= 2


def explain(
    problem: PlanningProblem,
    name: str = "problem",
    cap: int = DEFAULT_PATH_CAP,
    parallel: int = 1,
    dump_dir: Optional[str] = None,
) -> ExplanationReport:
    """Locate the first unreachable inevitable waypoint of ``problem``.

    The first chain entry is skipped without an LP call when the init
    region syntactically entails the initial location's invariant, making
    that sub-problem reachable by the zero-length run.
    """
    annotations = []
    timings: Dict[str, float] = {}
    init_loc, _ = problem.init
    graph = build_graph(problem.domain)

    t0 = time.perf_counter()
    paths = enumerate_paths(graph, init_loc, problem.goal.location, problem.depth, cap=cap)
    timings["path_enumeration"] = (time.perf_counter() - t0) * 1000.0

    if paths.count == 0:
        timings["lcs"] = 0.0
        timings["reachability"] = 0.0
        return ExplanationReport(
            problem_name=name,
            problem=problem,
            outcome=OUTCOME_DISCRETE_INFEASIBLE,
            path_count=0,
            chain=None,
            verdicts=(),
            explanation=None,
            explanation_name=None,
            witness_verdict=None,
            timings_ms=timings,
            annotations=("no bounded discrete path reaches the goal location",),
        )

    t1 = time.perf_counter()
    lcs = lcs_multi(paths)
    chain = chain_from_lcs(problem, lcs)
    timings["lcs"] = (time.perf_counter() - t1) * 1000.0
    if chain.deduplicated_repeats:
        annotations.append("consecutive repeats in the LCS were collapsed")
    if classify_trivial_chain(chain):
        annotations.append("chain is trivial (endpoints only)")

    verdicts = []
    failed: Optional[int] = None
    t2 = time.perf_counter()
    for entry in chain.entries:
        if entry.location == init_loc and entry.position == 0 and init_within_invariant(problem):
            verdicts.append(
                WaypointVerdict(
                    location=entry.location,
                    location_name=entry.location_name,
                    status=STATUS_TRIVIAL,
                    paths_checked=0,
                )
            )
            continue
        verdict = bounded_reachable(
            entry.problem, cap=cap, parallel=parallel, dump_dir=dump_dir
        )
        verdicts.append(
            WaypointVerdict(
                location=entry.location,
                location_name=entry.location_name,
                status=verdict.status,
                paths_checked=verdict.paths_checked,
            )
        )
        if not verdict.is_sat:
            failed = entry.location
            break

    witness_verdict: Optional[Verdict] = None
    if failed is not None:
        timings["reachability"] = (time.perf_counter() - t2) * 1000.0
        return ExplanationReport(
            problem_name=name,
            problem=problem,
            outcome=OUTCOME_FIRST_UNREACHABLE,
            path_count=paths.count,
            chain=chain,
            verdicts=tuple(verdicts),
            explanation=failed,
            explanation_name=problem.domain.location(failed).name,
            witness_verdict=None,
            timings_ms=timings,
            annotations=tuple(annotations),
        )

    # Every waypoint is reachable: decide the original exact-goal problem.
    final = bounded_reachable(problem, cap=cap, parallel=parallel, dump_dir=dump_dir)
    timings["reachability"] = (time.perf_counter() - t2) * 1000.0
    if final.is_sat:
        annotations.append("the problem is solvable; no explanation exists")
        return ExplanationReport(
            problem_name=name,
            problem=problem,
            outcome=OUTCOME_SOLVABLE,
            path_count=paths.count,
            chain=chain,
            verdicts=tuple(verdicts),
            explanation=None,
            explanation_name=None,
            witness_verdict=final,
            timings_ms=timings,
            annotations=tuple(annotations),
        )
    annotations.append(
        "every inevitable waypoint is reachable but the exact goal is not"
    )
    return ExplanationReport(
        problem_name=name,
        problem=problem,
        outcome=OUTCOME_NO_WAYPOINT,
        path_count=paths.count,
        chain=chain,
        verdicts=tuple(verdicts),
        explanation=None,
        explanation_name=None,
        witness_verdict=None,
        timings_ms=timings,
        annotations=tuple(annotations),
    )
