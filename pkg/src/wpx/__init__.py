"""Waypoint-chain explanations for unsolvable bounded planning problems on
linear hybrid automata."""

from .chain import ChainEntry, WaypointChain, chain_from_lcs
from .explain import ExplanationReport, WaypointVerdict, explain
from .graph import PathSet, PathString, ResourceCapExceeded, build_graph, enumerate_paths
from .lcs import LcsResult, lcs_multi
from .model import (
    GoalSpec,
    HybridAutomaton,
    LinearConstraint,
    LinearExpression,
    Location,
    Plan,
    PlanningProblem,
    Polyhedron,
    Rational,
    Relation,
    Transition,
    WitnessRun,
    alpha,
    check_witness,
    validate_model,
)
from .reach import ConcretePath, LpProblem, Verdict, bounded_reachable, encode_path, lp_feasible
from .textio import ParseError, parse_model, parse_problem, serialize_model, serialize_report

__version__ = "0.1.0"
