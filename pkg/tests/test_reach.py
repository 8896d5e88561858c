"""Path-oriented reachability: encoding, exact feasibility, witnesses."""

import os
import random
from fractions import Fraction

import pytest

import wpx.reach as reach
from conftest import load_benchmark
from oracles import fm_feasible, random_automaton, random_lp
from wpx.model import (
    GoalSpec,
    LinearConstraint,
    LinearExpression,
    PlanningProblem,
    Polyhedron,
    Relation,
    check_witness,
)
from wpx.reach import (
    ConcretePath,
    LpProblem,
    bounded_reachable,
    encode_path,
    enumerate_concrete_paths,
    extract_witness,
    lp_feasible,
)
from wpx.textio import parse_model, parse_problem

HOP = """
vars x t
location a {
  inv: x >= 0;
  rate x in [1, 2];
  rate t in [1, 1];
}
location b {
  inv: x <= 20;
  rate x in [0, 0];
  rate t in [1, 1];
}
trans a -> b {
  label: hop;
  guard: x >= 3; t >= 1;
  reset t in [0, 0];
}
init a { x = 0; t = 0; }
"""


def hop_problem(goal="b", depth=2, goal_region=""):
    doc = parse_model(HOP)
    prob = parse_problem("goal %s %s\ndepth %d\n" % (goal, goal_region, depth), doc)
    return prob.problem


def test_enumerate_concrete_paths_order_and_ids():
    problem = hop_problem()
    paths = list(
        enumerate_concrete_paths(problem.domain, 0, 1, 3)
    )
    assert paths[0].locations == (0, 1)
    assert paths[0].transitions == (0,)
    assert all(p.length == len(p.locations) - 1 for p in paths)


def test_concrete_paths_respect_depth_zero():
    problem = hop_problem()
    assert list(enumerate_concrete_paths(problem.domain, 0, 0, 0))[0].locations == (0,)
    assert list(enumerate_concrete_paths(problem.domain, 0, 1, 0)) == []


def test_encode_path_variable_and_constraint_shape():
    problem = hop_problem()
    path = ConcretePath((0, 1), (0,))
    lp = encode_path(problem, path)
    assert "x@0in" in lp.variables and "x@1out" in lp.variables
    assert "d0" in lp.variables and "d1" in lp.variables
    # init equalities, invariants at both endpoints, dwell nonnegativity,
    # rate bands, guard, reset, goal invariant.
    assert any(c.relation is Relation.EQ for c in lp.constraints)


def test_encode_path_rejects_wrong_endpoints():
    problem = hop_problem()
    with pytest.raises(ValueError):
        encode_path(problem, ConcretePath((1, 1), (0,)))


def test_lp_feasible_simple_sat_and_witness():
    lp = LpProblem(
        variables=("u", "v"),
        constraints=(
            LinearConstraint(LinearExpression.build({"u": 1, "v": 1}, -4), Relation.EQ),
            LinearConstraint(LinearExpression.build({"u": 1}, -1), Relation.GE),
            LinearConstraint(LinearExpression.build({"v": 1}), Relation.GE),
        ),
    )
    verdict = lp_feasible(lp)
    assert verdict.is_sat
    w = verdict.witness_dict()
    assert w["u"] + w["v"] == 4 and w["u"] >= 1 and w["v"] >= 0


def test_lp_feasible_contradictory_equalities():
    lp = LpProblem(
        variables=("u",),
        constraints=(
            LinearConstraint(LinearExpression.build({"u": 1}, -1), Relation.EQ),
            LinearConstraint(LinearExpression.build({"u": 1}, -2), Relation.EQ),
        ),
    )
    assert not lp_feasible(lp).is_sat


def test_lp_feasible_unbounded_free_variable():
    lp = LpProblem(
        variables=("u",),
        constraints=(
            LinearConstraint(LinearExpression.build({"u": 1}, 100), Relation.LE),
        ),
    )
    verdict = lp_feasible(lp)
    assert verdict.is_sat
    assert verdict.witness_dict()["u"] <= -100


def test_lp_feasible_matches_fm_oracle_random():
    rng = random.Random(101)
    for _ in range(300):
        lp = random_lp(rng)
        assert lp_feasible(lp).is_sat == fm_feasible(lp)


def test_sat_witness_satisfies_all_constraints():
    rng = random.Random(55)
    sats = 0
    for _ in range(300):
        lp = random_lp(rng)
        verdict = lp_feasible(lp)
        if verdict.is_sat:
            sats += 1
            w = verdict.witness_dict()
            for c in lp.constraints:
                assert c.holds(w)
    assert sats > 20


def test_bounded_reachable_sat_with_plan():
    problem = hop_problem()
    verdict = bounded_reachable(problem)
    assert verdict.is_sat
    assert verdict.paths_checked == 1
    run, plan = extract_witness(problem, verdict)
    assert check_witness(problem.domain, problem.init, problem.goal, run) == []
    assert plan.steps[-1][1] == "hop"
    assert plan.makespan == run.makespan()


def test_bounded_reachable_unsat_guard_conflict():
    # Guard x >= 3 with dwell bounded by t: depth 0 cannot leave a, and the
    # goal region below is unreachable in b.
    problem = hop_problem(goal="b", goal_region="{ x >= 100 }")
    verdict = bounded_reachable(problem)
    assert not verdict.is_sat
    assert verdict.witness is None


def test_goal_region_conjoined_with_goal_invariant():
    # x can exceed 20 in a, but Inv(b) caps the final valuation.
    problem = hop_problem(goal="b", goal_region="{ x >= 21 }")
    assert not bounded_reachable(problem).is_sat
    problem2 = hop_problem(goal="b", goal_region="{ x >= 20 }")
    assert bounded_reachable(problem2).is_sat


def test_zero_length_goal_at_init():
    problem = hop_problem(goal="a", depth=0)
    verdict = bounded_reachable(problem)
    assert verdict.is_sat
    run, plan = extract_witness(problem, verdict)
    assert plan.steps == ()
    assert check_witness(problem.domain, problem.init, problem.goal, run) == []


def test_interval_preanalysis_agrees_with_enumeration(monkeypatch):
    rng = random.Random(77)
    checked = unsat_boxes = 0
    for _ in range(250):
        automaton = random_automaton(rng)
        goal = rng.randrange(len(automaton.locations))
        problem = PlanningProblem(
            domain=automaton,
            init=automaton.initial,
            goal=GoalSpec(location=goal, region=Polyhedron()),
            depth=rng.randint(0, 4),
        )
        with monkeypatch.context() as m:
            m.setattr(reach, "_interval_unreachable", lambda p: False)
            exact = bounded_reachable(problem).status
        fast = bounded_reachable(problem).status
        assert fast == exact
        checked += 1
        if fast == "UNSAT" and reach._interval_unreachable(problem):
            unsat_boxes += 1
    assert checked == 250
    assert unsat_boxes > 0  # the pre-analysis actually fires sometimes


def test_parallel_matches_sequential_on_benchmark():
    _model, problem = load_benchmark("rover", "depth12.prob")
    seq = bounded_reachable(problem)
    par = bounded_reachable(problem, parallel=4)
    assert (seq.status, seq.witness, seq.paths_checked) == (
        par.status, par.witness, par.paths_checked
    )


def test_dump_lp_writes_one_file_per_path(tmp_path):
    problem = hop_problem(goal="b", goal_region="{ x >= 100 }", depth=2)
    bounded_reachable(problem, dump_dir=str(tmp_path))
    files = sorted(os.listdir(tmp_path))
    assert files and all(f.endswith(".lp") for f in files)
    text = (tmp_path / files[0]).read_text()
    assert "# path 0" in text and "<= 0" in text


def test_witness_values_are_exact_fractions():
    problem = hop_problem()
    verdict = bounded_reachable(problem)
    assert all(isinstance(v, Fraction) for _k, v in verdict.witness)
