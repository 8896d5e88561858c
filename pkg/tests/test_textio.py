"""Grammar, round-trip, and report serialization tests."""

import json
import os
from fractions import Fraction

import pytest

from conftest import BENCH_ROOT, benchmark_problems, load_benchmark
from wpx.explain import explain
from wpx.model import Relation, validate_model
from wpx.textio import (
    ParseError,
    format_rational,
    parse_model,
    parse_problem,
    serialize_model,
    serialize_report,
)

MINI = """
# comment line
vars x t
location a {
  inv: x >= 0; x <= 10;
  rate x in [1, 2];
  rate t in [1, 1];
}
location b {
  rate x in [-1/2, 0];
  rate t in [1, 1];
}
trans a -> b {
  label: hop;
  guard: 2*x - t >= 1;
  reset t in [0, 0];
}
init a { x = 1.5; t = 0; }
"""


def test_parse_minimal_model():
    doc = parse_model(MINI)
    automaton = doc.automaton
    assert [l.name for l in automaton.locations] == ["a", "b"]
    assert automaton.variables == ("x", "t")
    assert automaton.initial[0] == 0
    (t,) = automaton.transitions
    assert t.label == "hop"
    assert automaton.location(1).rates.interval("x").lower == Fraction(-1, 2)
    init_region = automaton.initial[1]
    assert init_region.constraints[0].relation is Relation.EQ
    assert init_region.constraints[0].expression.constant == Fraction(-3, 2)


def test_strict_inequality_rejected_with_message():
    with pytest.raises(ParseError) as err:
        parse_model(MINI.replace("x >= 0", "x > 0"))
    assert "only closed constraints" in str(err.value)


def test_unknown_initial_location_rejected():
    with pytest.raises(ParseError):
        parse_model(MINI.replace("init a", "init zz"))


def test_missing_init_rejected():
    text = MINI[: MINI.index("init a")]
    with pytest.raises(ParseError) as err:
        parse_model(text)
    assert "missing 'init'" in str(err.value)


def test_validation_failure_surfaces_as_parse_error():
    with pytest.raises(ParseError) as err:
        parse_model(MINI.replace("rate t in [1, 1];\n}\nlocation b", "}\nlocation b", 1))
    assert "missing rate interval" in str(err.value)


def test_problem_parsing_with_override_and_depth():
    doc = parse_model(MINI)
    prob = parse_problem(
        "model some/file.lha\ninit b { x = 2; }\ngoal b { x >= 1; }\ndepth 7\n", doc
    ).problem
    assert prob.depth == 7
    assert prob.init[0] == 1
    assert prob.goal.location == 1
    assert len(prob.goal.region.constraints) == 1


def test_problem_requires_goal_and_depth():
    doc = parse_model(MINI)
    with pytest.raises(ParseError):
        parse_problem("depth 3\n", doc)
    with pytest.raises(ParseError):
        parse_problem("goal b\n", doc)


def test_mini_roundtrip():
    doc = parse_model(MINI)
    again = parse_model(serialize_model(doc.automaton))
    assert again.automaton == doc.automaton


@pytest.mark.parametrize("dirname,probname", benchmark_problems())
def test_benchmark_roundtrip_and_validation(dirname, probname):
    model, _problem = load_benchmark(dirname, probname)
    assert validate_model(model.automaton) == []
    again = parse_model(serialize_model(model.automaton))
    assert again.automaton == model.automaton


def test_format_rational():
    assert format_rational(Fraction(3)) == "3"
    assert format_rational(Fraction(-7, 2)) == "-7/2"


def test_serialize_report_schema_keys():
    _model, problem = load_benchmark("wlm", "depth20.prob")
    report = explain(problem, name="wlm")
    doc = json.loads(serialize_report(report))
    assert set(doc) >= {
        "problem", "path_count", "chain", "verdicts", "explanation", "timings_ms"
    }
    assert doc["chain"] == ["l1", "l5", "l6"]
    assert doc["verdicts"][-1]["status"] == "unreachable"
    assert set(doc["timings_ms"]) == {"path_enumeration", "lcs", "reachability"}


def test_serialize_report_validates_against_shipped_schema():
    jsonschema = pytest.importorskip("jsonschema")
    schema_path = os.path.join(
        os.path.dirname(BENCH_ROOT), "report.schema.json"
    )
    with open(schema_path, encoding="utf-8") as fh:
        schema = json.load(fh)
    _model, problem = load_benchmark("rover", "depth12.prob")
    report = explain(problem, name="rover")
    jsonschema.validate(json.loads(serialize_report(report)), schema)
