"""CLI behavior: subcommands, output modes, exit codes."""

import json
import os

import pytest

from conftest import BENCH_ROOT
from wpx.cli import EXIT_CAP, EXIT_INPUT, EXIT_OK, main


def bench(*parts):
    return os.path.join(BENCH_ROOT, *parts)


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_paths_prints_count(capsys):
    code, out, _ = run(capsys, "paths", "--problem", bench("wlm", "depth50.prob"))
    assert code == EXIT_OK
    assert out.strip() == "13"


def test_paths_verbose_lists_paths(capsys):
    code, out, _ = run(
        capsys, "paths", "--problem", bench("wlm", "depth20.prob"), "--verbose"
    )
    assert code == EXIT_OK
    lines = out.strip().split("\n")
    assert lines[0] == "5"
    assert lines[1] == "l1 l5 l6"


def test_paths_depth_override(capsys):
    code, out, _ = run(
        capsys, "paths", "--problem", bench("wlm", "depth50.prob"), "--depth", "20"
    )
    assert code == EXIT_OK
    assert out.strip() == "5"


def test_paths_disconnected_goal_prints_zero(capsys, tmp_path):
    model = tmp_path / "m.lha"
    model.write_text(
        "vars x\nlocation a { rate x in [0,0]; }\n"
        "location b { rate x in [0,0]; }\ninit a {}\n"
    )
    prob = tmp_path / "p.prob"
    prob.write_text("model m.lha\ngoal b\ndepth 5\n")
    code, out, _ = run(capsys, "paths", "--problem", str(prob))
    assert code == EXIT_OK
    assert out.strip() == "0"


def test_waypoints_chain_output(capsys):
    code, out, _ = run(capsys, "waypoints", "--problem", bench("rover", "depth12.prob"))
    assert code == EXIT_OK
    assert out.split("\n")[0] == "l11 l6 l1 l2 l3 l8 l13 l14 l25"


def test_waypoints_trivial_note(capsys):
    code, out, _ = run(capsys, "waypoints", "--problem", bench("nrs", "depth15.prob"))
    assert code == EXIT_OK
    assert "trivial chain" in out


def test_explain_text_output(capsys):
    code, out, _ = run(capsys, "explain", "--problem", bench("wlm", "depth20.prob"))
    assert code == EXIT_OK
    assert "outcome: FirstUnreachableWaypoint" in out
    assert "explanation: l6" in out
    assert "timings_ms:" in out


def test_explain_json_output(capsys):
    code, out, _ = run(
        capsys, "explain", "--problem", bench("wa6x6", "depth12.prob"), "--json"
    )
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["explanation"]["location"] == "l28"
    assert doc["chain"] == ["l5", "l6", "l12", "l18", "l28", "l27", "l26", "l19"]


def test_check_unsat(capsys):
    code, out, _ = run(capsys, "check", "--problem", bench("rover", "depth12.prob"))
    assert code == EXIT_OK
    assert out.startswith("UNSAT")


def test_check_sat_prints_plan(capsys, tmp_path):
    model = tmp_path / "m.lha"
    model.write_text(
        "vars x\nlocation a { rate x in [1,1]; }\n"
        "location b { rate x in [0,0]; }\n"
        "trans a -> b { label: hop; guard: x >= 2; }\n"
        "init a { x = 0; }\n"
    )
    prob = tmp_path / "p.prob"
    prob.write_text("model m.lha\ngoal b\ndepth 3\n")
    code, out, _ = run(capsys, "check", "--problem", str(prob))
    assert code == EXIT_OK
    assert out.startswith("SAT")
    assert "plan step t=2 hop" in out


def test_parse_error_exit_code(capsys, tmp_path):
    model = tmp_path / "m.lha"
    model.write_text("vars x\nlocation a { inv: x < 1; rate x in [0,0]; }\ninit a {}\n")
    prob = tmp_path / "p.prob"
    prob.write_text("model m.lha\ngoal a\ndepth 1\n")
    code, _, err = run(capsys, "paths", "--problem", str(prob))
    assert code == EXIT_INPUT
    assert "only closed constraints" in err


def test_missing_file_exit_code(capsys):
    code, _, err = run(capsys, "paths", "--problem", "/nonexistent/x.prob")
    assert code == EXIT_INPUT


def test_cap_exit_code(capsys):
    code, _, err = run(
        capsys, "paths", "--problem", bench("nav", "depth10.prob"),
        "--max-paths", "10",
    )
    assert code == EXIT_CAP
    assert "cap" in err


def test_invalid_cap_rejected(capsys):
    code, _, err = run(
        capsys, "paths", "--problem", bench("wlm", "depth20.prob"),
        "--max-paths", "0",
    )
    assert code == EXIT_INPUT


def test_bench_reports_rows(capsys):
    code, out, _ = run(capsys, "bench")
    assert code == EXIT_OK
    lines = [l for l in out.strip().split("\n")]
    assert sum(1 for l in lines if " ok" in l or "MISMATCH" in l) == 14
    # The single documented divergence: the depth-50 monitor path count.
    assert sum(1 for l in lines if "MISMATCH" in l) == 1
    assert "path_count: expected 12, got 13" in out


def test_parallel_output_identical(capsys):
    code1, out1, _ = run(
        capsys, "explain", "--problem", bench("rover", "depth12.prob"), "--json"
    )
    code4, out4, _ = run(
        capsys, "explain", "--problem", bench("rover", "depth12.prob"), "--json",
        "--parallel", "4",
    )
    assert code1 == code4 == EXIT_OK
    doc1, doc4 = json.loads(out1), json.loads(out4)
    doc1.pop("timings_ms")
    doc4.pop("timings_ms")
    assert doc1 == doc4


def test_dump_lp_directory(capsys, tmp_path):
    dump = tmp_path / "lps"
    code, _, _ = run(
        capsys, "check", "--problem", bench("wlm", "depth20.prob"),
        "--dump-lp", str(dump),
    )
    assert code == EXIT_OK
    assert any(f.endswith(".lp") for f in os.listdir(dump))
