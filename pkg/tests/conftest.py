import os

import pytest

from wpx.cli import CliConfig, _load

BENCH_ROOT = os.path.join(
    os.path.dirname(os.path.dirname(os.path.abspath(__file__))),
    "src", "wpx", "benchmarks",
)


def load_benchmark(dirname: str, probname: str, depth=None):
    """Parse a bundled benchmark problem, optionally overriding the depth."""
    config = CliConfig(
        subcommand="explain",
        model=None,
        problem=os.path.join(BENCH_ROOT, dirname, probname),
        depth=depth,
        json_output=False,
        max_paths=1 << 22,
        max_candidates=1 << 20,
        parallel=1,
        dump_lp=None,
        verbose=False,
    )
    model, problem, name = _load(config)
    return model, problem


def benchmark_problems():
    """Every bundled (dirname, probname) pair."""
    out = []
    for d in sorted(os.listdir(BENCH_ROOT)):
        full = os.path.join(BENCH_ROOT, d)
        if not os.path.isdir(full):
            continue
        for p in sorted(os.listdir(full)):
            if p.endswith(".prob"):
                out.append((d, p))
    return out


@pytest.fixture
def bench_root():
    return BENCH_ROOT
