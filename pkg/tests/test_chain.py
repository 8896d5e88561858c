"""Chain construction from the LCS and the abstract chain check."""

import pytest

from conftest import load_benchmark
from wpx.chain import chain_from_lcs, verify_chain_abstract
from wpx.graph import PathSet, PathString, build_graph, enumerate_paths
from wpx.lcs import LcsResult, lcs_multi


def wlm_problem():
    _model, problem = load_benchmark("wlm", "depth20.prob")
    return problem


def test_chain_entries_carry_widened_subproblems():
    problem = wlm_problem()
    chain = chain_from_lcs(problem, LcsResult(sequence=(0, 4, 5), trivial=False))
    assert chain.locations == (0, 4, 5)
    assert [e.location_name for e in chain.entries] == ["l1", "l5", "l6"]
    for i, entry in enumerate(chain.entries):
        assert entry.position == i
        assert entry.problem.goal.location == entry.location
        assert entry.problem.goal.region == problem.domain.location(entry.location).invariant
        assert entry.problem.depth == problem.depth
    assert not chain.deduplicated_repeats


def test_chain_collapses_consecutive_repeats():
    problem = wlm_problem()
    chain = chain_from_lcs(problem, LcsResult(sequence=(0, 0, 4, 5), trivial=False))
    assert chain.locations == (0, 4, 5)
    assert chain.deduplicated_repeats
    assert chain.source_lcs == (0, 0, 4, 5)


def test_empty_lcs_rejected():
    with pytest.raises(ValueError):
        chain_from_lcs(wlm_problem(), LcsResult(sequence=(), trivial=False))


def test_verify_chain_abstract_on_benchmark():
    problem = wlm_problem()
    graph = build_graph(problem.domain)
    paths = enumerate_paths(graph, problem.init[0], problem.goal.location, problem.depth)
    chain = chain_from_lcs(problem, lcs_multi(paths))
    assert verify_chain_abstract(paths, chain)


def test_verify_chain_abstract_rejects_noncovering_chain():
    problem = wlm_problem()
    chain = chain_from_lcs(problem, LcsResult(sequence=(0, 1, 5), trivial=False))
    paths = PathSet((PathString((0, 4, 5)),))
    assert not verify_chain_abstract(paths, chain)
