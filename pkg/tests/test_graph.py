"""Discrete abstraction: enumeration order, counting, caps, articulation."""

import random

import pytest

from oracles import random_digraph, recursive_walks
from wpx.graph import (
    Graph,
    PathString,
    ResourceCapExceeded,
    build_graph,
    count_paths,
    disconnecting_articulation_points,
    enumerate_paths,
    iter_walks,
)
from conftest import load_benchmark


def graph_from_succ(n, succ):
    edges = tuple(sorted((u, v) for u, vs in succ.items() for v in set(vs)))
    return Graph(
        vertex_count=n,
        edges=edges,
        transition_refs=tuple((e, (i,)) for i, e in enumerate(edges)),
    )


DIAMOND = graph_from_succ(4, {0: [1, 2], 1: [3], 2: [3], 3: [0]})


def test_walks_bfs_order_and_lexicographic_ties():
    walks = list(iter_walks(DIAMOND, 0, 3, 6))
    assert walks[0] == (0, 1, 3)
    assert walks[1] == (0, 2, 3)
    lengths = [len(w) - 1 for w in walks]
    assert lengths == sorted(lengths)


def test_zero_length_walk_when_source_is_target():
    walks = list(iter_walks(DIAMOND, 0, 0, 4))
    assert walks[0] == (0,)


def test_no_walks_beyond_depth():
    assert list(iter_walks(DIAMOND, 0, 3, 1)) == []


def test_self_loop_consumes_depth():
    g = graph_from_succ(2, {0: [0, 1]})
    walks = list(iter_walks(g, 0, 1, 3))
    assert (0, 0, 1) in walks and (0, 0, 0, 1) in walks


def test_enumerate_paths_cap():
    g = graph_from_succ(2, {0: [0, 1]})
    with pytest.raises(ResourceCapExceeded):
        enumerate_paths(g, 0, 1, 30, cap=5)


def test_count_paths_matches_enumeration():
    rng = random.Random(7)
    for _ in range(200):
        n, succ = random_digraph(rng)
        g = graph_from_succ(n, succ)
        src, tgt = rng.randrange(n), rng.randrange(n)
        depth = rng.randint(0, 5)
        walks = list(iter_walks(g, src, tgt, depth))
        assert len(walks) == count_paths(g, src, tgt, depth)


def test_enumeration_matches_recursive_oracle():
    rng = random.Random(11)
    for _ in range(300):
        n, succ = random_digraph(rng)
        g = graph_from_succ(n, succ)
        src, tgt = rng.randrange(n), rng.randrange(n)
        depth = rng.randint(0, 5)
        assert list(iter_walks(g, src, tgt, depth)) == recursive_walks(
            succ, src, tgt, depth
        )


def test_build_graph_collapses_parallel_transitions():
    _model, problem = load_benchmark("wlm", "depth20.prob")
    g = build_graph(problem.domain)
    assert g.vertex_count == 6
    assert len(g.edges) == 6
    assert g.transitions_for(0, 1) == (0,)


def test_path_string_length_is_edge_count():
    assert PathString((0, 1, 3)).length == 2


def test_articulation_line_graph():
    g = graph_from_succ(4, {0: [1], 1: [2], 2: [3]})
    assert disconnecting_articulation_points(g, 0, 3, 5) == {1, 2}


def test_articulation_depth_sensitive():
    # Short route through 1; long detour 0-2-3-4; depth forbids the detour.
    g = graph_from_succ(5, {0: [1, 2], 1: [4], 2: [3], 3: [4]})
    assert disconnecting_articulation_points(g, 0, 4, 2) == {1}
    assert disconnecting_articulation_points(g, 0, 4, 3) == set()


def test_articulation_empty_when_disconnected():
    g = graph_from_succ(3, {0: [1]})
    assert disconnecting_articulation_points(g, 0, 2, 5) == set()
