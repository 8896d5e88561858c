"""Discrete abstraction: the location graph, bounded walk enumeration, and
disconnecting articulation points.

"Path" throughout means a walk: vertex repetition is allowed, and a
self-loop consumes one depth unit.  Enumeration order is breadth first by
length with ties broken by location id at every expansion, which makes the
resulting path set (and everything derived from it downstream) fully
deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterator, List, Tuple

from .model import HybridAutomaton


class ResourceCapExceeded(RuntimeError):
    """Raised when an enumeration exceeds its configured cap."""

    def __init__(self, stage: str, cap: int):
        super().__init__("%s exceeded the configured cap of %d" % (stage, cap))
        self.stage = stage
        self.cap = cap


DEFAULT_PATH_CAP = 1 << 22


@dataclass(frozen=True)
class Graph:
    """Vertex set = location ids; one directed edge per connected location
    pair, with back-references to every underlying transition id."""

    vertex_count: int
    edges: Tuple[Tuple[int, int], ...]
    transition_refs: Tuple[Tuple[Tuple[int, int], Tuple[int, ...]], ...]

    def successors(self, v: int) -> Tuple[int, ...]:
        return self._succ.get(v, ())

    def __post_init__(self):
        succ: Dict[int, List[int]] = {}
        for s, t in self.edges:
            succ.setdefault(s, []).append(t)
        object.__setattr__(
            self, "_succ", {v: tuple(sorted(ts)) for v, ts in succ.items()}
        )

    def transitions_for(self, source: int, target: int) -> Tuple[int, ...]:
        for (s, t), refs in self.transition_refs:
            if s == source and t == target:
                return refs
        return ()


@dataclass(frozen=True)
class PathString:
    """A bounded walk from the initial location to the goal location."""

    locations: Tuple[int, ...]

    @property
    def length(self) -> int:
        """Edge count."""
        return len(self.locations) - 1


@dataclass(frozen=True)
class PathSet:
    paths: Tuple[PathString, ...]

    @property
    def count(self) -> int:
        return len(self.paths)


def build_graph(automaton: HybridAutomaton) -> Graph:
    """Collapse parallel transitions between the same location pair into one
    graph edge; self-loops are preserved."""
    refs: Dict[Tuple[int, int], List[int]] = {}
    for t in automaton.transitions:
        refs.setdefault((t.source, t.target), []).append(t.id)
    edges = tuple(sorted(refs))
    return Graph(
        vertex_count=len(automaton.locations),
        edges=edges,
        transition_refs=tuple((e, tuple(sorted(refs[e]))) for e in edges),
    )


def _reverse_distances(graph: Graph, target: int) -> Dict[int, int]:
    """Shortest edge-count distance from every vertex to the target."""
    pred: Dict[int, List[int]] = {}
    for s, t in graph.edges:
        pred.setdefault(t, []).append(s)
    dist = {target: 0}
    frontier = [target]
    while frontier:
        nxt = []
        for v in frontier:
            for u in pred.get(v, ()):
                if u not in dist:
                    dist[u] = dist[v] + 1
                    nxt.append(u)
        frontier = nxt
    return dist


def iter_walks(
    graph: Graph, source: int, target: int, depth: int
) -> Iterator[Tuple[int, ...]]:
    """Yield every source-to-target walk with edge count <= depth in BFS
    (length, then lexicographic-by-location-id) order.

    Implemented as iterative deepening with distance-to-target pruning so
    that memory stays proportional to the depth, not to the frontier; only
    prefixes that can still complete within the remaining budget are
    explored.  The zero-length walk [source] is yielded first iff
    source = target.
    """
    dist = _reverse_distances(graph, target)
    missing = depth + 1

    def exact(walk: List[int], vertex: int, edges_left: int) -> Iterator[Tuple[int, ...]]:
        if edges_left == 0:
            if vertex == target:
                yield tuple(walk)
            return
        for succ in graph.successors(vertex):
            if dist.get(succ, missing) <= edges_left - 1:
                walk.append(succ)
                yield from exact(walk, succ, edges_left - 1)
                walk.pop()

    if dist.get(source, missing) > depth:
        return
    for length in range(depth + 1):
        if dist.get(source, missing) <= length:
            yield from exact([source], source, length)


def enumerate_paths(
    graph: Graph,
    source: int,
    target: int,
    depth: int,
    cap: int = DEFAULT_PATH_CAP,
) -> PathSet:
    """Materialize PS: all bounded walks from source to target.

    Raises ResourceCapExceeded (rather than exhausting memory) when more
    than ``cap`` walks exist.
    """
    out: List[PathString] = []
    for walk in iter_walks(graph, source, target, depth):
        out.append(PathString(walk))
        if len(out) > cap:
            raise ResourceCapExceeded("path enumeration", cap)
    return PathSet(tuple(out))


def count_paths(graph: Graph, source: int, target: int, depth: int) -> int:
    """Walk count by dynamic programming; used for articulation tests so
    that vertex removal checks never enumerate."""
    current: Dict[int, int] = {source: 1}
    total = 1 if source == target else 0
    for _ in range(depth):
        nxt: Dict[int, int] = {}
        for v, k in current.items():
            for w in graph.successors(v):
                nxt[w] = nxt.get(w, 0) + k
        current = nxt
        total += current.get(target, 0)
        if not current:
            break
    return total


def _bounded_connected(graph: Graph, source: int, target: int, depth: int, removed: int) -> bool:
    if source == removed or target == removed:
        return False
    reached = {source}
    frontier = [source]
    for _ in range(depth):
        if target in reached:
            return True
        nxt = []
        for v in frontier:
            for w in graph.successors(v):
                if w != removed and w not in reached:
                    reached.add(w)
                    nxt.append(w)
        frontier = nxt
        if not frontier:
            break
    return target in reached


def disconnecting_articulation_points(
    graph: Graph, source: int, target: int, depth: int
) -> set[int]:
    """Vertices (other than the endpoints) whose removal leaves no
    source-to-target walk of length <= depth; brute force by removal."""
    if not _bounded_connected(graph, source, target, depth, removed=-1):
        return set()
    result = set()
    for v in range(graph.vertex_count):
        if v in (source, target):
            continue
        if not _bounded_connected(graph, source, target, depth, removed=v):
            result.add(v)
    return result
