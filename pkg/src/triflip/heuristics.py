"""Greedy parallel-flip paths between two triangulations, without SAT.

Each step scores every unit flip of the current triangulation T by how
much it reduces the (penalty-weighted) number of crossings with the target,
then takes a greedy maximal independent set of the improving flips in the
conflict graph (two flips conflict when they share a triangle of T).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .triangulation import (
    Edge,
    ParallelFlip,
    Path,
    Triangulation,
    crossing_edges,
    flip_edges,
    unit_flip_candidates,
)

EdgePenalty = dict  # target edge -> positive int


@dataclass
class FlipConflictGraph:
    vertices: list[tuple[Edge, Edge, int]]  # (removed, added, weight)
    adjacency: list[set[int]]


def _cost(e: Edge, target: Triangulation, pen: Optional[EdgePenalty]) -> int:
    if e in target.edges:
        return 0
    crossed = crossing_edges(e, target)
    if pen is None:
        return len(crossed)
    return sum(pen.get(x, 1) for x in crossed)


def potential(T: Triangulation, target: Triangulation, pen: Optional[EdgePenalty] = None) -> int:
    """Sum over target edges e' of pen(e') times the number of edges of T crossing e'."""
    return sum(_cost(e, target, pen) for e in T.edges)


def conflict_graph(T: Triangulation, target: Triangulation, pen: Optional[EdgePenalty] = None) -> FlipConflictGraph:
    verts = []
    for rem, add in unit_flip_candidates(T):
        w = _cost(rem, target, pen) - _cost(add, target, pen)
        if w > 0:
            verts.append((rem, add, w))
    tris = [set(T.triangles_of(rem)) for rem, _, _ in verts]
    adj = [set() for _ in verts]
    for i in range(len(verts)):
        for j in range(i + 1, len(verts)):
            if tris[i] & tris[j]:
                adj[i].add(j)
                adj[j].add(i)
    return FlipConflictGraph(verts, adj)


def _greedy_mis(g: FlipConflictGraph) -> list[int]:
    order = sorted(
        range(len(g.vertices)),
        key=lambda i: (-g.vertices[i][2], len(g.adjacency[i]), g.vertices[i][0]),
    )
    marked = set()
    chosen = []
    for i in order:
        if i in marked:
            continue
        chosen.append(i)
        marked.add(i)
        marked |= g.adjacency[i]
    return chosen


def greedy_parallel_step(
    T: Triangulation, target: Triangulation, pen: Optional[EdgePenalty] = None
) -> ParallelFlip:
    if T == target:
        raise ValueError("triangulation already equals the target")
    g = conflict_graph(T, target, pen)
    if not g.vertices and pen is not None:
        # weighted scores can all be non-positive; unit weights always leave
        # an improving flip
        g = conflict_graph(T, target, None)
    if not g.vertices:
        raise RuntimeError("no improving unit flip found")
    chosen = _greedy_mis(g)
    return ParallelFlip(
        frozenset(g.vertices[i][0] for i in chosen),
        frozenset(g.vertices[i][1] for i in chosen),
    )


def greedy_parallel_path(
    T0: Triangulation, target: Triangulation, pen: Optional[EdgePenalty] = None
) -> Path:
    """Repeat greedy steps until the target is reached.

    The weighted potential drops at every step. If a step has to fall back to
    unit weights the rest of the run uses unit weights too, so the run always
    terminates.
    """
    flips = []
    T = T0
    while T != target:
        g = conflict_graph(T, target, pen)
        if not g.vertices:
            pen = None
        pf = greedy_parallel_step(T, target, pen)
        T = flip_edges(T, pf.removed)
        flips.append(pf)
    return Path(T0, flips)


def squeaky_wheel_path(T0: Triangulation, target: Triangulation, max_iters: int = 16) -> Path:
    """Rerun the greedy path, raising the penalty of target edges that were
    only inserted in the last step. Keeps the shortest path."""
    pen = {e: 1 for e in target.edges}
    best = None
    prev_len = None
    for _ in range(max_iters):
        path = greedy_parallel_path(T0, target, dict(pen))
        if best is None or len(path) < len(best):
            best = path
        if len(path) == 0:
            break
        if prev_len is not None and len(path) > prev_len:
            break
        prev_len = len(path)
        seq = list(path.triangulations())
        penultimate = seq[-2]
        for e in target.edges - penultimate.edges:
            pen[e] += 1
    return best


def best_heuristic_path(T0: Triangulation, target: Triangulation, max_iters: int = 16) -> Path:
    """Shortest of greedy and squeaky-wheel, run forward and backward."""
    runs = [
        greedy_parallel_path(T0, target),
        greedy_parallel_path(target, T0).reversed(),
        squeaky_wheel_path(T0, target, max_iters),
        squeaky_wheel_path(target, T0, max_iters).reversed(),
    ]
    return min(runs, key=len)
