"""Breadth-first search over the parallel-flip graph.

Ground truth for small instances: neighbors of a triangulation are all
results of applying a non-empty independent set of unit flips.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterator, Optional

from .triangulation import Edge, Triangulation, flip_edges, unit_flip_candidates


class OracleLimitExceeded(RuntimeError):
    pass


@dataclass
class OracleLimits:
    max_points: int = 9
    max_nodes: int = 200_000


def independent_flip_sets(T: Triangulation) -> Iterator[list[Edge]]:
    """Every non-empty set of flippable edges no two of which share a triangle."""
    cands = [e for e, _ in unit_flip_candidates(T)]
    tri_of = {e: set(T.triangles_of(e)) for e in cands}
    conflict = {
        e: {f for f in cands if f != e and tri_of[e] & tri_of[f]} for e in cands
    }

    def rec(i: int, chosen: list[Edge], banned: set):
        for j in range(i, len(cands)):
            e = cands[j]
            if e in banned:
                continue
            chosen.append(e)
            yield list(chosen)
            yield from rec(j + 1, chosen, banned | conflict[e])
            chosen.pop()

    yield from rec(0, [], set())


def parallel_neighbors(T: Triangulation) -> Iterator[Triangulation]:
    for s in independent_flip_sets(T):
        yield flip_edges(T, s)


def bfs_layers(T0: Triangulation, max_nodes: int = 200_000, stop: Optional[Triangulation] = None):
    dist = {T0: 0}
    parent: dict[Triangulation, Optional[Triangulation]] = {T0: None}
    queue = deque([T0])
    while queue:
        T = queue.popleft()
        if stop is not None and T == stop:
            break
        for N in parallel_neighbors(T):
            if N not in dist:
                dist[N] = dist[T] + 1
                parent[N] = T
                if len(dist) > max_nodes:
                    raise OracleLimitExceeded(f"more than {max_nodes} triangulations reached")
                queue.append(N)
    return dist, parent


def bfs_distance(T0: Triangulation, T1: Triangulation, max_nodes: int = 200_000) -> int:
    if T0 == T1:
        return 0
    dist, _ = bfs_layers(T0, max_nodes, stop=T1)
    if T1 not in dist:
        raise OracleLimitExceeded("target not reached")
    return dist[T1]


def bfs_path(T0: Triangulation, T1: Triangulation, max_nodes: int = 200_000) -> list[Triangulation]:
    dist, parent = bfs_layers(T0, max_nodes, stop=T1)
    seq = [T1]
    while parent[seq[-1]] is not None:
        seq.append(parent[seq[-1]])
    return seq[::-1]


def brute_force_oracle(inst, limits: Optional[OracleLimits] = None) -> tuple[int, Triangulation]:
    """Minimum over all triangulations C of the sum of BFS distances to C.

    Ties between centers are broken by the sorted edge list, so the witness
    is deterministic.
    """
    limits = limits or OracleLimits()
    if len(inst.points) > limits.max_points:
        raise OracleLimitExceeded(f"{len(inst.points)} points > {limits.max_points}")
    maps = []
    for T in inst.inputs:
        dist, _ = bfs_layers(T, limits.max_nodes)
        maps.append(dist)
    best = None
    for C in maps[0]:
        if not all(C in d for d in maps[1:]):
            continue  # flip graph is connected, so this only happens under limits
        total = sum(d[C] for d in maps)
        key = (total, C.sorted_edges())
        if best is None or key < best[0]:
            best = (key, C)
    return best[0][0], best[1]
