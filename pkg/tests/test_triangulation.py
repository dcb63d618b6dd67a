import random

import pytest
from hypothesis import given, settings, strategies as st

from triflip.geometry import PointSet, segments_cross
from triflip.instance import generate_random_instance
from triflip.oracle import independent_flip_sets
from triflip.triangulation import (
    FlipError,
    ParallelFlip,
    Path,
    Triangulation,
    TriangulationError,
    apply_parallel_flip,
    common_edges,
    crossing_count,
    crossing_edges,
    edge,
    flip_edges,
    unit_flip_candidates,
    validate_triangulation,
)


def test_validate_examples(square4):
    S, A, B = square4
    hull = [edge(0, 1), edge(1, 2), edge(2, 3), edge(0, 3)]
    assert validate_triangulation(S, hull + [edge(0, 2)]).ok
    rep = validate_triangulation(S, hull + [edge(0, 2), edge(1, 3)])
    assert not rep.ok and rep.kind == "crossing"
    assert set(rep.witness) == {edge(0, 2), edge(1, 3)}
    rep = validate_triangulation(S, hull)
    assert not rep.ok and rep.kind == "count"


def test_validate_missing_hull_edge():
    S = PointSet(((0, 0), (10, 0), (5, 8), (5, 3)))
    es = [edge(0, 1), edge(1, 2), edge(0, 3), edge(1, 3), edge(2, 3)]
    rep = validate_triangulation(S, es)
    assert not rep.ok
    with pytest.raises(TriangulationError):
        Triangulation(S, es)


def test_unit_flip_candidates(square4):
    S, A, B = square4
    assert unit_flip_candidates(A) == [(edge(0, 2), edge(1, 3))]
    S = PointSet(((0, 0), (10, 0), (5, 8), (5, 3)))
    T = Triangulation(S, [edge(0, 1), edge(1, 2), edge(0, 2), edge(0, 3), edge(1, 3), edge(2, 3)])
    assert unit_flip_candidates(T) == []


def test_apply_unit_flip(square4):
    S, A, B = square4
    pf = ParallelFlip({edge(0, 2)}, {edge(1, 3)})
    assert apply_parallel_flip(A, pf) == B
    assert apply_parallel_flip(B, pf.reversed()) == A
    with pytest.raises(FlipError):
        apply_parallel_flip(A, ParallelFlip(set(), set()), strict=True)
    assert apply_parallel_flip(A, ParallelFlip(set(), set())) == A
    with pytest.raises(FlipError):
        apply_parallel_flip(B, pf)  # removed edge absent
    with pytest.raises(FlipError):
        apply_parallel_flip(A, ParallelFlip({edge(0, 2)}, {edge(0, 3)}))


def test_shared_triangle_rejected(parabola9):
    from conftest import fan

    T = fan(parabola9, 8, list(range(8)))
    cands = dict(unit_flip_candidates(T))
    # 8-1 and 8-2 share triangle (1, 2, 8)
    pf = ParallelFlip({edge(1, 8), edge(2, 8)}, {cands[edge(1, 8)], cands[edge(2, 8)]})
    with pytest.raises(FlipError) as e:
        apply_parallel_flip(T, pf)
    assert set(e.value.witness) == {edge(1, 8), edge(2, 8)}


def _random_T(seed):
    rng = random.Random(seed)
    inst = generate_random_instance(rng.randint(5, 10), 2, rng.randint(0, 8), seed)
    return inst.inputs[0], rng


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_parallel_flip_matches_sequential_and_inverts(seed):
    T, rng = _random_T(seed)
    sets = list(independent_flip_sets(T))
    if not sets:
        return
    chosen = rng.choice(sets)
    cands = dict(unit_flip_candidates(T))
    pf = ParallelFlip(set(chosen), {cands[e] for e in chosen})
    T2 = apply_parallel_flip(T, pf, strict=True)
    assert validate_triangulation(T.points, T2.edges).ok
    n, h = len(T.points), len(T.points.hull)
    assert len(T2.edges) == 3 * n - 3 - h
    assert len(T2.triangles) == 2 * n - h - 2
    # sequential, in both orders
    for order in (sorted(chosen), sorted(chosen, reverse=True)):
        S = T
        for e in order:
            S = apply_parallel_flip(S, ParallelFlip({e}, {dict(unit_flip_candidates(S))[e]}))
        assert S == T2
    assert apply_parallel_flip(T2, pf.reversed()) == T
    # incremental adjacency agrees with a fresh build
    fresh = Triangulation(T.points, T2.edges)
    assert all(sorted(T2.apexes(e)) == sorted(fresh.apexes(e)) for e in T2.edges)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_crossing_edges_match_brute_force(seed):
    T, rng = _random_T(seed)
    n = len(T.points)
    pts = T.points.points
    for a in range(n):
        for b in range(a + 1, n):
            got = crossing_edges((a, b), T)
            brute = {
                e for e in T.edges if e != (a, b) and segments_cross(pts[a], pts[b], pts[e[0]], pts[e[1]])
            }
            assert set(got) == brute and len(got) == len(brute)
            assert crossing_count((a, b), T) == len(brute)
            # ordered from a to b: crossing points move monotonically
            if len(got) > 1:
                assert crossing_edges((b, a), T) == got[::-1]


def test_fan_diagonal_crosses_six(fan_pair):
    A, _ = fan_pair
    assert crossing_edges((0, 7), A) == [edge(i, 8) for i in range(1, 7)]
    assert crossing_edges((0, 8), A) == []


def test_common_edges(square4, fan_pair):
    S, A, B = square4
    assert common_edges(A, A) == A.edges
    assert len(common_edges(A, B)) == len(A.edges) - 1
    X, Y = fan_pair
    assert S.hull_edges() <= common_edges(A, B)
    assert X.points.hull_edges() <= common_edges(X, Y)


def test_path_helpers(square4):
    S, A, B = square4
    pf = ParallelFlip({edge(0, 2)}, {edge(1, 3)})
    p = Path(A, [pf, ParallelFlip(set(), set())])
    assert len(p) == 2 and p.end == B
    assert len(p.compressed()) == 1
    r = p.reversed()
    assert r.start == B and r.end == A
    assert (p + Path(B, [pf.reversed()])).end == A
    assert flip_edges(A, [edge(0, 2)]) == B
