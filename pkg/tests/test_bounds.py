import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_pair
from triflip.bounds import (
    DistanceMatrix,
    cycle_packing_cnf,
    cycle_packing_lb,
    cycle_packing_maxsat,
    cycle_packing_wcnf,
    cycle_packing_weight,
    distance_matrix,
    flip_insertion_lb,
    max_weight_assignment,
    pairwise_distance,
    proven_lower_bound,
)
from triflip.cnf import parse_wcnf
from triflip.instance import generate_random_instance
from triflip.oracle import bfs_distance, bfs_layers
from triflip.triangulation import edge


def brute_assignment(w):
    m = len(w)
    return max(sum(w[i][p[i]] for i in range(m)) for p in itertools.permutations(range(m)))


def random_metric(rng, m, hi=9):
    vals = [[0] * m for _ in range(m)]
    for i, j in itertools.combinations(range(m), 2):
        vals[i][j] = vals[j][i] = rng.randint(0, hi)
    return vals


def test_distance_identity_and_adjacent(square4):
    _, A, B = square4
    d = pairwise_distance(A, A)
    assert d.length == 0 and d.exact and len(d.path) == 0
    d = pairwise_distance(A, B)
    assert d.length == 1 and d.exact and d.path.end == B


def test_distance_fans(fan_pair):
    A, B = fan_pair
    d = pairwise_distance(A, B)
    assert d.exact and d.length == d.lower == len(d.path)
    assert d.path.start == A and d.path.end == B


def test_distance_matches_bfs():
    for seed in range(60):
        A, B = random_pair(seed)
        d = pairwise_distance(A, B)
        assert d.exact and d.length == bfs_distance(A, B), seed
        assert d.path.start == A and d.path.end == B and len(d.path) == d.length


def test_distance_matrix_invariants():
    inst = generate_random_instance(7, 4, 2, 11)
    D = distance_matrix(inst.inputs)
    m = len(D)
    assert D.all_exact
    for i, j, k in itertools.product(range(m), repeat=3):
        assert D[i, k] <= D[i, j] + D[j, k]
    for (i, j), p in D.paths.items():
        assert p.start == inst.inputs[i] and p.end == inst.inputs[j] and len(p) == D[i, j]


def test_distance_matrix_parallel_matches_serial():
    inst = generate_random_instance(7, 3, 3, 5)
    assert distance_matrix(inst.inputs, jobs=2).values == distance_matrix(inst.inputs).values


def test_distance_matrix_validation():
    with pytest.raises(ValueError):
        DistanceMatrix.from_values([[0, 1], [2, 0]])
    with pytest.raises(ValueError):
        DistanceMatrix.from_values([[1, 1], [1, 0]])


def test_cycle_packing_examples():
    assert cycle_packing_weight([[0, 5], [5, 0]]) == 10
    assert cycle_packing_lb(DistanceMatrix.from_values([[0, 5], [5, 0]])) == 5
    four = [[0 if i == j else 4 for j in range(3)] for i in range(3)]
    assert cycle_packing_weight(four) == 12
    assert cycle_packing_lb(four) == 6
    assert cycle_packing_lb([[0, 3, 0], [3, 0, 0], [0, 0, 0]]) == 3


def test_cycle_packing_rejects_inexact():
    D = DistanceMatrix([[0, 3], [3, 0]], [[True, False], [False, True]], lower=[[0, 2], [2, 0]])
    with pytest.raises(ValueError):
        cycle_packing_lb(D)
    assert proven_lower_bound(D) == 2


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 7))
def test_hungarian_matches_permutations(seed, m):
    rng = random.Random(seed)
    w = [[rng.randint(0, 20) for _ in range(m)] for _ in range(m)]
    value, perm = max_weight_assignment(w)
    assert sorted(perm) == list(range(m))
    assert value == sum(w[i][perm[i]] for i in range(m)) == brute_assignment(w)


def test_wcnf_structure_and_optimum():
    cnf, x = cycle_packing_cnf([[0, 5], [5, 0]])
    assert len(x) == 2 and sorted(w for w, _ in cnf.soft) == [5, 5]
    assert cycle_packing_maxsat([[0, 5], [5, 0]]) == 10
    assert cycle_packing_maxsat([[0] * 3 for _ in range(3)]) == 0
    text = cycle_packing_wcnf([[0] * 3 for _ in range(3)])
    assert parse_wcnf(text).soft


def test_maxsat_packing_matches_hungarian():
    rng = random.Random(3)
    for _ in range(25):
        vals = random_metric(rng, rng.randint(2, 6))
        w = cycle_packing_weight(vals)
        assert cycle_packing_maxsat(vals) == w
        assert 2 * cycle_packing_lb(vals) - w in (0, 1)


def test_insertion_bound_is_sound_against_bfs():
    """Fewest parallel flips to create uv is never below the string bound."""
    checked = 0
    for seed in range(12):
        inst = generate_random_instance(7, 2, 2, seed)
        T = inst.inputs[0]
        dist, _ = bfs_layers(T)
        first = {}
        for U, d in dist.items():
            for e in U.edges:
                first[e] = min(first.get(e, d), d)
        n = len(inst.points)
        for u, v in itertools.combinations(range(n), 2):
            e = edge(u, v)
            if e in T.edges:
                assert flip_insertion_lb(e, T) == 0
                continue
            assert first[e] >= flip_insertion_lb(e, T), (seed, e)
            checked += 1
    assert checked > 50
