from collections import Counter
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_pair
from triflip.cnf import (
    Cnf,
    EncodeOptions,
    FormulaTooLarge,
    Proximity,
    add_last_step_minimization,
    build_insertion_formula,
    build_path_formula,
    build_solution_formula,
    decode_path,
    emit_dimacs,
    emit_wcnf,
    parse_dimacs,
    parse_wcnf,
)
from triflip.instance import Instance, Solution, verify_solution
from triflip.oracle import bfs_distance
from triflip.sat import UNSAT, solve_maxsat, solve_sat
from triflip.triangulation import Path, edge

ALL_OPTS = [
    EncodeOptions(happy_edges=h, insertion_bound=b) for h, b in product((False, True), ("log2", "string"))
]


def min_sat_length(A, B, opts, start=0):
    l = start
    while not solve_sat(build_path_formula(A, B, l, opts)[0]).sat:
        l += 1
    return l


def test_identity_and_adjacent(square4):
    S, A, B = square4
    cnf, vm = build_path_formula(A, A, 0)
    res = solve_sat(cnf)
    assert res.sat
    assert len(decode_path(res.model, vm, 0)) == 0
    cnf, vm = build_path_formula(A, B, 0)
    assert cnf.trivially_unsat
    assert any(c.startswith("UNSAT:") for c in cnf.comments)
    cnf, vm = build_path_formula(A, B, 1)
    res = solve_sat(cnf)
    p = decode_path(res.model, vm, 0)
    assert len(p) == 1 and p.flips[0].removed == {edge(0, 2)} and p.flips[0].added == {edge(1, 3)}


def test_fan_insertion_needs_three_steps(fan_pair):
    A, _ = fan_pair
    for opts in ALL_OPTS:
        for l in (0, 1, 2):
            assert not solve_sat(build_insertion_formula(A, (0, 7), l, opts)[0]).sat
        cnf, vm = build_insertion_formula(A, (0, 7), 3, opts)
        res = solve_sat(cnf)
        assert res.sat
    target = decode_path(res.model, vm, 0).end
    assert edge(0, 7) in target.edges
    assert not solve_sat(build_path_formula(A, target, 2)[0]).sat
    assert solve_sat(build_path_formula(A, target, 3)[0]).sat
    assert bfs_distance(A, target) == 3


def test_clause_structure(fan_pair):
    A, B = fan_pair
    cnf, vm = build_path_formula(A, B, 4)
    assert solve_sat(cnf).sat
    ev = vm.edge_vars
    for (p, i, rem, add), f in vm.flip_vars.items():
        (a, b), (c, d) = rem, add
        sides = [edge(a, c), edge(c, b), edge(b, d), edge(d, a)]
        assert all((p, i, x) in ev for x in [rem] + sides)
        assert all((p, i + 1, x) in ev for x in [add] + sides)
        binaries = [c for c in cnf.hard if len(c) == 2 and -f in c]
        # need (5) + keep (5) + flip (1, absent when rem is eliminated at i+1)
        assert len(binaries) == 10 + ((p, i + 1, rem) in ev)
    # only the change clauses are wider than two literals
    wide = [c for c in cnf.hard if len(c) > 2]
    assert len(wide) <= 2 * sum(1 for (_, i, _) in ev if i < 4) + 2 * sum(1 for (_, i, _) in ev if i > 0)
    assert all(v <= cnf.num_vars for c in cnf.hard for v in map(abs, c))
    # numbering is deterministic
    assert emit_dimacs(build_path_formula(A, B, 4)[0]) == emit_dimacs(cnf)


def test_flips_sharing_a_triangle_exclude_each_other(fan_pair):
    A, B = fan_pair
    cnf, vm = build_path_formula(A, B, 4)
    first = {rem: f for (p, i, rem, add), f in vm.flip_vars.items() if i == 0}
    assert edge(1, 8) in first and edge(2, 8) in first
    both = cnf.copy()
    both.add([first[edge(1, 8)]])
    both.add([first[edge(2, 8)]])
    assert solve_sat(both).status == UNSAT
    one = cnf.copy()
    one.add([first[edge(1, 8)]])
    one.add([first[edge(3, 8)]])
    assert solve_sat(one).sat


def test_solution_formula_examples(square4):
    S, A, B = square4
    assert solve_sat(build_solution_formula([A, A], [0, 0])[0]).sat
    assert not solve_sat(build_solution_formula([A, B], [0, 0])[0]).sat
    cnf, vm = build_solution_formula([A, B], [1, 0])
    res = solve_sat(cnf)
    assert res.sat
    p0, p1 = decode_path(res.model, vm, 0), decode_path(res.model, vm, 1)
    assert p0.end == B and p1.end == B and len(p1) == 0
    with pytest.raises(ValueError):
        build_solution_formula([A, B], [1])


def test_last_step_minimization(square4):
    S, A, B = square4
    cnf, vm = build_path_formula(A, B, 1)
    res = solve_maxsat(add_last_step_minimization(cnf, vm, 0, 1))
    assert res.cost == 1
    cnf, vm = build_path_formula(A, B, 2)
    w = add_last_step_minimization(cnf, vm, 0, 2)
    assert w.hard == cnf.hard and len(w.soft) == len(vm.flips_at(0, 1))
    res = solve_maxsat(w)
    assert res.cost == 0
    assert decode_path(res.model, vm, 0).flips[1].is_empty


def test_dimacs_examples():
    c = Cnf(1, [[1]])
    assert emit_dimacs(c) == "p cnf 1 1\n1 0\n"
    c = Cnf(2, [[1, -2], []])
    assert emit_dimacs(c).splitlines()[-1] == "0"
    assert solve_sat(c).status == UNSAT
    w = Cnf(2, [[1, 2]], [(3, [-1]), (4, [-2])])
    text = emit_wcnf(w)
    assert text.splitlines()[0] == "p wcnf 2 3 8"
    assert text.splitlines()[1] == "8 1 2 0"
    with pytest.raises(ValueError):
        emit_wcnf(Cnf(1, [[1]]))


clauses = st.lists(st.lists(st.integers(1, 12).flatmap(lambda v: st.sampled_from([v, -v])), max_size=5), max_size=30)


@given(clauses, st.lists(st.tuples(st.integers(1, 9), st.lists(st.integers(-12, 12).filter(bool), max_size=4)), min_size=1, max_size=10))
def test_dimacs_wcnf_reparse(hard, soft):
    c = Cnf(12, hard)
    back = parse_dimacs(emit_dimacs(c))
    assert back.num_vars == 12
    assert Counter(map(tuple, back.hard)) == Counter(map(tuple, hard))
    w = Cnf(12, hard, soft)
    back = parse_wcnf(emit_wcnf(w))
    assert Counter(map(tuple, back.hard)) == Counter(map(tuple, hard))
    assert Counter((x, tuple(c)) for x, c in back.soft) == Counter((x, tuple(c)) for x, c in soft)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_min_length_equals_bfs_for_all_options(seed):
    A, B = random_pair(seed)
    d = bfs_distance(A, B)
    for opts in ALL_OPTS:
        assert min_sat_length(A, B, opts) == d
        cnf, vm = build_path_formula(A, B, d, opts)
        res = solve_sat(cnf)
        p = decode_path(res.model, vm, 0)
        inst = Instance("pair", A.points, [A, B])
        sol = Solution("pair", B, [p.compressed(), Path(B, [])])
        assert verify_solution(inst, sol).valid


def test_proximity_and_budget():
    A, B = random_pair(7, (7, 8), (3, 5))
    d = bfs_distance(A, B)
    cnf, vm = build_path_formula(A, B, d)
    p = decode_path(solve_sat(cnf).model, vm, 0)
    ref = Proximity((tuple(p.triangulations()),), 1000)
    assert min_sat_length(A, B, EncodeOptions(proximity=ref)) == d
    tight = Proximity((tuple(p.triangulations()),), 0)
    cnf0, vm0 = build_path_formula(A, B, d, EncodeOptions(proximity=tight))
    assert len(vm0.edge_vars) <= len(vm.edge_vars)
    # the reference path itself survives a zero-crossing restriction
    assert solve_sat(cnf0).sat
    with pytest.raises(FormulaTooLarge):
        build_path_formula(A, B, d, EncodeOptions(layer_budget=3))
    with pytest.raises(ValueError):
        Proximity((), -1)
