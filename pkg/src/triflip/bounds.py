"""Pairwise flip distances and lower bounds on the objective.

The objective of any solution is at least half the weight of any packing of
vertex-disjoint directed cycles in the complete graph on the inputs weighted
by pairwise distance: walking a cycle T1 -> T2 -> ... -> T1 through the
center uses every path twice. The best packing is a maximum-weight
assignment with zero-weight fixed points.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from typing import NamedTuple, Optional, Sequence

from .cnf import Cnf, EncodeOptions, build_path_formula, decode_path, emit_wcnf, insertion_bounds
from .heuristics import best_heuristic_path
from .sat import SAT, UNSAT, SolverConfig, solve_maxsat, solve_sat
from .strings import (  # noqa: F401  re-exported
    BoundTable,
    extract_crossing_string,
    flip_insertion_lb,
    log_bound,
    precompute_bound_table,
    rewrite_bound_estimate,
    rewrite_bound_exact,
)
from .triangulation import Path, Triangulation


class Distance(NamedTuple):
    length: int
    path: Path
    exact: bool
    lower: int  # proven lower bound; equals length when exact


def pair_lower_bound(T: Triangulation, T2: Triangulation, opts: Optional[EncodeOptions] = None) -> int:
    """Largest insertion bound over edges missing on either side."""
    opts = opts or EncodeOptions()
    fwd = insertion_bounds(T, opts)
    bwd = insertion_bounds(T2, opts)
    best = 0
    for e in T2.edges - T.edges:
        best = max(best, fwd[e])
    for e in T.edges - T2.edges:
        best = max(best, bwd[e])
    return best


def pairwise_distance(
    T: Triangulation,
    T2: Triangulation,
    opts: Optional[EncodeOptions] = None,
    cfg: Optional[SolverConfig] = None,
) -> Distance:
    """Shortest path length from T to T2: heuristic upper bound, then SAT
    queries at decreasing lengths until one is unsatisfiable."""
    if T == T2:
        return Distance(0, Path(T, []), True, 0)
    opts = opts or EncodeOptions()
    best = best_heuristic_path(T, T2)
    lb = pair_lower_bound(T, T2, opts)
    l = len(best) - 1
    while l >= lb:
        cnf, vm = build_path_formula(T, T2, l, opts)
        res = solve_sat(cnf, cfg)
        if res.status == UNSAT:
            return Distance(len(best), best, True, len(best))
        if res.status != SAT:
            return Distance(len(best), best, False, lb)
        best = decode_path(res.model, vm, 0).compressed()
        l = len(best) - 1
    return Distance(len(best), best, True, len(best))


@dataclass
class DistanceMatrix:
    values: list[list[int]]
    exact: list[list[bool]]
    paths: Optional[dict] = None  # (i, j) with i < j -> witness Path from i to j
    lower: Optional[list[list[int]]] = None  # proven lower bounds, defaults to values

    def __post_init__(self):
        m = len(self.values)
        for i in range(m):
            if self.values[i][i] != 0:
                raise ValueError("distance matrix needs a zero diagonal")
            for j in range(m):
                if self.values[i][j] != self.values[j][i] or self.values[i][j] < 0:
                    raise ValueError("distance matrix must be symmetric and non-negative")

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, ij):
        i, j = ij
        return self.values[i][j]

    @property
    def all_exact(self) -> bool:
        return all(all(row) for row in self.exact)

    def lower_values(self) -> list[list[int]]:
        return self.lower if self.lower is not None else self.values

    @classmethod
    def from_values(cls, values: Sequence[Sequence[int]]) -> "DistanceMatrix":
        vals = [list(r) for r in values]
        return cls(vals, [[True] * len(vals) for _ in vals])


def _distance_task(args):
    i, j, Ti, Tj, opts, cfg = args
    return i, j, pairwise_distance(Ti, Tj, opts, cfg)


def distance_matrix(
    inputs: Sequence[Triangulation],
    opts: Optional[EncodeOptions] = None,
    cfg: Optional[SolverConfig] = None,
    jobs: int = 1,
) -> DistanceMatrix:
    m = len(inputs)
    vals = [[0] * m for _ in range(m)]
    exact = [[True] * m for _ in range(m)]
    lower = [[0] * m for _ in range(m)]
    paths = {}
    tasks = [(i, j, inputs[i], inputs[j], opts, cfg) for i, j in combinations(range(m), 2)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_distance_task, tasks))
    else:
        results = [_distance_task(t) for t in tasks]
    for i, j, d in results:
        vals[i][j] = vals[j][i] = d.length
        exact[i][j] = exact[j][i] = d.exact
        lower[i][j] = lower[j][i] = d.lower
        paths[(i, j)] = d.path
    return DistanceMatrix(vals, exact, paths, lower)


def _values(D) -> list[list[int]]:
    return D.values if isinstance(D, DistanceMatrix) else [list(r) for r in D]


def max_weight_assignment(w: Sequence[Sequence[int]]) -> tuple[int, list[int]]:
    """Maximum of sum(w[i][p[i]]) over permutations p (Hungarian method, O(m^3))."""
    n = len(w)
    if n == 0:
        return 0, []
    big = max(max(r) for r in w)
    cost = [[big - x for x in r] for r in w]  # minimise
    INF = math.inf
    u = [0] * (n + 1)
    v = [0] * (n + 1)
    p = [0] * (n + 1)  # p[j]: row matched to column j (1-based)
    way = [0] * (n + 1)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = [INF] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = INF
            j1 = 0
            for j in range(1, n + 1):
                if not used[j]:
                    cur = cost[i0 - 1][j - 1] - u[i0] - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while True:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
            if j0 == 0:
                break
    perm = [0] * n
    for j in range(1, n + 1):
        perm[p[j] - 1] = j - 1
    return sum(w[i][perm[i]] for i in range(n)), perm


def cycle_packing_weight(D) -> int:
    vals = _values(D)
    w = [[0 if i == j else vals[i][j] for j in range(len(vals))] for i in range(len(vals))]
    return max_weight_assignment(w)[0]


def cycle_packing_lb(D) -> int:
    """Lower bound on the objective: ceil(max cycle packing weight / 2).

    Only meaningful when every entry is an exact distance (or a lower bound
    on it); a DistanceMatrix with upper-bound entries is rejected.
    """
    if isinstance(D, DistanceMatrix) and not D.all_exact:
        raise ValueError("cycle packing bound needs exact distances")
    return (cycle_packing_weight(D) + 1) // 2


def proven_lower_bound(D: DistanceMatrix) -> int:
    """Cycle packing bound over the proven per-pair lower bounds.

    Valid even when some distances are only upper bounds, since the packing
    weight is monotone in the entries.
    """
    return (cycle_packing_weight(D.lower_values()) + 1) // 2


def cycle_packing_cnf(D) -> tuple[Cnf, dict]:
    """Weighted MaxSAT formulation of the maximum cycle packing.

    x_ij selects arc i -> j. Each vertex has at most one outgoing and one
    incoming arc, and the head of a selected arc must have an outgoing arc,
    so the selected arcs form disjoint cycles. Soft clause (x_ij) has weight
    d(i, j); zero-weight arcs get no soft clause.
    """
    vals = _values(D)
    m = len(vals)
    cnf = Cnf()
    x = {}
    for i in range(m):
        for j in range(m):
            if i != j:
                x[(i, j)] = cnf.new_var()
    for i in range(m):
        out = [x[(i, j)] for j in range(m) if j != i]
        inc = [x[(j, i)] for j in range(m) if j != i]
        for group in (out, inc):
            for a, b in combinations(group, 2):
                cnf.add([-a, -b])
    for (i, j), v in x.items():
        cnf.add([-v] + [x[(j, k)] for k in range(m) if k != j])
    for (i, j), v in x.items():
        if vals[i][j] > 0:
            cnf.add_soft(vals[i][j], [v])
    return cnf, x


def cycle_packing_wcnf(D) -> str:
    cnf, _ = cycle_packing_cnf(D)
    if not cnf.soft:
        # all-zero matrix: a placeholder soft clause keeps the file well formed
        cnf.add_soft(1, [1, -1])
    return emit_wcnf(cnf)


def cycle_packing_maxsat(D, cfg: Optional[SolverConfig] = None) -> Optional[int]:
    """Maximum packing weight via MaxSAT, or None if the solver gives up."""
    cnf, _ = cycle_packing_cnf(D)
    if not cnf.soft:
        return 0
    total = sum(w for w, _ in cnf.soft)
    res = solve_maxsat(cnf, cfg)
    if res.status != SAT:
        return None
    return total - res.cost
