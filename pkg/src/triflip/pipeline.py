"""End-to-end solving: heuristic centers, the exact loop, and SAT improvement."""
from __future__ import annotations

import json
import random
import sys
import time
from dataclasses import dataclass, field, replace
from typing import Iterator, Optional, Sequence

from .bounds import DistanceMatrix, cycle_packing_lb, distance_matrix, proven_lower_bound
from .cnf import (
    EncodeOptions,
    Proximity,
    add_last_step_minimization,
    build_path_formula,
    build_solution_formula,
    decode_path,
)
from .heuristics import best_heuristic_path
from .instance import Instance, Solution, verify_solution
from .oracle import OracleLimits, brute_force_oracle  # noqa: F401  re-exported
from .sat import SAT, UNSAT, SolverConfig, solve_maxsat, solve_sat
from .triangulation import (
    ParallelFlip,
    Path,
    Triangulation,
    crossing_count,
    delaunay,
    flip_edges,
    unit_flip_candidates,
)

OPTIMAL, FEASIBLE, UNKNOWN = "OPTIMAL", "FEASIBLE", "UNKNOWN"
DEFAULT_POWERS = (0.5, 1.0, 2.0, 3.0)


# ---------------------------------------------------------------- progress


class Progress:
    """JSON-lines progress events; silent unless given a stream."""

    def __init__(self, stream=None):
        self.stream = stream
        self.t0 = time.monotonic()

    def __call__(self, phase: str, objective=None, bound=None, **extra):
        if self.stream is None:
            return
        rec = {"timestamp": round(time.monotonic() - self.t0, 3), "phase": phase,
               "objective": objective, "bound": bound}
        rec.update(extra)
        self.stream.write(json.dumps(rec) + "\n")
        self.stream.flush()


_quiet = Progress()


@dataclass
class Budget:
    time_limit: Optional[float] = None
    start: float = field(default_factory=time.monotonic)

    def remaining(self) -> Optional[float]:
        if self.time_limit is None:
            return None
        return self.time_limit - (time.monotonic() - self.start)

    @property
    def expired(self) -> bool:
        r = self.remaining()
        return r is not None and r <= 0

    def solver_cfg(self, cfg: Optional[SolverConfig]) -> SolverConfig:
        cfg = cfg or SolverConfig()
        r = self.remaining()
        if r is None:
            return cfg
        limit = max(0.05, r) if cfg.time_limit is None else min(cfg.time_limit, max(0.05, r))
        return replace(cfg, time_limit=limit)


# ---------------------------------------------------------------- heuristics


def _chi_table(inputs: Sequence[Triangulation]):
    cache: dict = {}

    def chi(e):
        hit = cache.get(e)
        if hit is None:
            hit = cache[e] = tuple(0 if e in T.edges else crossing_count(e, T) for T in inputs)
        return hit

    return chi


def candidate_centers(inst: Instance, powers: Sequence[float] = DEFAULT_POWERS) -> list[Triangulation]:
    """Delaunay, plus for each power p the local optimum of best-improving unit
    flips under sum_T chi(e, T)^p - chi(e', T)^p, starting from Delaunay."""
    D = delaunay(inst.points)
    chi = _chi_table(inst.inputs)
    out = [D]
    for p in powers:
        C = D
        while True:
            best = None
            for rem, add in unit_flip_candidates(C):
                gain = sum(c ** p for c in chi(rem)) - sum(c ** p for c in chi(add))
                if gain > 1e-9 and (best is None or gain > best[0] + 1e-9):
                    best = (gain, rem)
            if best is None:
                break
            C = flip_edges(C, [best[1]])
        if C not in out:
            out.append(C)
    return out


@dataclass
class SolutionPool:
    entries: list[Solution] = field(default_factory=list)
    best: int = -1

    def add(self, sol: Solution) -> None:
        self.entries.append(sol)
        if self.best < 0 or sol.objective < self.entries[self.best].objective:
            self.best = len(self.entries) - 1

    @property
    def best_solution(self) -> Solution:
        return self.entries[self.best]


def solution_for_center(inst: Instance, C: Triangulation) -> Solution:
    return Solution(inst.name, C, [best_heuristic_path(T, C) for T in inst.inputs])


def build_initial_solution(
    inst: Instance, powers: Sequence[float] = DEFAULT_POWERS, progress: Progress = _quiet
) -> SolutionPool:
    pool = SolutionPool()
    seen = set()
    for C in candidate_centers(inst, powers):
        seen.add(C)
        pool.add(solution_for_center(inst, C))
        progress("initial", pool.best_solution.objective)
    # one refinement round around the best center
    best = pool.best_solution
    for path in best.paths:
        if len(path) == 0:
            continue
        C = list(path.triangulations())[-2]
        if C in seen:
            continue
        seen.add(C)
        pool.add(solution_for_center(inst, C))
    progress("initial-refined", pool.best_solution.objective)
    return pool


# ---------------------------------------------------------------- exact loop


def enumerate_length_vectors(b: int, D) -> Iterator[tuple[int, ...]]:
    """All (l_1..l_m) with sum b and l_i + l_j >= d(i, j), in lexicographic order."""
    vals = D.values if isinstance(D, DistanceMatrix) else D
    m = len(vals)
    cur: list[int] = []

    def need(k: int) -> int:
        return max([0] + [vals[k][j] - cur[j] for j in range(len(cur))])

    def rec(rest: int):
        i = len(cur)
        if i == m - 1:
            if rest >= need(i):
                yield tuple(cur) + (rest,)
            return
        for li in range(need(i), rest + 1):
            cur.append(li)
            if sum(need(k) for k in range(i + 1, m)) <= rest - li:
                yield from rec(rest - li)
            cur.pop()

    if m == 0:
        return
    yield from rec(b)


def _decode_solution(inst: Instance, model, vm) -> Solution:
    paths = [decode_path(model, vm, p).compressed() for p in range(len(inst.inputs))]
    return Solution(inst.name, paths[0].end, paths)


def _checked(inst: Instance, sol: Solution) -> Solution:
    rep = verify_solution(inst, sol)
    if not rep.valid:
        raise RuntimeError(f"internal error: produced an invalid solution ({rep.first_violation})")
    return sol


def solve_lengths(
    inst: Instance,
    lengths: Sequence[int],
    opts: Optional[EncodeOptions] = None,
    cfg: Optional[SolverConfig] = None,
):
    """(status, solution) for the solution formula with the given lengths."""
    cnf, vm = build_solution_formula(inst.inputs, lengths, opts)
    res = solve_sat(cnf, cfg)
    if res.status != SAT:
        return res.status, None
    return SAT, _checked(inst, _decode_solution(inst, res.model, vm))


@dataclass
class ExactResult:
    solution: Solution
    status: str
    lower_bound: int
    distances: Optional[DistanceMatrix] = None


def exact_solve(
    inst: Instance,
    budget: Optional[Budget] = None,
    opts: Optional[EncodeOptions] = None,
    cfg: Optional[SolverConfig] = None,
    jobs: int = 1,
    progress: Progress = _quiet,
    heuristic_shortcut: bool = True,
) -> ExactResult:
    """Raise a proven lower bound b level by level, testing every feasible
    length vector with sum b, until a solution with objective b is found.

    With ``heuristic_shortcut`` the heuristic solution is accepted as soon as
    b reaches its objective; without it the SAT formula must confirm level b
    too, which exercises the encoding end to end.
    """
    budget = budget or Budget()
    opts = opts or EncodeOptions()
    pool = build_initial_solution(inst, progress=progress)
    best = pool.best_solution
    D = distance_matrix(inst.inputs, opts, budget.solver_cfg(cfg), jobs)
    if not D.all_exact:
        lb = proven_lower_bound(D)
        progress("exact-inexact-distances", best.objective, lb)
        return ExactResult(best, FEASIBLE, lb, D)
    b = cycle_packing_lb(D)
    lower = b
    progress("exact-start", best.objective, b)
    blocked = False  # some vector came back UNKNOWN at a lower level
    top = best.objective if heuristic_shortcut else best.objective + 1
    while b < top:
        if budget.expired:
            return ExactResult(best, FEASIBLE, lower, D)
        unknown_here = False
        for vec in enumerate_length_vectors(b, D):
            if budget.expired:
                return ExactResult(best, FEASIBLE, lower, D)
            status, sol = solve_lengths(inst, vec, opts, budget.solver_cfg(cfg))
            if status == SAT:
                if sol.objective != b:
                    raise RuntimeError(f"decoded objective {sol.objective} below proven bound {b}")
                progress("exact-found", b, lower)
                if blocked:
                    return ExactResult(sol, FEASIBLE, lower, D)
                return ExactResult(sol, OPTIMAL, b, D)
            if status != UNSAT:
                unknown_here = True
        if unknown_here:
            blocked = True
        else:
            if not blocked:
                lower = b + 1
        b += 1
        progress("exact-level", best.objective, lower)
    # the heuristic solution meets the bound
    if blocked:
        return ExactResult(best, FEASIBLE, lower, D)
    return ExactResult(best, OPTIMAL, best.objective, D)


# ---------------------------------------------------------------- improvement


def proximity_from(sol: Solution, k: int) -> Proximity:
    return Proximity(tuple(tuple(p.triangulations()) for p in sol.paths), k)


def improve_decrement(
    inst: Instance,
    sol: Solution,
    path_id: int,
    opts: Optional[EncodeOptions] = None,
    cfg: Optional[SolverConfig] = None,
) -> Optional[Solution]:
    """A verified solution with path ``path_id`` one shorter and the others
    no longer, or None."""
    lengths = sol.lengths
    if lengths[path_id] < 1:
        return None
    lengths[path_id] -= 1
    status, new = solve_lengths(inst, lengths, opts, cfg)
    if status != SAT or new.objective >= sol.objective:
        return None
    return new


def improve_loop(
    inst: Instance,
    sol: Solution,
    seed: int = 0,
    proximity_k: Optional[int] = None,
    opts: Optional[EncodeOptions] = None,
    cfg: Optional[SolverConfig] = None,
    budget: Optional[Budget] = None,
    progress: Progress = _quiet,
) -> Solution:
    """Decrement random paths until no single decrement succeeds."""
    rng = random.Random(seed)
    opts = opts or EncodeOptions()
    budget = budget or Budget()
    while not budget.expired:
        order = [p for p in range(len(sol.paths)) if len(sol.paths[p]) > 0]
        rng.shuffle(order)
        for p in order:
            if budget.expired:
                return sol
            o = opts if proximity_k is None else replace(opts, proximity=proximity_from(sol, proximity_k))
            new = improve_decrement(inst, sol, p, o, budget.solver_cfg(cfg))
            if new is not None:
                sol = new
                progress("improve", sol.objective, None, path=p)
                break
        else:
            return sol
    return sol


def _min_last_step(
    T0: Triangulation, end: Triangulation, l: int, opts: EncodeOptions, cfg: Optional[SolverConfig]
) -> Optional[Path]:
    """Path of length <= l from T0 to end with fewest unit flips in its last step."""
    cnf, vm = build_path_formula(T0, end, l, opts)
    flips = vm.flips_at(0, l - 1)
    if not flips:
        res = solve_sat(cnf, cfg)
    else:
        res = solve_maxsat(add_last_step_minimization(cnf, vm, 0, l), cfg)
    if res.status != SAT:
        return None
    return decode_path(res.model, vm, 0)


def last_step_sweep(
    inst: Instance, sol: Solution, r: int, opts: Optional[EncodeOptions] = None, cfg: Optional[SolverConfig] = None
) -> Solution:
    """Push flips away from the center on each path, one step at a time.

    Path lengths and the center stay fixed; each of the last r steps is
    re-solved to use as few unit flips as possible.
    """
    opts = opts or EncodeOptions()
    new_paths = []
    for path in sol.paths:
        seq = list(path.triangulations())
        l = len(path)
        suffix: list = []
        end = seq[-1]
        for _ in range(min(r, l)):
            got = _min_last_step(path.start, end, l, opts, cfg)
            if got is None:
                break
            tris = list(got.triangulations())
            suffix.insert(0, got.flips[-1])
            end = tris[-2]
            seq = tris[:-1]
            l -= 1
        prefix = [ParallelFlip.between(a, b) for a, b in zip(seq, seq[1:])]
        new_paths.append(Path(path.start, prefix + suffix).compressed())
    out = Solution(sol.instance_name, sol.center, new_paths)
    return _checked(inst, out)


def trim_improve(
    inst: Instance,
    sol: Solution,
    r: int,
    opts: Optional[EncodeOptions] = None,
    cfg: Optional[SolverConfig] = None,
    budget: Optional[Budget] = None,
    progress: Progress = _quiet,
) -> Solution:
    """Re-solve the part of the solution within r steps of the center."""
    if r < 1:
        raise ValueError("trim radius must be at least 1")
    budget = budget or Budget()
    swept = last_step_sweep(inst, sol, r, opts, budget.solver_cfg(cfg))
    if swept.objective > sol.objective:
        swept = sol
    prefixes = []
    sub_inputs = []
    for path in swept.paths:
        seq = list(path.triangulations())
        cut = len(path) - min(r, len(path))
        prefixes.append(path.flips[:cut])
        sub_inputs.append(seq[cut])
    sub = Instance(inst.name + "-trim", inst.points, sub_inputs)
    res = exact_solve(sub, budget, opts, cfg)
    spliced = Solution(
        inst.name,
        res.solution.center,
        [Path(T, pre + list(sp.flips)) for T, pre, sp in zip(inst.inputs, prefixes, res.solution.paths)],
    )
    spliced = _checked(inst, spliced)
    best = spliced if spliced.objective < swept.objective else swept
    progress("trim", best.objective, None, radius=r)
    return best


def solve(
    inst: Instance,
    time_limit: Optional[float] = None,
    seed: int = 0,
    proximity_k: Optional[int] = None,
    opts: Optional[EncodeOptions] = None,
    cfg: Optional[SolverConfig] = None,
    jobs: int = 1,
    progress: Progress = _quiet,
) -> tuple[Solution, int]:
    """Heuristic pool, then decrement improvement. Returns (solution, lower bound)."""
    budget = Budget(time_limit)
    sol = build_initial_solution(inst, progress=progress).best_solution
    D = distance_matrix(inst.inputs, opts, budget.solver_cfg(cfg), jobs)
    lb = proven_lower_bound(D)
    progress("bounds", sol.objective, lb)
    if sol.objective > lb:
        sol = improve_loop(inst, sol, seed, proximity_k, opts, cfg, budget, progress)
    return _checked(inst, sol), lb


def log_to_stderr() -> Progress:
    return Progress(sys.stderr)
