"""SAT encodings of bounded-length flip paths and of whole solutions.

Variables:
    e(p, i, uv)        edge uv present in triangulation i of path p
    f(p, i, uv, u2v2)  the unit flip uv -> u2v2 happens between layers i and i+1

Layers may stay unchanged, so a formula of length l is satisfiable iff a
path of length at most l exists. Variables excluded by the elimination
rules are treated as false and never allocated.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Optional, Sequence

from .geometry import PointSet, Quad, enumerate_empty_convex_quads, segments_cross
from .strings import DEFAULT_EXACT_LIMIT, BoundTable, flip_insertion_lb
from .triangulation import Edge, ParallelFlip, Path, Triangulation, crossing_count, edge

Clause = list[int]


class FormulaTooLarge(RuntimeError):
    pass


@dataclass
class Cnf:
    num_vars: int = 0
    hard: list[Clause] = field(default_factory=list)
    soft: list[tuple[int, Clause]] = field(default_factory=list)
    comments: list[str] = field(default_factory=list)

    def new_var(self) -> int:
        self.num_vars += 1
        return self.num_vars

    def add(self, clause: Sequence[int]) -> None:
        self.hard.append(list(clause))

    def add_soft(self, weight: int, clause: Sequence[int]) -> None:
        if weight <= 0:
            raise ValueError("soft clause weights must be positive")
        self.soft.append((weight, list(clause)))

    @property
    def trivially_unsat(self) -> bool:
        return any(not c for c in self.hard)

    def copy(self) -> "Cnf":
        return Cnf(
            self.num_vars,
            [list(c) for c in self.hard],
            [(w, list(c)) for w, c in self.soft],
            list(self.comments),
        )


@dataclass(frozen=True)
class Proximity:
    """Restrict edge variables to edges crossing few edges of a reference.

    ``reference[p]`` is the triangulation sequence of path p in the previous
    solution (start first, center last).
    """

    reference: tuple[tuple[Triangulation, ...], ...]
    max_crossings: int

    def __post_init__(self):
        if self.max_crossings < 0:
            raise ValueError("max_crossings must be non-negative")


@dataclass
class EncodeOptions:
    happy_edges: bool = False
    insertion_bound: str = "log2"  # or "string"
    table: Optional[BoundTable] = None
    exact_limit: int = DEFAULT_EXACT_LIMIT
    proximity: Optional[Proximity] = None
    layer_budget: Optional[int] = None

    def __post_init__(self):
        if self.insertion_bound not in ("log2", "string"):
            raise ValueError(f"unknown insertion bound {self.insertion_bound!r}")


@dataclass
class VarMap:
    points: PointSet
    lengths: list[int]
    edge_vars: dict[tuple[int, int, Edge], int] = field(default_factory=dict)
    flip_vars: dict[tuple[int, int, Edge, Edge], int] = field(default_factory=dict)
    center_vars: dict[Edge, int] = field(default_factory=dict)
    starts: list[Triangulation] = field(default_factory=list)

    def edge_var(self, p: int, i: int, e: Edge) -> Optional[int]:
        return self.edge_vars.get((p, i, e))

    def layer_edges(self, model, p: int, i: int) -> set[Edge]:
        return {e for (q, j, e), v in self.edge_vars.items() if q == p and j == i and model[v]}

    def flips_at(self, p: int, i: int) -> list[int]:
        return [v for (q, j, _, _), v in self.flip_vars.items() if q == p and j == i]

    def describe(self, var: int) -> tuple:
        for key, v in self.edge_vars.items():
            if v == var:
                return ("e",) + key
        for key, v in self.flip_vars.items():
            if v == var:
                return ("f",) + key
        raise KeyError(var)


@lru_cache(maxsize=64)
def _quads(points: PointSet) -> tuple[Quad, ...]:
    return tuple(enumerate_empty_convex_quads(points))


def _all_pairs(n: int) -> list[Edge]:
    return [(a, b) for a in range(n) for b in range(a + 1, n)]


def log2_bound(chi: int) -> int:
    return math.ceil(math.log2(chi + 1)) if chi else 0


def insertion_bounds(T: Triangulation, opts: EncodeOptions) -> dict[Edge, int]:
    """Lower bound on the number of parallel flips needed to create each edge."""
    out = {}
    for e in _all_pairs(len(T.points)):
        if e in T.edges:
            out[e] = 0
        elif opts.insertion_bound == "log2":
            out[e] = log2_bound(crossing_count(e, T))
        else:
            out[e] = flip_insertion_lb(e, T, opts.table, opts.exact_limit)
    return out


def _crosses_any(points: PointSet, e: Edge, others) -> bool:
    pts = points.points
    pa, pb = pts[e[0]], pts[e[1]]
    return any(segments_cross(pa, pb, pts[c], pts[d]) for c, d in others)


@dataclass
class _PathSpec:
    start: Triangulation
    length: int
    target: Optional[Triangulation]  # None: shared center layer


def _encode(
    points: PointSet,
    specs: list[_PathSpec],
    defined: list[list[set[Edge]]],
    happy: frozenset,
    opts: EncodeOptions,
) -> tuple[Cnf, VarMap]:
    cnf = Cnf()
    vm = VarMap(points, [s.length for s in specs], starts=[s.start for s in specs])
    shared = specs[0].target is None
    if opts.layer_budget is not None:
        for p, layers in enumerate(defined):
            for i, d in enumerate(layers):
                if len(d) > opts.layer_budget:
                    raise FormulaTooLarge(
                        f"path {p} layer {i}: {len(d)} edge variables > budget {opts.layer_budget}"
                    )

    for p, spec in enumerate(specs):
        last = spec.length if not shared else spec.length - 1
        for i in range(last + 1):
            for e in sorted(defined[p][i]):
                vm.edge_vars[(p, i, e)] = cnf.new_var()
    if shared:
        for e in sorted(defined[0][specs[0].length]):
            v = cnf.new_var()
            vm.center_vars[e] = v
            for p, spec in enumerate(specs):
                vm.edge_vars[(p, spec.length, e)] = v

    # flip variables
    quads = _quads(points)
    for p, spec in enumerate(specs):
        for i in range(spec.length):
            here, there = defined[p][i], defined[p][i + 1]
            for q in quads:
                sides = [edge(q.u, q.u2), edge(q.u2, q.v), edge(q.v, q.v2), edge(q.v2, q.u)]
                if not all(s in here and s in there for s in sides):
                    continue
                for rem, add in ((q.diagonal, q.other_diagonal), (q.other_diagonal, q.diagonal)):
                    if rem not in here or add not in there:
                        continue
                    if opts.happy_edges:
                        if rem in happy:
                            continue
                        if spec.target is not None and rem in spec.target.edges:
                            continue
                        if add in spec.start.edges:
                            continue
                    vm.flip_vars[(p, i, rem, add)] = cnf.new_var()

    ev = vm.edge_vars

    def fix(p: int, i: int, e: Edge, value: bool, why: str):
        v = ev.get((p, i, e))
        if v is None:
            if value:
                cnf.add([])
                cnf.comments.append(f"UNSAT: {why} edge {e} of path {p} has no variable at layer {i}")
            return
        cnf.add([v if value else -v])

    for p, spec in enumerate(specs):
        for e in sorted(defined[p][0] | spec.start.edges):
            fix(p, 0, e, e in spec.start.edges, "start")
        if spec.target is not None:
            L = spec.length
            for e in sorted(defined[p][L] | spec.target.edges):
                fix(p, L, e, e in spec.target.edges, "target")
        for e in sorted(happy):
            for i in range(1, spec.length + (0 if spec.target is not None else 1)):
                fix(p, i, e, True, "common")

    removers: dict[tuple[int, int, Edge], list[int]] = {}
    inserters: dict[tuple[int, int, Edge], list[int]] = {}
    for (p, i, rem, add), f in vm.flip_vars.items():
        removers.setdefault((p, i, rem), []).append(f)
        inserters.setdefault((p, i, add), []).append(f)
        q = _quad_of(rem, add)
        for x in (rem,) + q:
            cnf.add([-f, ev[(p, i, x)]])
        for x in (add,) + q:
            cnf.add([-f, ev[(p, i + 1, x)]])
        nxt = ev.get((p, i + 1, rem))
        if nxt is not None:
            cnf.add([-f, -nxt])

    for p, spec in enumerate(specs):
        for i in range(spec.length):
            for e in sorted(defined[p][i] | defined[p][i + 1]):
                a, b = ev.get((p, i, e)), ev.get((p, i + 1, e))
                if a is not None:
                    cnf.add([-a] + ([b] if b is not None else []) + removers.get((p, i, e), []))
                if b is not None:
                    cnf.add([-b] + ([a] if a is not None else []) + inserters.get((p, i, e), []))
    return cnf, vm


def _quad_of(rem: Edge, add: Edge) -> tuple[Edge, ...]:
    (a, b), (c, d) = rem, add
    return (edge(a, c), edge(c, b), edge(b, d), edge(d, a))


def _proximity_ok(points: PointSet, opts: EncodeOptions, p: int, i: int, final: bool):
    prox = opts.proximity
    if prox is None:
        return lambda e: True
    ref_seq = prox.reference[p]
    ref = ref_seq[-1] if final else ref_seq[min(i, len(ref_seq) - 1)]
    return lambda e: e in ref.edges or crossing_count(e, ref) <= prox.max_crossings


def build_path_formula(
    T0: Triangulation, Tt: Triangulation, l: int, opts: Optional[EncodeOptions] = None
) -> tuple[Cnf, VarMap]:
    """Satisfiable iff a path of length at most l leads from T0 to Tt."""
    opts = opts or EncodeOptions()
    if l < 0:
        raise ValueError("negative length")
    pts = T0.points
    fwd = insertion_bounds(T0, opts)
    bwd = insertion_bounds(Tt, opts)
    happy = (T0.edges & Tt.edges) if opts.happy_edges else frozenset()
    pairs = _all_pairs(len(pts))
    if happy:
        pairs = [e for e in pairs if e in happy or not _crosses_any(pts, e, happy)]
    layers = []
    for i in range(l + 1):
        ok = _proximity_ok(pts, opts, 0, i, i == l)
        layers.append({e for e in pairs if fwd[e] <= i and bwd[e] <= l - i and ok(e)})
    return _encode(pts, [_PathSpec(T0, l, Tt)], [layers], happy, opts)


def _solution_layers(
    starts: Sequence[Triangulation], lengths: Sequence[int], opts: EncodeOptions, happy: frozenset
) -> list[list[set[Edge]]]:
    pts = starts[0].points
    pairs = _all_pairs(len(pts))
    if happy:
        pairs = [e for e in pairs if e in happy or not _crosses_any(pts, e, happy)]
    fwd = [insertion_bounds(T, opts) for T in starts]
    center = {e for e in pairs if all(fwd[p][e] <= lengths[p] for p in range(len(starts)))}
    out = []
    for p, l in enumerate(lengths):
        layers = []
        for i in range(l):
            ok = _proximity_ok(pts, opts, p, i, False)
            layers.append({e for e in pairs if fwd[p][e] <= i and ok(e)})
        ok = _proximity_ok(pts, opts, 0, 0, True)
        layers.append({e for e in center if ok(e)})
        out.append(layers)
    # every path must see the same center universe
    shared = set.intersection(*(ls[-1] for ls in out))
    for ls in out:
        ls[-1] = shared
    return out


def build_solution_formula(
    starts: Sequence[Triangulation], lengths: Sequence[int], opts: Optional[EncodeOptions] = None
) -> tuple[Cnf, VarMap]:
    """Satisfiable iff paths of lengths at most ``lengths`` from ``starts``
    reach a common center. ``starts`` are the input triangulations."""
    opts = opts or EncodeOptions()
    if len(starts) != len(lengths):
        raise ValueError("one length per input triangulation")
    if any(l < 0 for l in lengths):
        raise ValueError("negative length")
    happy = frozenset.intersection(*(T.edges for T in starts)) if opts.happy_edges else frozenset()
    defined = _solution_layers(starts, lengths, opts, happy)
    specs = [_PathSpec(T, l, None) for T, l in zip(starts, lengths)]
    return _encode(starts[0].points, specs, defined, happy, opts)


def build_insertion_formula(
    T0: Triangulation, uv: Edge, l: int, opts: Optional[EncodeOptions] = None
) -> tuple[Cnf, VarMap]:
    """Satisfiable iff some path of length at most l from T0 creates edge uv.

    Happy-edge fixing is switched off: with a single input every edge would
    count as common and nothing could move.
    """
    opts = replace(opts, happy_edges=False) if opts else None
    cnf, vm = build_solution_formula([T0], [l], opts)
    v = vm.center_vars.get(edge(*uv))
    if v is None:
        cnf.add([])
        cnf.comments.append(f"UNSAT: edge {uv} eliminated at layer {l}")
    else:
        cnf.add([v])
    return cnf, vm


def add_last_step_minimization(cnf: Cnf, vm: VarMap, path_id: int, last_layer: int) -> Cnf:
    """Soft clauses (weight 1) forbidding each flip into ``last_layer`` of a path."""
    out = cnf.copy()
    for f in sorted(vm.flips_at(path_id, last_layer - 1)):
        out.add_soft(1, [-f])
    return out


def decode_path(model, vm: VarMap, path_id: int) -> Path:
    """Read a path back from a model; every layer must be a triangulation."""
    from .triangulation import TriangulationError

    layers = []
    for i in range(vm.lengths[path_id] + 1):
        es = vm.layer_edges(model, path_id, i)
        try:
            layers.append(Triangulation(vm.points, es))
        except TriangulationError as err:
            raise RuntimeError(f"decoded layer {i} of path {path_id} is not a triangulation: {err}")
    flips = [ParallelFlip.between(a, b) for a, b in zip(layers, layers[1:])]
    path = Path(layers[0], flips)
    # ParallelFlip validity is checked by replaying
    for _ in path.triangulations():
        pass
    return path


def emit_dimacs(cnf: Cnf) -> str:
    lines = [f"c {c}" for c in cnf.comments]
    lines.append(f"p cnf {cnf.num_vars} {len(cnf.hard)}")
    lines.extend(" ".join(map(str, c + [0])) for c in cnf.hard)
    return "\n".join(lines) + "\n"


def emit_wcnf(cnf: Cnf) -> str:
    if not cnf.soft:
        raise ValueError("WCNF output needs at least one soft clause")
    top = 1 + sum(w for w, _ in cnf.soft)
    lines = [f"c {c}" for c in cnf.comments]
    lines.append(f"p wcnf {cnf.num_vars} {len(cnf.hard) + len(cnf.soft)} {top}")
    lines.extend(" ".join(map(str, [top] + c + [0])) for c in cnf.hard)
    lines.extend(" ".join(map(str, [w] + c + [0])) for w, c in cnf.soft)
    return "\n".join(lines) + "\n"


def _clauses(tokens_iter):
    cur: list[int] = []
    for tok in tokens_iter:
        x = int(tok)
        if x == 0:
            yield cur
            cur = []
        else:
            cur.append(x)
    if cur:
        raise ValueError("unterminated clause")


def parse_dimacs(text: str) -> Cnf:
    cnf = Cnf()
    body = []
    declared = None
    for line in text.splitlines():
        s = line.strip()
        if not s or s.startswith("c"):
            if s.startswith("c "):
                cnf.comments.append(s[2:])
            continue
        if s.startswith("p"):
            _, kind, nv, nc = s.split()
            if kind != "cnf":
                raise ValueError(f"expected 'p cnf', got {s!r}")
            cnf.num_vars, declared = int(nv), int(nc)
            continue
        body.extend(s.split())
    cnf.hard = list(_clauses(body))
    if declared is not None and declared != len(cnf.hard):
        raise ValueError(f"header declares {declared} clauses, found {len(cnf.hard)}")
    return cnf


def parse_wcnf(text: str) -> Cnf:
    cnf = Cnf()
    top = None
    body = []
    for line in text.splitlines():
        s = line.strip()
        if not s or s.startswith("c"):
            if s.startswith("c "):
                cnf.comments.append(s[2:])
            continue
        if s.startswith("p"):
            parts = s.split()
            cnf.num_vars, top = int(parts[2]), int(parts[4])
            continue
        body.extend(s.split())
    for c in _clauses(body):
        w, lits = c[0], c[1:]
        if w == top:
            cnf.hard.append(lits)
        else:
            cnf.soft.append((w, lits))
    return cnf
