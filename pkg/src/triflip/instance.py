"""Instance and solution files, solution verification, random instances, SVG."""
from __future__ import annotations

import json
import random
from dataclasses import dataclass
from typing import Optional

from .geometry import GeometryError, PointSet, orient
from .triangulation import (
    FlipError,
    ParallelFlip,
    Path,
    Triangulation,
    TriangulationError,
    apply_parallel_flip,
    delaunay,
    edge,
    unit_flip_candidates,
    flip_edges,
)


class FormatError(ValueError):
    pass


@dataclass
class Instance:
    name: str
    points: PointSet
    inputs: list[Triangulation]

    def __post_init__(self):
        if len(self.inputs) < 2:
            raise FormatError("an instance needs at least two triangulations")


@dataclass
class Solution:
    instance_name: str
    center: Triangulation
    paths: list[Path]

    @property
    def objective(self) -> int:
        return sum(len(p) for p in self.paths)

    @property
    def lengths(self) -> list[int]:
        return [len(p) for p in self.paths]

    def compressed(self) -> "Solution":
        return Solution(self.instance_name, self.center, [p.compressed() for p in self.paths])


def _edges_json(edges) -> list[list[int]]:
    return [list(e) for e in sorted(edge(*e) for e in edges)]


def _edges_from(raw, n: int, what: str):
    out = []
    for item in raw:
        if len(item) != 2 or not all(isinstance(v, int) for v in item):
            raise FormatError(f"{what}: malformed edge {item!r}")
        a, b = item
        if not (0 <= a < n and 0 <= b < n) or a == b:
            raise FormatError(f"{what}: invalid edge {item!r}")
        out.append(edge(a, b))
    return out


def parse_instance(text: str) -> Instance:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f"malformed JSON: {e}") from e
    try:
        name = data["name"]
        raw_pts = data["points"]
        raw_tris = data["triangulations"]
    except (KeyError, TypeError) as e:
        raise FormatError(f"missing field {e}") from e
    if not all(isinstance(p, list) and len(p) == 2 and all(isinstance(c, int) for c in p) for p in raw_pts):
        raise FormatError("points must be [x, y] integer pairs")
    try:
        S = PointSet(tuple(tuple(p) for p in raw_pts))
    except GeometryError as e:
        raise FormatError(str(e)) from e
    tris = []
    for k, raw in enumerate(raw_tris):
        es = _edges_from(raw, len(S), f"triangulation {k}")
        try:
            tris.append(Triangulation(S, es))
        except TriangulationError as e:
            raise FormatError(f"triangulation {k}: {e}") from e
    return Instance(name, S, tris)


def serialize_instance(inst: Instance) -> str:
    return json.dumps(
        {
            "name": inst.name,
            "points": [list(p) for p in inst.points.points],
            "triangulations": [_edges_json(T.edges) for T in inst.inputs],
        }
    )


def serialize_solution(sol: Solution) -> str:
    """Solution JSON; empty (stationary) flips are dropped."""
    paths = []
    for p in sol.paths:
        flips = [
            {"remove": _edges_json(pf.removed), "add": _edges_json(pf.added)}
            for pf in p.flips
            if not pf.is_empty
        ]
        paths.append({"flips": flips})
    return json.dumps(
        {"instance": sol.instance_name, "center": _edges_json(sol.center.edges), "paths": paths}
    )


def parse_solution(text: str, inst: Instance) -> Solution:
    """Parse without checking flips; use verify_solution for that."""
    try:
        data = json.loads(text)
        name = data["instance"]
        center_raw = data["center"]
        paths_raw = data["paths"]
    except (json.JSONDecodeError, KeyError, TypeError) as e:
        raise FormatError(f"malformed solution: {e}") from e
    n = len(inst.points)
    center = Triangulation(inst.points, _edges_from(center_raw, n, "center"), check=False, _apex={})
    paths = []
    for k, praw in enumerate(paths_raw):
        flips = []
        for fraw in praw.get("flips", []):
            flips.append(
                ParallelFlip(
                    frozenset(_edges_from(fraw.get("remove", []), n, f"path {k}")),
                    frozenset(_edges_from(fraw.get("add", []), n, f"path {k}")),
                )
            )
        start = inst.inputs[k] if k < len(inst.inputs) else inst.inputs[0]
        paths.append(Path(start, flips))
    return Solution(name, center, paths)


@dataclass
class VerifyReport:
    valid: bool
    objective: int
    first_violation: Optional[str] = None


def verify_solution(inst: Instance, sol: Solution, strict: bool = True) -> VerifyReport:
    objective = sum(len(p.flips) for p in sol.paths)

    def bad(msg):
        return VerifyReport(False, objective, msg)

    if len(sol.paths) != len(inst.inputs):
        return bad(f"{len(sol.paths)} paths for {len(inst.inputs)} input triangulations")
    ends = []
    for k, (path, T) in enumerate(zip(sol.paths, inst.inputs)):
        if path.start.edges != T.edges:
            return bad(f"path {k} does not start at input triangulation {k}")
        cur = T
        for s, pf in enumerate(path.flips):
            try:
                cur = apply_parallel_flip(cur, pf, strict=strict)
            except FlipError as e:
                return bad(f"path {k} flip {s}: {e}")
        ends.append(cur)
    for k, T in enumerate(ends[1:], start=1):
        if T.edges != ends[0].edges:
            return bad(f"path {k} ends at a different triangulation than path 0")
    if sol.center.edges != ends[0].edges:
        return bad("paths do not end at the declared center")
    return VerifyReport(True, objective)


def _random_points(n: int, rng: random.Random, retries: int = 1000) -> list[tuple[int, int]]:
    hi = 10 * n
    pts: list[tuple[int, int]] = []
    seen = set()
    tries = 0
    while len(pts) < n:
        tries += 1
        if tries > retries * n:
            raise GeometryError(f"could not sample {n} points in general position")
        p = (rng.randint(0, hi), rng.randint(0, hi))
        if p in seen:
            continue
        if any(orient(pts[i], pts[j], p) == 0 for i in range(len(pts)) for j in range(i + 1, len(pts))):
            continue
        pts.append(p)
        seen.add(p)
    return pts


def random_flips(T: Triangulation, k: int, rng: random.Random) -> Triangulation:
    for _ in range(k):
        cands = unit_flip_candidates(T)
        if not cands:
            break
        e, _ = rng.choice(cands)
        T = flip_edges(T, [e])
    return T


def generate_random_instance(n: int, m: int, k: int, seed: int) -> Instance:
    if n < 4 or m < 2 or k < 0:
        raise ValueError("need n >= 4, m >= 2, k >= 0")
    rng = random.Random(seed)
    S = PointSet(tuple(_random_points(n, rng)))
    D = delaunay(S)
    inputs = [random_flips(D, k, rng) for _ in range(m)]
    return Instance(f"random-n{n}-m{m}-k{k}-s{seed}", S, inputs)


def export_svg(T: Triangulation, stroke: str = "black") -> str:
    pts = T.points.points
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    span = max(x1 - x0, y1 - y0, 1)
    pad = 0.05 * span
    w, h = (x1 - x0) + 2 * pad, (y1 - y0) + 2 * pad
    r = span / 150

    def fy(y):  # flip so that y points up
        return y0 + y1 - y

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'viewBox="{x0 - pad:g} {y0 - pad:g} {w:g} {h:g}">',
    ]
    for a, b in sorted(T.edges):
        (ax, ay), (bx, by) = pts[a], pts[b]
        out.append(
            f'<line x1="{ax}" y1="{fy(ay)}" x2="{bx}" y2="{fy(by)}" '
            f'stroke="{stroke}" stroke-width="{r / 2:g}"/>'
        )
    for x, y in pts:
        out.append(f'<circle cx="{x}" cy="{fy(y)}" r="{r:g}" fill="red"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
