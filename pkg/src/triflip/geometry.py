"""Exact integer predicates and constructions on planar point sets.

Coordinates are Python ints, so every determinant below is computed
exactly regardless of magnitude.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from typing import NamedTuple, Sequence

Point = tuple[int, int]


class GeometryError(ValueError):
    pass


def orient(p: Point, q: Point, r: Point) -> int:
    """Sign of the turn p -> q -> r: +1 left, -1 right, 0 collinear."""
    d = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
    return (d > 0) - (d < 0)


def incircle(a: Point, b: Point, c: Point, d: Point) -> int:
    """+1 if d is strictly inside the circle through a, b, c (ccw), -1 outside, 0 on it."""
    adx, ady = a[0] - d[0], a[1] - d[1]
    bdx, bdy = b[0] - d[0], b[1] - d[1]
    cdx, cdy = c[0] - d[0], c[1] - d[1]
    ad = adx * adx + ady * ady
    bd = bdx * bdx + bdy * bdy
    cd = cdx * cdx + cdy * cdy
    det = (
        adx * (bdy * cd - bd * cdy)
        - ady * (bdx * cd - bd * cdx)
        + ad * (bdx * cdy - bdy * cdx)
    )
    s = (det > 0) - (det < 0)
    return s if orient(a, b, c) > 0 else -s


def segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool:
    """True iff the open segments ab and cd share a point."""
    o1, o2 = orient(a, b, c), orient(a, b, d)
    o3, o4 = orient(c, d, a), orient(c, d, b)
    if o1 and o2 and o3 and o4:
        return o1 != o2 and o3 != o4
    if o1 == 0 and o2 == 0:
        # collinear: open intervals overlap with positive length
        k = 0 if a[0] != b[0] else 1
        lo1, hi1 = sorted((a[k], b[k]))
        lo2, hi2 = sorted((c[k], d[k]))
        return max(lo1, lo2) < min(hi1, hi2)
    # exactly one endpoint touches the other line: the contact point is an
    # endpoint of one segment, hence not in its open interior
    return False


def point_in_triangle(p: Point, a: Point, b: Point, c: Point) -> bool:
    """Strict interior test."""
    o1, o2, o3 = orient(a, b, p), orient(b, c, p), orient(c, a, p)
    return o1 == o2 == o3 != 0


def convex_hull(points: Sequence[Point]) -> list[int]:
    """Indices of the hull vertices in ccw order (monotone chain)."""
    idx = sorted(range(len(points)), key=lambda i: points[i])
    if len(idx) < 3:
        return idx

    def chain(order):
        out: list[int] = []
        for i in order:
            while len(out) >= 2 and orient(points[out[-2]], points[out[-1]], points[i]) <= 0:
                out.pop()
            out.append(i)
        return out

    lower = chain(idx)
    upper = chain(reversed(idx))
    return lower[:-1] + upper[:-1]


@dataclass(frozen=True)
class PointSet:
    """Integer points in general position; index = vertex id.

    ``allow_collinear`` only relaxes the collinearity check (duplicates are
    always rejected); flips and encodings assume general position.
    """

    points: tuple[Point, ...]
    allow_collinear: bool = False

    def __post_init__(self):
        pts = tuple((int(x), int(y)) for x, y in self.points)
        object.__setattr__(self, "points", pts)
        _check_general_position(pts, collinear=not self.allow_collinear)

    def __len__(self) -> int:
        return len(self.points)

    def __getitem__(self, i: int) -> Point:
        return self.points[i]

    @property
    def hull(self) -> list[int]:
        h = self.__dict__.get("_hull")
        if h is None:
            h = convex_hull(self.points)
            object.__setattr__(self, "_hull", h)
        return h

    def hull_edges(self) -> set[tuple[int, int]]:
        h = self.hull
        return {tuple(sorted((h[i], h[(i + 1) % len(h)]))) for i in range(len(h))}


def _check_general_position(pts: Sequence[Point], collinear: bool = True) -> None:
    seen: dict[Point, int] = {}
    for i, p in enumerate(pts):
        if p in seen:
            raise GeometryError(f"points {seen[p]} and {i} coincide at {p}")
        seen[p] = i
    if not collinear:
        return
    # collinear triple <=> two other points in the same reduced direction from some point
    for i, p in enumerate(pts):
        dirs: dict[tuple[int, int], int] = {}
        for j in range(i + 1, len(pts)):
            dx, dy = pts[j][0] - p[0], pts[j][1] - p[1]
            g = gcd(dx, dy)
            dx, dy = dx // g, dy // g
            if dx < 0 or (dx == 0 and dy < 0):
                dx, dy = -dx, -dy
            if (dx, dy) in dirs:
                raise GeometryError(f"points {i}, {dirs[(dx, dy)]}, {j} are collinear")
            dirs[(dx, dy)] = j


class Quad(NamedTuple):
    """Empty convex quadrilateral u, u2, v, v2 (convex order) with diagonals uv and u2v2.

    Canonical form: u is the smallest id of the four and u2 < v2.
    """

    u: int
    u2: int
    v: int
    v2: int

    @property
    def diagonal(self) -> tuple[int, int]:
        return (self.u, self.v) if self.u < self.v else (self.v, self.u)

    @property
    def other_diagonal(self) -> tuple[int, int]:
        return (self.u2, self.v2) if self.u2 < self.v2 else (self.v2, self.u2)


def enumerate_empty_convex_quads(S: PointSet) -> list[Quad]:
    """All empty convex quadrilaterals of S, each once, sorted.

    A convex quad with diagonal ab is the union of two empty triangles abc
    and abd on opposite sides of ab whose apexes see each other across ab.
    """
    pts = S.points
    n = len(pts)
    out = []
    for a in range(n):
        for b in range(a + 1, n):
            left, right = [], []
            for c in range(n):
                if c == a or c == b:
                    continue
                o = orient(pts[a], pts[b], pts[c])
                side = left if o > 0 else right
                if not any(
                    point_in_triangle(pts[w], pts[a], pts[b], pts[c])
                    for w in range(n)
                    if w not in (a, b, c)
                ):
                    side.append(c)
            for c in left:
                for d in right:
                    if not segments_cross(pts[a], pts[b], pts[c], pts[d]):
                        continue
                    # each quad is found via both of its diagonals; keep the
                    # one through its smallest vertex
                    if a != min(a, b, c, d):
                        continue
                    out.append(Quad(a, min(c, d), b, max(c, d)))
    out.sort()
    return out
