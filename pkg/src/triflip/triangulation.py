"""Triangulations of a fixed point set, unit and parallel flips."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional

from .geometry import GeometryError, PointSet, incircle, orient, point_in_triangle, segments_cross

Edge = tuple[int, int]


def edge(a: int, b: int) -> Edge:
    if a == b:
        raise ValueError(f"degenerate edge ({a}, {a})")
    return (a, b) if a < b else (b, a)


class TriangulationError(ValueError):
    def __init__(self, kind: str, message: str, witness=None):
        super().__init__(message)
        self.kind = kind
        self.witness = witness


class FlipError(ValueError):
    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    kind: Optional[str] = None
    message: str = ""
    witness: object = None


def validate_triangulation(S: PointSet, edges: Iterable[Edge]) -> ValidationReport:
    """Check the triangulation invariants, reporting the first violation."""
    n = len(S)
    es = sorted(set(edge(*e) for e in edges))
    for a, b in es:
        if not (0 <= a < n and 0 <= b < n):
            return ValidationReport(False, "vertex", f"edge {(a, b)} references a missing vertex", (a, b))
    pts = S.points
    for i, (a, b) in enumerate(es):
        pa, pb = pts[a], pts[b]
        for c, d in es[i + 1:]:
            if segments_cross(pa, pb, pts[c], pts[d]):
                return ValidationReport(
                    False, "crossing", f"edges {(a, b)} and {(c, d)} cross", ((a, b), (c, d))
                )
    h = len(S.hull)
    want = 3 * n - 3 - h
    if len(es) != want:
        return ValidationReport(
            False, "count", f"edge count {len(es)} != 3*{n}-3-{h} = {want}", (len(es), want)
        )
    missing = sorted(S.hull_edges() - set(es))
    if missing:
        return ValidationReport(False, "hull", f"hull edge {missing[0]} missing", missing[0])
    return ValidationReport(True)


class Triangulation:
    """Immutable triangulation: canonical edge set plus derived apex map.

    ``apex[e]`` lists the third vertices of the one (hull edge) or two
    (interior edge) triangles bordering ``e``.
    """

    __slots__ = ("points", "edges", "_apex", "_hash")

    def __init__(self, points: PointSet, edges: Iterable[Edge], *, check: bool = True, _apex=None):
        self.points = points
        self.edges = frozenset(edge(*e) for e in edges)
        self._hash = None
        if check:
            rep = validate_triangulation(points, self.edges)
            if not rep.ok:
                raise TriangulationError(rep.kind, rep.message, rep.witness)
        self._apex = _apex if _apex is not None else _build_apex(points, self.edges)

    def __eq__(self, other):
        if not isinstance(other, Triangulation):
            return NotImplemented
        return self.edges == other.edges and self.points == other.points

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.edges)
        return self._hash

    def __repr__(self):
        return f"Triangulation(n={len(self.points)}, edges={len(self.edges)})"

    def __contains__(self, e) -> bool:
        return edge(*e) in self.edges

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges)

    def apexes(self, e: Edge) -> tuple[int, ...]:
        return self._apex[edge(*e)]

    @property
    def triangles(self) -> list[tuple[int, int, int]]:
        tris = set()
        for (a, b), aps in self._apex.items():
            for c in aps:
                tris.add(tuple(sorted((a, b, c))))
        return sorted(tris)

    def triangles_of(self, e: Edge) -> list[tuple[int, int, int]]:
        a, b = edge(*e)
        return [tuple(sorted((a, b, c))) for c in self._apex[(a, b)]]

    def flip_partner(self, e: Edge) -> Optional[Edge]:
        """The other diagonal of e's quad if it is strictly convex, else None."""
        a, b = edge(*e)
        aps = self._apex[(a, b)]
        if len(aps) != 2:
            return None
        c, d = aps
        pts = self.points.points
        if orient(pts[c], pts[d], pts[a]) * orient(pts[c], pts[d], pts[b]) < 0:
            return edge(c, d)
        return None

    def neighbors(self, v: int) -> list[int]:
        return sorted({b if a == v else a for a, b in self.edges if v in (a, b)})


def _build_apex(S: PointSet, edges: frozenset) -> dict[Edge, tuple[int, ...]]:
    pts = S.points
    nbr: dict[int, set[int]] = {}
    for a, b in edges:
        nbr.setdefault(a, set()).add(b)
        nbr.setdefault(b, set()).add(a)
    apex = {}
    for a, b in edges:
        pa, pb = pts[a], pts[b]
        best = {1: None, -1: None}
        for c in nbr[a] & nbr[b]:
            s = orient(pa, pb, pts[c])
            cur = best[s]
            # candidate triangles on one side are nested; the face is the innermost
            if cur is None or point_in_triangle(pts[c], pa, pb, pts[cur]):
                best[s] = c
        apex[(a, b)] = tuple(sorted(c for c in best.values() if c is not None))
    return apex


class _Mutable:
    """Edge set and apex map under in-place unit flips."""

    def __init__(self, T: Triangulation):
        self.points = T.points
        self.edges = set(T.edges)
        self.apex = dict(T._apex)

    def flip(self, e: Edge) -> Edge:
        a, b = e
        c, d = self.apex[e]
        f = edge(c, d)
        del self.apex[e]
        self.edges.remove(e)
        self.edges.add(f)
        self.apex[f] = (a, b)
        # boundary edges swap the removed-diagonal endpoint for the new one
        for x in (a, b):
            other = b if x == a else a
            for y in (c, d):
                g = edge(x, y)
                new = d if y == c else c
                self.apex[g] = tuple(sorted(new if z == other else z for z in self.apex[g]))
        return f

    def freeze(self) -> Triangulation:
        return Triangulation(self.points, self.edges, check=False, _apex=self.apex)


@dataclass(frozen=True)
class ParallelFlip:
    removed: frozenset = field(default_factory=frozenset)
    added: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "removed", frozenset(edge(*e) for e in self.removed))
        object.__setattr__(self, "added", frozenset(edge(*e) for e in self.added))

    def __len__(self) -> int:
        return len(self.removed)

    @property
    def is_empty(self) -> bool:
        return not self.removed and not self.added

    def reversed(self) -> "ParallelFlip":
        return ParallelFlip(self.added, self.removed)

    @classmethod
    def between(cls, T: Triangulation, T2: Triangulation) -> "ParallelFlip":
        return cls(T.edges - T2.edges, T2.edges - T.edges)


def unit_flip_candidates(T: Triangulation) -> list[tuple[Edge, Edge]]:
    out = []
    for e in sorted(T.edges):
        f = T.flip_partner(e)
        if f is not None:
            out.append((e, f))
    return out


def apply_parallel_flip(T: Triangulation, pf: ParallelFlip, strict: bool = False) -> Triangulation:
    if pf.is_empty:
        if strict:
            raise FlipError("empty parallel flip")
        return T
    if len(pf.removed) != len(pf.added):
        raise FlipError(f"{len(pf.removed)} edges removed but {len(pf.added)} added")
    used: dict[tuple, Edge] = {}
    partners = {}
    for e in sorted(pf.removed):
        if e not in T.edges:
            raise FlipError(f"removed edge {e} is not in the triangulation", e)
        for tri in T.triangles_of(e):
            if tri in used:
                raise FlipError(f"removed edges {used[tri]} and {e} share triangle {tri}", (used[tri], e))
            used[tri] = e
        f = T.flip_partner(e)
        if f is None:
            raise FlipError(f"edge {e} does not bound an empty convex quadrilateral", e)
        partners[e] = f
    if set(partners.values()) != pf.added:
        bad = sorted(pf.added - set(partners.values()))
        raise FlipError(f"added edge {bad[0]} is not the flip of any removed edge", bad[0])
    m = _Mutable(T)
    for e in sorted(pf.removed):
        m.flip(e)
    return m.freeze()


def flip_edges(T: Triangulation, removed: Iterable[Edge]) -> Triangulation:
    """Apply unit flips of the given (pairwise independent) edges without re-checking."""
    m = _Mutable(T)
    for e in sorted(removed):
        m.flip(e)
    return m.freeze()


@dataclass
class Path:
    start: Triangulation
    flips: list[ParallelFlip] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.flips)

    def triangulations(self, strict: bool = False) -> Iterator[Triangulation]:
        T = self.start
        yield T
        for pf in self.flips:
            T = apply_parallel_flip(T, pf, strict=strict)
            yield T

    @property
    def end(self) -> Triangulation:
        T = self.start
        for T in self.triangulations():
            pass
        return T

    def compressed(self) -> "Path":
        return Path(self.start, [pf for pf in self.flips if not pf.is_empty])

    def reversed(self) -> "Path":
        return Path(self.end, [pf.reversed() for pf in reversed(self.flips)])

    def __add__(self, other: "Path") -> "Path":
        return Path(self.start, list(self.flips) + list(other.flips))


def walk_segment(T: Triangulation, a: int, b: int) -> tuple[list[tuple[int, int]], str]:
    """Walk the triangles of T met by the directed segment a -> b.

    Returns the crossed edges in order as (left vertex, right vertex) pairs
    and, for each intermediate triangle, 'U' if its uncrossed edge lies left
    of a -> b and 'D' if it lies right.
    """
    if a == b:
        raise ValueError("segment endpoints coincide")
    if edge(a, b) in T.edges:
        return [], ""
    pts = T.points.points
    pa, pb = pts[a], pts[b]
    first = None
    for x in T.neighbors(a):
        for y in T._apex[edge(a, x)]:
            if segments_cross(pa, pb, pts[x], pts[y]):
                first = (x, y) if orient(pa, pb, pts[x]) > 0 else (y, x)
                break
        if first:
            break
    if first is None:
        raise GeometryError(f"segment {(a, b)} leaves the triangulation")
    crossed = [first]
    syms = []
    l, r = first
    prev = a
    while True:
        nxt = [z for z in T._apex[edge(l, r)] if z != prev]
        z = nxt[0]
        if z == b:
            break
        if orient(pa, pb, pts[z]) > 0:
            syms.append("U")
            prev = l
            l = z
        else:
            syms.append("D")
            prev = r
            r = z
        crossed.append((l, r))
    return crossed, "".join(syms)


def crossing_edges(seg: Edge, T: Triangulation) -> list[Edge]:
    """Edges of T properly crossing seg, ordered from seg[0] to seg[1]."""
    crossed, _ = walk_segment(T, seg[0], seg[1])
    return [edge(l, r) for l, r in crossed]


def crossing_count(seg: Edge, T: Triangulation) -> int:
    return len(walk_segment(T, seg[0], seg[1])[0])


def common_edges(T: Triangulation, T2: Triangulation) -> frozenset:
    return T.edges & T2.edges


def _sweep_triangulation(S: PointSet) -> Triangulation:
    pts = S.points
    order = sorted(range(len(pts)), key=lambda i: pts[i])
    a, b, c = order[:3]
    hull = [a, b, c] if orient(pts[a], pts[b], pts[c]) > 0 else [a, c, b]
    edges = {edge(a, b), edge(b, c), edge(a, c)}
    for p in order[3:]:
        k = len(hull)
        vis = [orient(pts[hull[i]], pts[hull[(i + 1) % k]], pts[p]) < 0 for i in range(k)]
        start = next(i for i in range(k) if vis[i] and not vis[i - 1])
        j = start
        chain = [hull[start]]
        while vis[j % k]:
            j += 1
            chain.append(hull[j % k])
        for v in chain:
            edges.add(edge(v, p))
        inner = set(chain[1:-1])
        hull = [v for v in hull if v not in inner]
        hull.insert(hull.index(chain[0]) + 1, p)
    return Triangulation(S, edges, check=False)


def delaunay(S: PointSet) -> Triangulation:
    """Delaunay triangulation by Lawson flips from a sweep triangulation.

    Cocircular quads keep the diagonal with the smaller (min id, max id) pair.
    """
    if len(S) < 3:
        raise GeometryError("Delaunay triangulation needs at least 3 points")
    m = _Mutable(_sweep_triangulation(S))
    pts = S.points
    stack = sorted(m.edges, reverse=True)
    while stack:
        e = stack.pop()
        if e not in m.edges:
            continue
        aps = m.apex[e]
        if len(aps) != 2:
            continue
        a, b = e
        c, d = aps
        if orient(pts[a], pts[b], pts[c]) < 0:
            c, d = d, c
        s = incircle(pts[a], pts[b], pts[c], pts[d])
        if s > 0 or (s == 0 and edge(c, d) < e):
            m.flip(e)
            stack.extend([edge(a, c), edge(c, b), edge(b, d), edge(d, a)])
    return m.freeze()
