"""Crossing strings and the string-rewriting insertion bound.

A missing edge uv crossing chi edges of a triangulation meets chi + 1
triangles. Reading them from u to v gives a word over four letters:

    L  the triangle at u              (drawn as a left-pointing triangle)
    U  an intermediate triangle whose uncrossed edge lies left of u -> v
    D  an intermediate triangle whose uncrossed edge lies right of u -> v
    R  the triangle at v

Unit flips act on the word as local replacements, a parallel flip as a set
of replacements on disjoint substrings. The number of rewritings needed to
reach the empty word lower-bounds the number of parallel flips needed to
insert uv.
"""
from __future__ import annotations

import itertools
import math
from collections import deque
from pathlib import Path as FsPath
from typing import Iterable, Iterator, Optional

from .triangulation import Edge, Triangulation, edge, walk_segment

DEFAULT_EXACT_LIMIT = 22

SYMBOLS = {"L": "◁", "U": "▲", "D": "▼", "R": "▷"}
_FROM_SYMBOL = {v: k for k, v in SYMBOLS.items()}

# non-lengthening replacements on two-letter substrings
PAIR_RULES = {
    "LU": ("L",),
    "LD": ("L",),
    "UR": ("R",),
    "DR": ("R",),
    "UU": ("U",),
    "DD": ("D",),
    "DU": ("UD",),
    "UD": ("DU",),
    "LR": ("",),
}
EXTREME = {"LU", "LD", "UR", "DR"}
# inverses of the shrinking rules; never needed for shortest rewritings
GROW_RULES = {"L": ("LU", "LD"), "R": ("UR", "DR"), "U": ("UU",), "D": ("DD",)}


def to_symbols(s: str) -> str:
    return "".join(SYMBOLS[c] for c in s)


def from_symbols(text: str) -> str:
    return "".join(_FROM_SYMBOL.get(c, c) for c in text)


def is_valid(s: str) -> bool:
    return len(s) >= 2 and s[0] == "L" and s[-1] == "R" and all(c in "UD" for c in s[1:-1])


def all_strings(length: int) -> Iterator[str]:
    for mid in itertools.product("UD", repeat=length - 2):
        yield "L" + "".join(mid) + "R"


def _canon(s: str) -> str:
    sw = s.translate(_SWAP_UD)
    rev = s[::-1].translate(_SWAP_LR)
    return min(s, sw, rev, rev.translate(_SWAP_UD))


_SWAP_UD = str.maketrans("UD", "DU")
_SWAP_LR = str.maketrans("LR", "RL")


def rewritings(s: str, *, grow: bool = False) -> set[str]:
    """All strings reachable from s by one rewriting (any non-empty set of
    replacements on pairwise disjoint substrings)."""
    out: set[str] = set()
    n = len(s)

    def rec(i: int, acc: list[str], applied: bool):
        if i >= n:
            if applied:
                out.add("".join(acc))
            return
        acc.append(s[i])
        rec(i + 1, acc, applied)
        acc.pop()
        if grow:
            for rhs in GROW_RULES.get(s[i], ()):
                acc.append(rhs)
                rec(i + 1, acc, True)
                acc.pop()
        for rhs in PAIR_RULES.get(s[i:i + 2], ()):
            acc.append(rhs)
            rec(i + 2, acc, True)
            acc.pop()

    rec(0, [], False)
    return out


def pruned_rewritings(s: str) -> set[str]:
    """Rewritings allowed after pruning: no lengthening rule, and for |s| >= 4
    both extreme replacements are applied; for |s| == 3 at least one is."""
    n = len(s)
    if n == 2:
        return {""} if s == "LR" else set()
    if n == 3:
        return {"LR"}
    mid = s[2:-2]
    inner = rewritings(mid) | {mid}
    return {"L" + m + "R" for m in inner}


_memo: dict[str, int] = {"": 0, "LR": 1}


def rewrite_bound_exact(s: str, limit: int = DEFAULT_EXACT_LIMIT) -> int:
    """Length of a shortest rewriting sequence from s to the empty word."""
    if s and not is_valid(s):
        raise ValueError(f"not a crossing string: {s!r}")
    if len(s) > limit:
        raise ValueError(f"string of length {len(s)} exceeds exact-search limit {limit}")
    return _exact(s)


def _exact(s: str) -> int:
    key = _canon(s)
    hit = _memo.get(key)
    if hit is not None:
        return hit
    best = math.inf
    for t in sorted(pruned_rewritings(key), key=len):
        if 1 + log_bound(t) >= best:
            continue
        best = min(best, 1 + _exact(t))
    _memo[key] = best
    return best


def log_bound(s: str) -> int:
    """ceil(log2 |s|): the crossing-count bound, valid for every string."""
    return 0 if len(s) <= 1 else math.ceil(math.log2(len(s)))


def bfs_bounds(max_len: int, *, grow_cap: Optional[int] = None) -> dict[str, int]:
    """Shortest rewriting lengths for every valid string up to max_len with no
    pruning: all replacement sets, optionally including lengthening rules
    while strings stay within grow_cap symbols.

    Computed by a reverse breadth-first search from the empty word over the
    whole (finite) rewriting graph, so swaps that keep length are handled.
    """
    cap = grow_cap if grow_cap is not None else max_len
    nodes = [s for k in range(2, cap + 1) for s in all_strings(k)]
    preds: dict[str, list[str]] = {s: [] for s in nodes}
    preds[""] = []
    for s in nodes:
        for t in rewritings(s, grow=grow_cap is not None):
            if len(t) <= cap:
                preds[t].append(s)
    dist = {"": 0}
    queue = deque([""])
    while queue:
        t = queue.popleft()
        for s in preds[t]:
            if s not in dist:
                dist[s] = dist[t] + 1
                queue.append(s)
    return {s: d for s, d in dist.items() if 2 <= len(s) <= max_len}


class BoundTable(dict):
    """Exact values b(s) for strings where the log bound is not tight."""

    def store(self, path) -> None:
        lines = [f"{s} {v}\n" for s, v in sorted(self.items())]
        FsPath(path).write_text("".join(lines))

    @classmethod
    def load(cls, path) -> "BoundTable":
        t = cls()
        for line in FsPath(path).read_text().splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            s, v = line.split()
            t[from_symbols(s)] = int(v)
        return t


def precompute_bound_table(max_len: int, limit: int = DEFAULT_EXACT_LIMIT) -> BoundTable:
    if max_len > limit:
        raise ValueError(f"max_len {max_len} exceeds exact-search limit {limit}")
    table = BoundTable()
    for k in range(2, max_len + 1):
        for s in all_strings(k):
            b = _exact(s)
            if b > log_bound(s):
                table[s] = b
    return table


def rewrite_bound_estimate(
    s: str, table: Optional[BoundTable] = None, limit: int = DEFAULT_EXACT_LIMIT
) -> int:
    """A lower bound on b(s): table value, else exact search, else the log bound."""
    if table is not None and s in table:
        return table[s]
    if len(s) <= limit:
        return rewrite_bound_exact(s, limit)
    return log_bound(s)


def extract_crossing_string(uv: Edge, T: Triangulation) -> str:
    u, v = uv
    if edge(u, v) in T.edges:
        raise ValueError(f"{uv} is an edge of the triangulation")
    _, mid = walk_segment(T, u, v)
    return "L" + mid + "R"


def flip_insertion_lb(
    uv: Edge, T: Triangulation, table: Optional[BoundTable] = None, limit: int = DEFAULT_EXACT_LIMIT
) -> int:
    if edge(*uv) in T.edges:
        return 0
    return rewrite_bound_estimate(extract_crossing_string(uv, T), table, limit)


def is_subword(s: str, t: str) -> bool:
    """s is obtained from t by deleting U/D letters."""
    if not (is_valid(s) and is_valid(t)):
        return False
    it = iter(t[1:-1])
    return all(c in it for c in s[1:-1])


def one_letter_deletions(s: str) -> Iterable[str]:
    for i in range(1, len(s) - 1):
        yield s[:i] + s[i + 1:]
