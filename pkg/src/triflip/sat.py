"""SAT / MaxSAT backends: external solver binaries or a built-in solver.

External solvers are run as subprocesses on DIMACS / WCNF files and must
follow the SAT-competition output conventions ("s ..." status line, "v ..."
model lines, "o ..." cost lines for MaxSAT). Every model is checked against
the formula before it is returned.
"""
from __future__ import annotations

import hashlib
import os
import shlex
import subprocess
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .cnf import Cnf, emit_dimacs, emit_wcnf

SAT, UNSAT, UNKNOWN = "SAT", "UNSAT", "UNKNOWN"
BUILTIN_LIMIT = 50_000


class SolverError(RuntimeError):
    pass


@dataclass
class SolverConfig:
    sat_cmd: Optional[str] = None  # e.g. "cadical {cnf}"
    maxsat_cmd: Optional[str] = None  # e.g. "EvalMaxSAT {wcnf}"
    time_limit: Optional[float] = None
    workdir: Optional[str] = None
    keep_files: bool = False
    builtin_limit: int = BUILTIN_LIMIT

    @classmethod
    def from_env(cls, **overrides) -> "SolverConfig":
        cfg = cls(
            sat_cmd=os.environ.get("TRIFLIP_SAT_CMD") or None,
            maxsat_cmd=os.environ.get("TRIFLIP_MAXSAT_CMD") or None,
        )
        for k, v in overrides.items():
            if v is not None:
                setattr(cfg, k, v)
        return cfg


@dataclass
class SatResult:
    status: str
    model: Optional[list[bool]] = None  # model[v] for v in 1..num_vars; index 0 unused
    cost: Optional[int] = None
    diagnostics: str = ""

    @property
    def sat(self) -> bool:
        return self.status == SAT


def check_model(cnf: Cnf, model: list[bool]) -> Optional[list[int]]:
    """First hard clause the model falsifies, or None."""
    for c in cnf.hard:
        if not any(model[l] if l > 0 else not model[-l] for l in c):
            return c
    return None


def model_cost(cnf: Cnf, model: list[bool]) -> int:
    return sum(w for w, c in cnf.soft if not any(model[l] if l > 0 else not model[-l] for l in c))


# ---------------------------------------------------------------- built-in


class _Cdcl:
    """Conflict-driven DPLL: two watched literals, 1-UIP learning, no restarts.

    Branching picks the lowest unassigned variable, true first.
    Literal index: 2*v for v, 2*v+1 for -v.
    """

    def __init__(self, num_vars: int, clauses: list[list[int]]):
        self.n = num_vars
        self.val = [0] * (2 * num_vars + 2)  # +1 true, -1 false, 0 free
        self.level = [0] * (num_vars + 1)
        self.reason: list[Optional[list[int]]] = [None] * (num_vars + 1)
        self.watches: list[list[list[int]]] = [[] for _ in range(2 * num_vars + 2)]
        self.trail: list[int] = []
        self.lim: list[int] = []
        self.qhead = 0
        self.ok = True
        self.conflicts = 0
        self.cursor = 1
        units = []
        for c in clauses:
            lits = sorted({2 * l if l > 0 else -2 * l + 1 for l in c})
            if any((l ^ 1) in lits for l in lits if l % 2 == 0):
                continue  # tautology
            if not lits:
                self.ok = False
                return
            if len(lits) == 1:
                units.append(lits[0])
                continue
            self.watches[lits[0]].append(lits)
            self.watches[lits[1]].append(lits)
        for u in units:
            if self.val[u] == -1:
                self.ok = False
                return
            if self.val[u] == 0:
                self._assign(u, None)
        if self._propagate() is not None:
            self.ok = False

    def _assign(self, lit: int, reason):
        self.val[lit] = 1
        self.val[lit ^ 1] = -1
        v = lit >> 1
        self.level[v] = len(self.lim)
        self.reason[v] = reason
        self.trail.append(lit)

    def _propagate(self):
        val, watches = self.val, self.watches
        while self.qhead < len(self.trail):
            lit = self.trail[self.qhead]
            self.qhead += 1
            false_lit = lit ^ 1
            ws = watches[false_lit]
            i = j = 0
            while i < len(ws):
                c = ws[i]
                i += 1
                if c[0] == false_lit:
                    c[0], c[1] = c[1], c[0]
                if val[c[0]] == 1:
                    ws[j] = c
                    j += 1
                    continue
                for k in range(2, len(c)):
                    if val[c[k]] != -1:
                        c[1], c[k] = c[k], c[1]
                        watches[c[1]].append(c)
                        break
                else:
                    ws[j] = c
                    j += 1
                    if val[c[0]] == -1:
                        while i < len(ws):
                            ws[j] = ws[i]
                            j += 1
                            i += 1
                        del ws[j:]
                        return c
                    self._assign(c[0], c)
            del ws[j:]
        return None

    def _analyze(self, confl):
        seen = [False] * (self.n + 1)
        learnt = [0]
        counter = 0
        cur = len(self.lim)
        idx = len(self.trail) - 1
        p = None
        c = confl
        while True:
            for q in c if p is None else c[1:]:
                v = q >> 1
                if not seen[v] and self.level[v] > 0:
                    seen[v] = True
                    if self.level[v] >= cur:
                        counter += 1
                    else:
                        learnt.append(q)
            while not seen[self.trail[idx] >> 1]:
                idx -= 1
            p = self.trail[idx]
            idx -= 1
            seen[p >> 1] = False
            counter -= 1
            if counter == 0:
                break
            c = self.reason[p >> 1]
            # reason clauses keep the implied literal first
            if c[0] != p:
                k = c.index(p)
                c[0], c[k] = c[k], c[0]
        learnt[0] = p ^ 1
        if len(learnt) == 1:
            back = 0
        else:
            k = max(range(1, len(learnt)), key=lambda t: self.level[learnt[t] >> 1])
            learnt[1], learnt[k] = learnt[k], learnt[1]
            back = self.level[learnt[1] >> 1]
        return learnt, back

    def _backtrack(self, level: int):
        if len(self.lim) <= level:
            return
        for lit in self.trail[self.lim[level]:]:
            v = lit >> 1
            self.val[lit] = self.val[lit ^ 1] = 0
            self.reason[v] = None
            if v < self.cursor:
                self.cursor = v
        del self.trail[self.lim[level]:]
        del self.lim[level:]
        self.qhead = len(self.trail)

    def solve(self, deadline: Optional[float] = None, max_conflicts: Optional[int] = None) -> Optional[bool]:
        if not self.ok:
            return False
        while True:
            confl = self._propagate()
            if confl is not None:
                self.conflicts += 1
                if not self.lim:
                    return False
                learnt, back = self._analyze(confl)
                self._backtrack(back)
                if len(learnt) == 1:
                    self._assign(learnt[0], None)
                else:
                    self.watches[learnt[0]].append(learnt)
                    self.watches[learnt[1]].append(learnt)
                    self._assign(learnt[0], learnt)
                if self.conflicts % 256 == 0:
                    if deadline is not None and time.monotonic() > deadline:
                        return None
                    if max_conflicts is not None and self.conflicts >= max_conflicts:
                        return None
                continue
            v = self.cursor
            while v <= self.n and self.val[2 * v] != 0:
                v += 1
            self.cursor = v
            if v > self.n:
                return True
            self.lim.append(len(self.trail))
            self._assign(2 * v, None)

    def model(self) -> list[bool]:
        return [False] + [self.val[2 * v] == 1 for v in range(1, self.n + 1)]


def builtin_solve(
    cnf: Cnf, limit: int = BUILTIN_LIMIT, time_limit: Optional[float] = None
) -> SatResult:
    if cnf.num_vars > limit:
        raise SolverError(f"{cnf.num_vars} variables exceed the built-in solver limit {limit}")
    deadline = time.monotonic() + time_limit if time_limit else None
    s = _Cdcl(cnf.num_vars, cnf.hard)
    r = s.solve(deadline)
    if r is None:
        return SatResult(UNKNOWN, diagnostics="built-in solver time limit")
    if not r:
        return SatResult(UNSAT)
    model = s.model()
    bad = check_model(cnf, model)
    if bad is not None:
        raise SolverError(f"built-in solver model violates clause {bad}")
    return SatResult(SAT, model)


def _at_most_weighted(cnf: Cnf, lits: list[tuple[int, int]], bound: int) -> None:
    """Hard clauses enforcing sum(w for (w, x) if x) <= bound (sequential weight counter)."""
    if bound < 0:
        cnf.add([])
        return
    # s[j][c] true if the first j+1 terms reach at least c + 1
    prev: list[int] = []
    for w, x in lits:
        if w > bound:
            cnf.add([-x])
            w = 0
        cur = [cnf.new_var() for _ in range(bound)]
        for c in range(bound):
            if c < len(prev):
                cnf.add([-prev[c], cur[c]])
            if c < w:
                cnf.add([-x, cur[c]])
            elif w and c - w < len(prev):
                cnf.add([-x, -prev[c - w], cur[c]])
        if w:
            if bound - w < len(prev):
                cnf.add([-x, -prev[bound - w]])
        prev = cur


def builtin_maxsat(cnf: Cnf, limit: int = BUILTIN_LIMIT, time_limit: Optional[float] = None) -> SatResult:
    """Minimum-cost model by binary search over the cost with a weighted
    at-most constraint on soft-clause relaxation variables."""
    base = Cnf(cnf.num_vars, [list(c) for c in cnf.hard])
    relax = []
    for w, c in cnf.soft:
        r = base.new_var()
        base.add(c + [r])
        relax.append((w, r))
    deadline = time.monotonic() + time_limit if time_limit else None

    def remaining():
        return None if deadline is None else max(0.01, deadline - time.monotonic())

    first = builtin_solve(base, limit, remaining())
    if first.status != SAT:
        return first
    best_model = first.model[: cnf.num_vars + 1]
    hi = model_cost(cnf, best_model)
    lo = 0
    while lo < hi:
        mid = (lo + hi) // 2
        trial = base.copy()
        _at_most_weighted(trial, relax, mid)
        r = builtin_solve(trial, max(limit, trial.num_vars), remaining())
        if r.status == UNKNOWN:
            return SatResult(UNKNOWN, diagnostics="built-in MaxSAT time limit")
        if r.sat:
            best_model = r.model[: cnf.num_vars + 1]
            hi = model_cost(cnf, best_model)
        else:
            lo = mid + 1
    return SatResult(SAT, best_model, hi)


# ---------------------------------------------------------------- external


def _keep(text: str, suffix: str, cfg: SolverConfig) -> None:
    digest = hashlib.sha1(text.encode()).hexdigest()[:16]
    workdir = cfg.workdir or "."
    Path(workdir).mkdir(parents=True, exist_ok=True)
    Path(workdir, digest + suffix).write_text(text)


def _run(cmd_template: str, placeholder: str, text: str, suffix: str, cfg: SolverConfig):
    digest = hashlib.sha1(text.encode()).hexdigest()[:16]
    workdir = cfg.workdir or tempfile.gettempdir()
    Path(workdir).mkdir(parents=True, exist_ok=True)
    fd, path = tempfile.mkstemp(prefix=digest + "-", suffix=suffix, dir=workdir)
    if cfg.keep_files:
        os.close(fd)
        os.remove(path)
        path = os.path.join(workdir, digest + suffix)
        Path(path).write_text(text)
    else:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
    cmd = cmd_template.replace("{" + placeholder + "}", shlex.quote(path))
    try:
        proc = subprocess.run(
            cmd, shell=True, capture_output=True, text=True, timeout=cfg.time_limit
        )
        return proc.returncode, proc.stdout, proc.stderr
    except subprocess.TimeoutExpired:
        return None, "", "timeout"
    finally:
        if not cfg.keep_files and os.path.exists(path):
            os.remove(path)


def _parse_values(lines: list[str], num_vars: int) -> list[bool]:
    model = [False] * (num_vars + 1)
    tokens = [t for line in lines for t in line.split()]
    if len(tokens) == 1 and set(tokens[0]) <= {"0", "1"} and len(tokens[0]) == num_vars and num_vars > 1:
        for i, ch in enumerate(tokens[0], start=1):
            model[i] = ch == "1"
        return model
    for t in tokens:
        x = int(t)
        if x and abs(x) <= num_vars:
            model[abs(x)] = x > 0
    return model


def parse_solver_output(out: str, num_vars: int) -> SatResult:
    status = None
    cost = None
    vlines = []
    for line in out.splitlines():
        if line.startswith("s "):
            s = line[2:].strip()
            if s == "SATISFIABLE":
                status = SAT
            elif s in ("UNSATISFIABLE",):
                status = UNSAT
            elif s == "OPTIMUM FOUND":
                status = SAT
            elif s == "UNKNOWN":
                status = UNKNOWN
            else:
                raise SolverError(f"unrecognised status line {line!r}")
        elif line.startswith("v "):
            vlines.append(line[2:])
        elif line.startswith("o "):
            cost = int(line[2:].split()[0])
    if status is None:
        raise SolverError("no status line in solver output")
    model = _parse_values(vlines, num_vars) if status == SAT else None
    return SatResult(status, model, cost)


def solve_sat(cnf: Cnf, cfg: Optional[SolverConfig] = None) -> SatResult:
    cfg = cfg or SolverConfig()
    if cnf.soft:
        raise ValueError("solve_sat called on a formula with soft clauses")
    if cnf.trivially_unsat:
        return SatResult(UNSAT, diagnostics="empty clause")
    if not cfg.sat_cmd:
        if cfg.keep_files:
            _keep(emit_dimacs(cnf), ".cnf", cfg)
        return builtin_solve(cnf, cfg.builtin_limit, cfg.time_limit)
    code, out, err = _run(cfg.sat_cmd, "cnf", emit_dimacs(cnf), ".cnf", cfg)
    if code is None:
        return SatResult(UNKNOWN, diagnostics="timeout")
    try:
        res = parse_solver_output(out, cnf.num_vars)
    except (SolverError, ValueError) as e:
        return SatResult(UNKNOWN, diagnostics=f"exit {code}: {e}; stderr: {err[-500:]}")
    if res.sat:
        bad = check_model(cnf, res.model)
        if bad is not None:
            raise SolverError(f"external solver model violates clause {bad}")
    return res


def solve_maxsat(cnf: Cnf, cfg: Optional[SolverConfig] = None) -> SatResult:
    cfg = cfg or SolverConfig()
    if not cnf.soft:
        raise ValueError("solve_maxsat needs at least one soft clause")
    if cnf.trivially_unsat:
        return SatResult(UNSAT, diagnostics="empty clause")
    if not cfg.maxsat_cmd:
        if cfg.keep_files:
            _keep(emit_wcnf(cnf), ".wcnf", cfg)
        return builtin_maxsat(cnf, cfg.builtin_limit, cfg.time_limit)
    code, out, err = _run(cfg.maxsat_cmd, "wcnf", emit_wcnf(cnf), ".wcnf", cfg)
    if code is None:
        return SatResult(UNKNOWN, diagnostics="timeout")
    try:
        res = parse_solver_output(out, cnf.num_vars)
    except (SolverError, ValueError) as e:
        return SatResult(UNKNOWN, diagnostics=f"exit {code}: {e}; stderr: {err[-500:]}")
    if res.sat:
        bad = check_model(cnf, res.model)
        if bad is not None:
            raise SolverError(f"external MaxSAT model violates clause {bad}")
        actual = model_cost(cnf, res.model)
        if res.cost is not None and res.cost != actual:
            raise SolverError(f"reported cost {res.cost} but model costs {actual}")
        res.cost = actual
    return res
