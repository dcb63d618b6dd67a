#!/usr/bin/env python3
"""SAT / MaxSAT solver front end over python-sat, with competition-style output.

Lets the external-solver code path run without native binaries:

    TRIFLIP_SAT_CMD="python3 scripts/pysat_solver.py {cnf}"
    TRIFLIP_MAXSAT_CMD="python3 scripts/pysat_solver.py {wcnf}"
"""
import argparse
import sys

from pysat.examples.rc2 import RC2
from pysat.formula import CNF, WCNF
from pysat.solvers import Solver


def solve_cnf(path: str, name: str) -> None:
    f = CNF(from_file=path)
    with Solver(name=name, bootstrap_with=f.clauses) as s:
        if not s.solve():
            print("s UNSATISFIABLE")
            return
        model = s.get_model() or []
    seen = {abs(x) for x in model}
    model += [-v for v in range(1, f.nv + 1) if v not in seen]
    print("s SATISFIABLE")
    print("v " + " ".join(map(str, sorted(model, key=abs))) + " 0")


def solve_wcnf(path: str) -> None:
    f = WCNF(from_file=path)
    with RC2(f) as rc2:
        model = rc2.compute()
        if model is None:
            print("s UNSATISFIABLE")
            return
        cost = rc2.cost
    seen = {abs(x) for x in model}
    model += [-v for v in range(1, f.nv + 1) if v not in seen]
    print(f"o {cost}")
    print("s OPTIMUM FOUND")
    print("v " + " ".join(map(str, sorted(model, key=abs))))


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("formula")
    ap.add_argument("--solver", default="cadical153")
    args = ap.parse_args()
    if args.formula.endswith(".wcnf"):
        solve_wcnf(args.formula)
    else:
        solve_cnf(args.formula, args.solver)
    return 0


if __name__ == "__main__":
    sys.exit(main())
