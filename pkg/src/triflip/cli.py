"""Command-line interface: ``triflip <subcommand> ...``.

Results are printed as JSON on stdout. Failures print ``{"error": ...}``
and exit non-zero; a failed verification exits with status 2.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .bounds import BoundTable, distance_matrix, pairwise_distance, precompute_bound_table, proven_lower_bound
from .cnf import EncodeOptions
from .instance import (
    FormatError,
    export_svg,
    generate_random_instance,
    parse_instance,
    parse_solution,
    serialize_instance,
    serialize_solution,
    verify_solution,
)
from .pipeline import OPTIMAL, Budget, Progress, exact_solve, improve_loop, solve, trim_improve
from .sat import SolverConfig


class CliError(Exception):
    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


def _read(path: str) -> str:
    if not Path(path).exists():
        raise CliError("missing-file", f"no such file: {path}")
    return Path(path).read_text()


def _write(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _emit(obj) -> None:
    print(json.dumps(obj, sort_keys=True))


def _opts(args) -> EncodeOptions:
    table = BoundTable.load(args.bound_table) if args.bound_table else None
    return EncodeOptions(
        happy_edges=args.happy,
        insertion_bound="string" if args.string_bound else "log2",
        table=table,
    )


def _cfg(args) -> SolverConfig:
    return SolverConfig.from_env(
        sat_cmd=args.sat_cmd,
        maxsat_cmd=args.maxsat_cmd,
        workdir=args.keep_cnf,
        keep_files=bool(args.keep_cnf),
    )


def _progress(args) -> Progress:
    return Progress(sys.stderr if args.progress else None)


def _jobs(args) -> int:
    return args.jobs if args.jobs else (os.cpu_count() or 1)


def _load_instance(path: str):
    try:
        return parse_instance(_read(path))
    except FormatError as e:
        raise CliError("bad-instance", str(e))


def _load_solution(path: str, inst):
    try:
        return parse_solution(_read(path), inst)
    except FormatError as e:
        raise CliError("bad-solution", str(e))


def cmd_solve(args) -> int:
    inst = _load_instance(args.instance)
    sol, lb = solve(
        inst, args.time_limit, args.seed, args.proximity_k, _opts(args), _cfg(args), _jobs(args), _progress(args)
    )
    if args.trim_r:
        sol = trim_improve(inst, sol, args.trim_r, _opts(args), _cfg(args), Budget(args.time_limit))
    if args.output:
        _write(serialize_solution(sol), args.output)
    _emit({"objective": sol.objective, "lower_bound": lb, "optimal": sol.objective == lb})
    return 0


def cmd_exact(args) -> int:
    inst = _load_instance(args.instance)
    res = exact_solve(
        inst,
        Budget(args.time_limit),
        _opts(args),
        _cfg(args),
        _jobs(args),
        _progress(args),
        heuristic_shortcut=not args.confirm,
    )
    if args.output:
        _write(serialize_solution(res.solution), args.output)
    _emit(
        {
            "objective": res.solution.objective,
            "lower_bound": res.lower_bound,
            "optimal": res.status == OPTIMAL,
            "status": res.status,
        }
    )
    return 0


def cmd_verify(args) -> int:
    inst = _load_instance(args.instance)
    sol = _load_solution(args.solution, inst)
    rep = verify_solution(inst, sol, strict=not args.lenient)
    _emit({"valid": rep.valid, "objective": rep.objective, "first_violation": rep.first_violation})
    return 0 if rep.valid else 2


def _flips_json(path):
    return [{"remove": sorted(map(list, pf.removed)), "add": sorted(map(list, pf.added))} for pf in path.flips]


def cmd_distance(args) -> int:
    inst = _load_instance(args.instance)
    m = len(inst.inputs)
    if not (0 <= args.source < m and 0 <= args.target < m):
        raise CliError("bad-argument", f"triangulation index out of range 0..{m - 1}")
    d = pairwise_distance(inst.inputs[args.source], inst.inputs[args.target], _opts(args), _cfg(args))
    _emit({"distance": d.length, "exact": d.exact, "lower_bound": d.lower, "flips": _flips_json(d.path)})
    return 0


def cmd_lb(args) -> int:
    inst = _load_instance(args.instance)
    D = distance_matrix(inst.inputs, _opts(args), _cfg(args), _jobs(args))
    _emit({"lower_bound": proven_lower_bound(D), "distances": D.values, "exact": D.exact})
    return 0


def cmd_improve(args) -> int:
    inst = _load_instance(args.instance)
    sol = _load_solution(args.solution, inst)
    rep = verify_solution(inst, sol)
    if not rep.valid:
        _emit({"error": "invalid-solution", "message": rep.first_violation})
        return 2
    before = sol.objective
    budget = Budget(args.time_limit)
    sol = improve_loop(inst, sol, args.seed, args.proximity_k, _opts(args), _cfg(args), budget, _progress(args))
    if args.trim_r:
        sol = trim_improve(inst, sol, args.trim_r, _opts(args), _cfg(args), budget, _progress(args))
    if args.output:
        _write(serialize_solution(sol), args.output)
    _emit({"objective": sol.objective, "previous_objective": before})
    return 0


def cmd_gen(args) -> int:
    inst = generate_random_instance(args.n, args.m, args.k, args.seed)
    _write(serialize_instance(inst), args.output)
    return 0


def cmd_svg(args) -> int:
    inst = _load_instance(args.instance)
    if args.solution:
        sol = _load_solution(args.solution, inst)
        if not verify_solution(inst, sol).valid:
            raise CliError("invalid-solution", "solution does not verify")
        T = sol.paths[0].end
    else:
        t = args.triangulation or 0
        if not 0 <= t < len(inst.inputs):
            raise CliError("bad-argument", f"triangulation index {t} out of range")
        T = inst.inputs[t]
    _write(export_svg(T), args.output)
    return 0


def cmd_bound_table(args) -> int:
    table = precompute_bound_table(args.max_len)
    if args.output:
        table.store(args.output)
    _emit({"entries": len(table), "max_len": args.max_len})
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="triflip", description="Parallel flip reconfiguration of triangulations.")
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--time-limit", type=float, default=None, help="wall-clock seconds")
    common.add_argument("--jobs", type=int, default=None, help="worker processes (default: CPU count)")
    common.add_argument("--sat-cmd", default=None, help='external SAT solver, e.g. "cadical {cnf}"')
    common.add_argument("--maxsat-cmd", default=None, help='external MaxSAT solver, e.g. "solver {wcnf}"')
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--happy", action="store_true", help="fix edges common to all inputs")
    common.add_argument("--string-bound", action="store_true", help="eliminate with the rewriting bound")
    common.add_argument("--bound-table", default=None, help="precomputed bound table file")
    common.add_argument("--proximity-k", type=int, default=None)
    common.add_argument("--trim-r", type=int, default=None)
    common.add_argument("--keep-cnf", default=None, metavar="DIR", help="keep formula files in DIR")
    common.add_argument("--progress", action="store_true", help="JSON-lines progress on stderr")
    common.add_argument("-o", "--output", default=None)

    s = sub.add_parser("solve", parents=[common], help="heuristic solution plus SAT improvement")
    s.add_argument("instance")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("exact", parents=[common], help="provably optimal solution")
    s.add_argument("instance")
    s.add_argument("--confirm", action="store_true", help="prove the optimum with SAT even if a heuristic meets the bound")
    s.set_defaults(func=cmd_exact)

    s = sub.add_parser("verify", parents=[common], help="check a solution")
    s.add_argument("instance")
    s.add_argument("solution")
    s.add_argument("--lenient", action="store_true", help="allow empty flips")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("distance", parents=[common], help="flip distance between two inputs")
    s.add_argument("instance")
    s.add_argument("--from", dest="source", type=int, required=True)
    s.add_argument("--to", dest="target", type=int, required=True)
    s.set_defaults(func=cmd_distance)

    s = sub.add_parser("lb", parents=[common], help="cycle packing lower bound")
    s.add_argument("instance")
    s.set_defaults(func=cmd_lb)

    s = sub.add_parser("improve", parents=[common], help="improve an existing solution")
    s.add_argument("instance")
    s.add_argument("solution")
    s.set_defaults(func=cmd_improve)

    s = sub.add_parser("gen", parents=[common], help="random instance")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("svg", parents=[common], help="draw a triangulation")
    s.add_argument("instance")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--triangulation", type=int, default=None)
    g.add_argument("--solution", default=None)
    s.add_argument("--center", action="store_true", help="draw the solution center (default with --solution)")
    s.set_defaults(func=cmd_svg)

    s = sub.add_parser("bound-table", parents=[common], help="precompute rewriting bounds")
    s.add_argument("--max-len", type=int, required=True)
    s.set_defaults(func=cmd_bound_table)
    return p


def _validate(args) -> None:
    for name in ("time_limit", "jobs", "proximity_k", "trim_r"):
        v = getattr(args, name, None)
        if v is not None and v < 0:
            raise CliError("bad-argument", f"--{name.replace('_', '-')} must be non-negative")
    if args.trim_r is not None and args.trim_r < 1:
        raise CliError("bad-argument", "--trim-r must be at least 1")
    if args.bound_table and not Path(args.bound_table).exists():
        raise CliError("missing-file", f"no such file: {args.bound_table}")


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _validate(args)
        return args.func(args)
    except CliError as e:
        _emit({"error": e.kind, "message": str(e)})
        return 1
    except (ValueError, RuntimeError) as e:
        _emit({"error": type(e).__name__, "message": str(e)})
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
