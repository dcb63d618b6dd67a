#!/usr/bin/env python3
"""Compare the path heuristics against exact flip distances on random pairs.

Both triangulations of a pair are random unit-flip walks from the Delaunay
triangulation of a random point set. Exact distances come from SAT.
"""
import argparse
import time
from collections import Counter

from triflip.bounds import pairwise_distance
from triflip.heuristics import best_heuristic_path, greedy_parallel_path, squeaky_wheel_path
from triflip.instance import generate_random_instance


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=12, help="points per instance")
    ap.add_argument("--k", type=int, default=15, help="random flips per triangulation")
    ap.add_argument("--pairs", type=int, default=30)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    runs = {
        "greedy-fwd": lambda a, b: greedy_parallel_path(a, b),
        "greedy-bwd": lambda a, b: greedy_parallel_path(b, a),
        "squeaky-fwd": lambda a, b: squeaky_wheel_path(a, b),
        "squeaky-bwd": lambda a, b: squeaky_wheel_path(b, a),
        "best": best_heuristic_path,
    }
    gaps = {name: Counter() for name in runs}
    t0 = time.time()
    inexact = 0
    for i in range(args.pairs):
        inst = generate_random_instance(args.n, 2, args.k, args.seed * 100_003 + i)
        a, b = inst.inputs
        d = pairwise_distance(a, b)
        inexact += not d.exact
        for name, fn in runs.items():
            gaps[name][len(fn(a, b)) - d.length] += 1
    print(f"{args.pairs} pairs, n={args.n}, k={args.k}, {time.time() - t0:.1f}s, inexact={inexact}")
    width = max(max(g) for g in gaps.values()) + 1
    print(f"{'run':<12}" + "".join(f"{'+' + str(g):>6}" for g in range(width)) + f"{'<=+1':>8}")
    for name, c in gaps.items():
        within = (c[0] + c[1]) / args.pairs
        print(f"{name:<12}" + "".join(f"{c[g]:>6}" for g in range(width)) + f"{within:>8.2f}")


if __name__ == "__main__":
    main()
