#!/usr/bin/env python3
"""Error rate of the crossing-count bound ceil(log2 k) against exact b(s).

For each string length k, reports the fraction of crossing strings whose
exact rewriting bound exceeds the log bound and the largest gap seen. Short
lengths are enumerated exhaustively, longer ones sampled.
"""
import argparse
import json
import random
import time

from triflip.strings import all_strings, log_bound, rewrite_bound_exact


def measure(k: int, samples: int, rng: random.Random) -> dict:
    if 2 ** (k - 2) <= samples:
        strings = list(all_strings(k))
        mode = "all"
    else:
        strings = ["L" + "".join(rng.choice("UD") for _ in range(k - 2)) + "R" for _ in range(samples)]
        mode = "sampled"
    gaps = [rewrite_bound_exact(s) - log_bound(s) for s in strings]
    return {
        "length": k,
        "mode": mode,
        "strings": len(strings),
        "error_rate": sum(g > 0 for g in gaps) / len(gaps),
        "max_gap": max(gaps),
    }


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-len", type=int, default=16)
    ap.add_argument("--samples", type=int, default=4096)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", action="store_true", help="one JSON object per length")
    args = ap.parse_args()
    rng = random.Random(args.seed)
    t0 = time.time()
    if not args.json:
        print(f"{'k':>3} {'mode':>8} {'strings':>8} {'error rate':>11} {'max gap':>8}")
    for k in range(2, args.max_len + 1):
        row = measure(k, args.samples, rng)
        if args.json:
            print(json.dumps(row))
        else:
            print(f"{k:>3} {row['mode']:>8} {row['strings']:>8} {row['error_rate']:>11.4f} {row['max_gap']:>8}")
    if not args.json:
        print(f"# {time.time() - t0:.1f}s")


if __name__ == "__main__":
    main()
