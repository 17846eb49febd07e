"""Weighted width and solve time against n at a fixed average degree.

    python scripts/bench_scaling.py --sizes 100,400,1600 --degree 10 --out widths.csv
"""

import argparse
import csv
import math
import sys
import time

from diamcover.cli import box_for_degree
from diamcover.decomposition import WeightFunction, build_kappa_partition, contraction_graph, tree_decomposition, weighted_width
from diamcover.model import build_graph, gen_random
from diamcover.solver import solve


def measure(n, degree, seed, with_solve):
    inst = gen_random(n, box_for_degree(n, degree), 1, seed)
    gamma = WeightFunction()
    t0 = time.perf_counter()
    g = build_graph(inst)
    cg = contraction_graph(build_kappa_partition(inst), g)
    width = weighted_width(tree_decomposition(cg, gamma), cg.sizes, gamma)
    t_dec = time.perf_counter() - t0
    k, t_solve = "", ""
    if with_solve:
        t0 = time.perf_counter()
        k = solve(inst, gamma=gamma).k
        t_solve = round(time.perf_counter() - t0, 3)
    return {
        "n": n,
        "seed": seed,
        "degree": round(2 * len(g.edges()) / max(n, 1), 2),
        "classes": cg.n,
        "width": round(width, 3),
        "width_over_sqrt_n": round(width / math.sqrt(n), 4),
        "decompose_s": round(t_dec, 3),
        "k": k,
        "solve_s": t_solve,
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="100,400,1600")
    ap.add_argument("--degree", type=float, default=10.0)
    ap.add_argument("--seeds", type=int, default=3)
    ap.add_argument("--solve", action="store_true", help="also run the DP (slow for large n)")
    ap.add_argument("--out", default="-")
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    rows = [measure(n, args.degree, s, args.solve) for n in sizes for s in range(args.seeds)]
    out = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    w = csv.DictWriter(out, fieldnames=list(rows[0]))
    w.writeheader()
    w.writerows(rows)
    if out is not sys.stdout:
        out.close()
    mean = {n: sum(r["width"] for r in rows if r["n"] == n) / args.seeds for n in sizes}
    print(f"w({sizes[-1]})/w({sizes[0]}) = {mean[sizes[-1]] / mean[sizes[0]]:.2f}", file=sys.stderr)


if __name__ == "__main__":
    main()
