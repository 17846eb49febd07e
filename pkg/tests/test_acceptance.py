"""Acceptance criteria 1-8, one PASS/FAIL line each.

Run with ``pytest -s tests/test_acceptance.py`` to see the lines, or
``python tests/test_acceptance.py`` for the lines alone.
"""

import math
import random
import time
from itertools import combinations

import networkx as nx
import pytest

from diamcover.cli import box_for_degree
from diamcover.cliques import is_separated, relevant_cliques
from diamcover.decomposition import (
    WeightFunction,
    build_kappa_partition,
    contraction_graph,
    single_bag_decomposition,
    to_nice,
    tree_decomposition,
    weighted_width,
)
from diamcover.model import build_graph, gen_random
from diamcover.oracles import (
    branch_and_bound_min_cover,
    brute_force_min_cover,
    enumerate_optimal_covers,
    is_k_colorable,
    pareto_oracle,
    partition_oracle,
)
from diamcover.reductions import sat
from diamcover.reductions.coloring import build_r5_instance
from diamcover.solver import dp_solve, forget_feasible, frontier_outcomes

# Pinned tolerances
C1_INSTANCES, C1_BUDGET_S = 300, 15 * 60
C2_INSTANCES = 100
C4_RUNS, C4_MAX_VERTICES = 50, 8
C5_RANDOM, C5_PRECISION_CAP, C5_TOL, C5_FLOOR = 20, 4096, 1e-6, 2.049
C7_SIZES, C7_DEGREE, C7_RATIO = (100, 400, 1600), 10, 3 * math.sqrt(16)
C8_INSTANCES = 30

BOXES = (3, 5, 8)


def report(num, ok, detail):
    line = f"criterion {num}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(line, flush=True)
    return ok


def criterion_1():
    t0 = time.perf_counter()
    mismatches = []
    for i in range(C1_INSTANCES):
        n, box = 1 + i % 14, BOXES[(i // 14) % 3]
        inst = gen_random(n, box, 2, seed=1000 + i)
        want, _ = brute_force_min_cover(build_graph(inst))
        got = dp_solve(inst).k
        if got != want:
            mismatches.append((i, got, want))
    elapsed = time.perf_counter() - t0
    ok = not mismatches and elapsed <= C1_BUDGET_S
    return report(1, ok, f"{C1_INSTANCES} instances, {len(mismatches)} mismatches, {elapsed:.1f}s")


def _separation_instances():
    for i in range(C2_INSTANCES):
        yield gen_random(1 + i % 10, (2, 3, 5)[i % 3], 2, seed=2000 + i)


def criterion_2():
    failures = 0
    for inst in _separation_instances():
        covers = enumerate_optimal_covers(build_graph(inst))
        if not any(is_separated(inst, c) for c in covers):
            failures += 1
    return report(2, failures == 0, f"{C2_INSTANCES} instances, {failures} without a separated optimum")


def criterion_3():
    misses = checked = 0
    for inst in _separation_instances():
        g = build_graph(inst)
        part = build_kappa_partition(inst)
        covers = [c for c in enumerate_optimal_covers(g) if is_separated(inst, c)]
        for S in part.classes:
            rel = relevant_cliques(inst, S, h=3, graph=g)
            for cover in covers:
                for c in cover.cliques:
                    r = tuple(sorted(set(c) & set(S)))
                    if r:
                        checked += 1
                        misses += r not in rel
    return report(3, misses == 0, f"{checked} restrictions checked, {misses} misses")


def criterion_4():
    graphs = set()
    for i in range(C4_RUNS):
        rec = []
        dp_solve(gen_random(6 + i % 9, (3, 4, 5)[i % 3], 2, seed=4000 + i), recorder=rec)
        graphs.update((tuple(adj), marked) for adj, marked in rec if len(adj) <= C4_MAX_VERTICES)
    bad = 0
    for adj, marked in graphs:
        adj = list(adj)
        for k in range(len(adj) + 1):
            bad += forget_feasible(adj, marked, k) != partition_oracle(adj, marked, k)
        # marked vertices come first in the recorded graphs
        n_marked = marked.bit_length()
        if marked == (1 << n_marked) - 1:
            got = {(F, k) for F, k, _ in frontier_outcomes(adj, n_marked)}
            bad += got != pareto_oracle(adj, n_marked)
    ok = bad == 0 and len(graphs) > 0
    return report(4, ok, f"{len(graphs)} distinct auxiliary graphs, {bad} disagreements")


def _complement_edges(g):
    return [(a, b) for a, b in combinations(range(g.n), 2) if not g.adjacent(a, b)]


def criterion_5():
    # Graph atlas indices 1..52 are every isomorphism class on 1..5 vertices.
    graphs = [(g.number_of_nodes(), list(g.edges())) for g in nx.graph_atlas_g()[1:53]]
    rng = random.Random(5)
    for _ in range(C5_RANDOM):
        graphs.append((5, [e for e in combinations(range(5), 2) if rng.random() < 0.5]))
    failures = []
    c1c2 = None
    for n, edges in graphs:
        r5 = build_r5_instance(n, edges, precision_cap=C5_PRECISION_CAP)
        g = build_graph(r5.instance)
        colorable = is_k_colorable(n, edges, 3) is not None
        covered = is_k_colorable(g.n, _complement_edges(g), 3) is not None
        if not r5.certificate.accepted or colorable != covered:
            failures.append((n, edges))
        lo, hi = (float(x) for x in r5.certificate.c1c2)
        expect = 2 * math.sqrt(3) - math.sqrt(2) + 2 * float(r5.params.eps)
        if abs(lo - expect) > C5_TOL or abs(hi - expect) > C5_TOL or lo <= C5_FLOOR:
            failures.append(("c1c2", n, edges, lo, hi))
        c1c2 = (lo, hi)
    detail = f"{len(graphs)} graphs, {len(failures)} failures, |c1-c2| in [{c1c2[0]:.9f}, {c1c2[1]:.9f}]"
    return report(5, not failures, detail)


def criterion_6():
    from importlib.resources import files

    data = files("diamcover.data")
    lines, ok = [], True
    for name, satisfiable in (("phi_s", True), ("phi_u", False)):
        formula = data.joinpath(f"{name}.json").read_text()
        emb = data.joinpath(f"{name}_embedding.json").read_text()
        si = sat.generate(formula, emb)
        k, _ = branch_and_bound_min_cover(build_graph(si.instance))
        ok &= k >= si.k
        ok &= (k == si.k) if satisfiable else (k > si.k)
        lines.append(f"{name}: cover {k} vs n + L/2 = {si.k}")
    return report(6, ok, "; ".join(lines))


def criterion_7():
    gamma = WeightFunction()
    widths, degrees = [], []
    for n in C7_SIZES:
        inst = gen_random(n, box_for_degree(n, C7_DEGREE), 1, seed=7)
        g = build_graph(inst)
        degrees.append(2 * len(g.edges()) / n)
        cg = contraction_graph(build_kappa_partition(inst), g)
        widths.append(weighted_width(tree_decomposition(cg, gamma), cg.sizes, gamma))
    ratio = widths[-1] / widths[0]
    detail = ", ".join(f"w({n})={w:.2f} deg={d:.1f}" for n, w, d in zip(C7_SIZES, widths, degrees))
    return report(7, ratio <= C7_RATIO, f"{detail}; ratio {ratio:.2f} <= {C7_RATIO:g}")


def criterion_8():
    mismatches = 0
    for i in range(C8_INSTANCES):
        inst = gen_random(1 + i % 12, BOXES[i % 3], 2, seed=8000 + i)
        g = build_graph(inst)
        part = build_kappa_partition(inst)
        trivial = to_nice(single_bag_decomposition(contraction_graph(part, g)))
        mismatches += dp_solve(inst, trivial, graph=g, partition=part).k != dp_solve(inst).k
    return report(8, mismatches == 0, f"{C8_INSTANCES} instances, {mismatches} mismatches")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8]


@pytest.mark.parametrize("criterion", CRITERIA, ids=[f"criterion_{i}" for i in range(1, 9)])
def test_criterion(criterion, capsys):
    with capsys.disabled():
        assert criterion()


if __name__ == "__main__":
    results = [c() for c in CRITERIA]
    print(f"{sum(results)}/{len(results)} criteria pass")
