"""Independent reference solvers used to check the DP.

None of these share code with the solver beyond the graph itself.  They
are exponential and only meant for small inputs.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations

from .model import CliqueCover, Instance, UnitBallGraph, build_graph, indices_of

BRUTE_FORCE_CAP = 20


def maximal_cliques_with(adj, v: int, within: int) -> list:
    """Maximal cliques of the graph induced on `within` that contain v (Bron-Kerbosch)."""
    out = []

    def bk(R, P, X):
        if not P and not X:
            out.append(R)
            return
        pivot_pool = P | X
        u = (pivot_pool & -pivot_pool).bit_length() - 1
        best = -1
        m = pivot_pool
        while m:
            low = m & -m
            w = low.bit_length() - 1
            c = bin(P & adj[w]).count("1")
            if c > best:
                best, u = c, w
            m ^= low
        rest = P & ~adj[u]
        while rest:
            low = rest & -rest
            w = low.bit_length() - 1
            bk(R | low, P & adj[w], X & adj[w])
            P &= ~low
            X |= low
            rest ^= low

    bk(1 << v, within & adj[v], 0)
    return out


def brute_force_min_cover(graph: UnitBallGraph, cap: int = BRUTE_FORCE_CAP):
    """Minimum clique partition by subset DP over the lowest uncovered vertex.

    Branching only on maximal cliques (within the remaining set) that hold
    the lowest vertex is enough: any optimal partition can grow the block of
    that vertex to a maximal one by stealing from the other blocks.
    """
    n = graph.n
    if n > cap:
        raise ValueError(f"brute force limited to {cap} vertices, got {n}")
    adj = graph.adj

    @lru_cache(maxsize=None)
    def best(S):
        if not S:
            return 0, ()
        v = (S & -S).bit_length() - 1
        top = None
        for D in maximal_cliques_with(adj, v, S):
            k, rest = best(S & ~D)
            if top is None or k + 1 < top[0]:
                top = (k + 1, (D,) + rest)
        return top

    k, blocks = best((1 << n) - 1)
    best.cache_clear()
    return k, CliqueCover.from_masks(blocks)


def greedy_upper_bound(graph: UnitBallGraph) -> int:
    """Repeatedly remove a maximal clique grown from the lowest vertex."""
    left = (1 << graph.n) - 1
    k = 0
    while left:
        v = (left & -left).bit_length() - 1
        D = 1 << v
        cand = left & graph.adj[v]
        while cand:
            low = cand & -cand
            D |= low
            cand &= graph.adj[low.bit_length() - 1]
            cand &= ~low
        left &= ~D
        k += 1
    return k


def _independent_lower_bound(adj, S: int) -> int:
    # Greedy independent set: each member needs its own clique.
    count = 0
    while S:
        v = (S & -S).bit_length() - 1
        S &= ~adj[v] & ~(1 << v)
        count += 1
    return count


def branch_and_bound_min_cover(graph: UnitBallGraph):
    """Depth-first search with an independent-set lower bound."""
    adj = graph.adj
    full = (1 << graph.n) - 1
    best = [graph.n + 1, None]

    def rec(S, chosen):
        if not S:
            if len(chosen) < best[0]:
                best[0], best[1] = len(chosen), list(chosen)
            return
        if len(chosen) + _independent_lower_bound(adj, S) >= best[0]:
            return
        v = (S & -S).bit_length() - 1
        for D in sorted(maximal_cliques_with(adj, v, S), key=lambda m: -bin(m).count("1")):
            chosen.append(D)
            rec(S & ~D, chosen)
            chosen.pop()

    rec(full, [])
    if best[1] is None:
        return 0, CliqueCover(())
    return best[0], CliqueCover.from_masks(best[1])


def enumerate_optimal_covers(graph: UnitBallGraph, limit: int = 10) -> list:
    """Every minimum clique partition (as canonical covers) of a graph with <= limit vertices."""
    n = graph.n
    if n > limit:
        raise ValueError(f"enumeration limited to {limit} vertices")
    k_opt, _ = brute_force_min_cover(graph)
    out = []

    def rec(S, blocks):
        if len(blocks) > k_opt:
            return
        if not S:
            if len(blocks) == k_opt:
                out.append(CliqueCover.from_masks(blocks).canonical())
            return
        v = (S & -S).bit_length() - 1
        rest = indices_of(S & graph.adj[v])
        for r in range(len(rest) + 1):
            for extra in combinations(rest, r):
                D = 1 << v
                for i in extra:
                    D |= 1 << i
                if graph.is_clique(D):
                    rec(S & ~D, blocks + [D])

    rec((1 << n) - 1, [])
    return sorted(set(out), key=lambda c: c.cliques)


def min_cover_size(inst: Instance, method: str = "brute") -> int:
    graph = build_graph(inst)
    if method == "brute":
        return brute_force_min_cover(graph)[0]
    if method == "bnb":
        return branch_and_bound_min_cover(graph)[0]
    raise ValueError(f"unknown oracle {method!r}")


def partition_oracle(adj, marked: int, k: int) -> bool:
    """Can the auxiliary graph be split into exactly k cliques, each holding a marked vertex?

    Plain enumeration of set partitions (restricted growth strings).
    """
    n = len(adj)
    labels = [0] * n

    def ok(nblocks):
        for b in range(nblocks):
            members = [i for i in range(n) if labels[i] == b]
            if not any(marked >> i & 1 for i in members):
                return False
            for i, j in combinations(members, 2):
                if not adj[i] >> j & 1:
                    return False
        return True

    def rec(i, nblocks):
        if nblocks > k:
            return False
        if i == n:
            return nblocks == k and ok(nblocks)
        for b in range(nblocks + 1):
            labels[i] = b
            if rec(i + 1, max(nblocks, b + 1)):
                return True
        return False

    if n == 0:
        return k == 0
    return rec(0, 0)


def pareto_oracle(adj, n_marked: int) -> set:
    """Pareto-minimal (F, k) over optional subsets F, by partition enumeration.

    Vertices below n_marked are marked and must be covered; F picks which of the
    remaining ones join; k is the fewest admissible blocks covering the result.
    Kept pairs are those where no larger F is reachable with k or fewer blocks.
    """
    n = len(adj)
    n_opt = n - n_marked
    best = {}
    for F in range(1 << n_opt):
        verts = list(range(n_marked)) + [n_marked + i for i in range(n_opt) if F >> i & 1]
        pos = {v: i for i, v in enumerate(verts)}
        sub = [sum(1 << pos[u] for u in verts if adj[v] >> u & 1) for v in verts]
        for k in range(len(verts) + 1):
            if partition_oracle(sub, (1 << n_marked) - 1, k):
                best[F] = k
                break
    return {
        (F, k)
        for F, k in best.items()
        if not any(F2 != F and F & ~F2 == 0 and k2 <= k for F2, k2 in best.items())
    }


def is_k_colorable(n: int, edges, k: int):
    """Backtracking k-coloring; returns a coloring list or None."""
    nbrs = [set() for _ in range(n)]
    for a, b in edges:
        nbrs[a].add(b)
        nbrs[b].add(a)
    order = sorted(range(n), key=lambda v: -len(nbrs[v]))
    color = [-1] * n

    def rec(pos):
        if pos == n:
            return True
        v = order[pos]
        used = {color[u] for u in nbrs[v]}
        for c in range(k):
            if c not in used:
                color[v] = c
                if rec(pos + 1):
                    return True
        color[v] = -1
        return False

    return list(color) if rec(0) else None


def truth_table_sat(clauses):
    """Satisfying assignment of a CNF over (name, positive) literals by enumeration, or None."""
    names = sorted({v for c in clauses for v, _ in c})
    for bits in range(1 << len(names)):
        assign = {v: bool(bits >> i & 1) for i, v in enumerate(names)}
        if all(any(assign[v] == pos for v, pos in c) for c in clauses):
            return assign
    return None
