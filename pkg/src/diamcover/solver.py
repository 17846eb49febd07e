"""Configuration dynamic program over a nice tree decomposition.

Every partition class P is described by a configuration: a tiling of P by
at most ``lam`` relevant cliques together with one "already covered" flag
per tile.  A table entry at node t maps an assignment of configurations to
the bag's classes, plus a clique count l, to a witness.  The entry exists
iff some l cliques cover every vertex strictly below t, cover every
flagged tile, and each contain a vertex strictly below t.

Vertex sets are int bitmasks throughout.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from itertools import combinations

from .cliques import relevant_cliques
from .decomposition import (
    FORGET,
    INTRODUCE,
    JOIN,
    LEAF,
    ContractionGraph,
    KappaPartition,
    TreeDecomposition,
    WeightFunction,
    build_kappa_partition,
    contraction_graph,
    to_nice,
    tree_decomposition,
    weighted_width,
)
from .model import CliqueCover, Instance, UnitBallGraph, build_graph, verify_cover

log = logging.getLogger(__name__)

DEFAULT_LAMBDA = 12
DEFAULT_HALFPLANES = 2


class EmptyConfigurations(RuntimeError):
    """Some class admits no tiling by <= lam relevant cliques."""

    def __init__(self, cls_index, lam, h):
        super().__init__(f"class {cls_index} has no tiling with lambda={lam}, h={h}")
        self.cls_index = cls_index


class EscalationCapReached(RuntimeError):
    pass


@dataclass(frozen=True)
class Configuration:
    tiling: tuple  # clique masks, ordered by lowest vertex
    chi: tuple  # 0/1 per tile

    def covered(self):
        return [c for c, x in zip(self.tiling, self.chi) if x]


def exact_tilings(P: int, members, lam: int) -> list:
    """All ways to write P as a disjoint union of <= lam masks from `members`.

    Branches on the lowest uncovered vertex, so each tiling is produced
    exactly once, tiles ordered by their lowest vertex.
    """
    by_low: dict = {}
    for m in set(members):
        if m and m & ~P == 0:
            by_low.setdefault(m & -m, []).append(m)
    for lst in by_low.values():
        lst.sort()
    out = []

    def rec(rest, chosen):
        if not rest:
            out.append(tuple(chosen))
            return
        if len(chosen) == lam:
            return
        for m in by_low.get(rest & -rest, ()):
            if m & ~rest == 0:
                chosen.append(m)
                rec(rest & ~m, chosen)
                chosen.pop()

    rec(P, [])
    return out


def enumerate_configurations(P, relevant, lam: int) -> list:
    """Tilings of P by <= lam members of `relevant`, each with every flag vector."""
    P = P if isinstance(P, int) else sum(1 << v for v in P)
    masks = [m if isinstance(m, int) else sum(1 << v for v in m) for m in relevant]
    out = []
    for tiling in exact_tilings(P, masks, lam):
        for flags in range(1 << len(tiling)):
            out.append(Configuration(tiling, tuple(flags >> j & 1 for j in range(len(tiling)))))
    return out


# -- forget-node inner dynamic program --------------------------------------


def admissible_cover_table(adj, marked: int):
    """Subset DP d[S] over an auxiliary graph.

    ``adj[i]`` is the neighbour bitmask of vertex i, ``marked`` a bitmask.
    Returns a function S -> {k: first clique} listing every k for which H[S]
    has a clique cover of size k whose cliques all contain a marked vertex.
    """
    n = len(adj)
    cliques_at = [[] for _ in range(n)]  # cliques whose lowest vertex is i
    for i in range(n):
        stack = [(1 << i, adj[i] & ~((1 << (i + 1)) - 1))]
        while stack:
            clique, cand = stack.pop()
            if clique & marked:
                cliques_at[i].append(clique)
            while cand:
                low = cand & -cand
                j = low.bit_length() - 1
                cand ^= low
                stack.append((clique | low, cand & adj[j]))
    memo = {0: {0: 0}}

    def d(S):
        hit = memo.get(S)
        if hit is not None:
            return hit
        res = {}
        low = S & -S
        # Every vertex of S is at least v, so the clique holding v starts at v.
        for D in cliques_at[low.bit_length() - 1]:
            if D & ~S == 0:
                for k in d(S & ~D):
                    if k + 1 not in res:
                        res[k + 1] = D
        memo[S] = res
        return res

    return d


def forget_feasible(adj, marked: int, k: int) -> bool:
    """Does the whole auxiliary graph have an admissible clique cover of size k?"""
    full = (1 << len(adj)) - 1
    return k in admissible_cover_table(adj, marked)(full)


def admissible_partition(adj, marked: int, k: int):
    """One admissible cover of size k as a list of vertex bitmasks, or None."""
    d = admissible_cover_table(adj, marked)
    S = (1 << len(adj)) - 1
    if k not in d(S):
        return None
    out = []
    while S:
        D = d(S)[k]
        out.append(D)
        S &= ~D
        k -= 1
    return out


# -- the main dynamic program --------------------------------------------


@dataclass
class SolveStats:
    nodes: int = 0
    bags: int = 0
    max_bag: int = 0
    weighted_width: float = 0.0
    max_configurations: int = 0
    max_table: int = 0
    escalations: int = 0
    wall_time: float = 0.0

    def as_dict(self):
        return dict(self.__dict__)


@dataclass
class DPResult:
    feasible: list  # sorted clique counts l with c_root[empty, l] true
    cover: CliqueCover | None
    stats: SolveStats = field(default_factory=SolveStats)
    lam: int = DEFAULT_LAMBDA
    h: int = DEFAULT_HALFPLANES

    @property
    def k(self):
        return self.feasible[0] if self.feasible else None


class _Context:
    def __init__(self, inst, graph, partition, lam, h, relevant=None, recorder=None):
        self.graph = graph
        self.partition = partition
        self.recorder = recorder
        self.class_mask = [sum(1 << v for v in cls) for cls in partition.classes]
        self.tilings = []
        for p, cls in enumerate(partition.classes):
            rel = relevant[p] if relevant is not None else relevant_cliques(inst, cls, h, graph).masks()
            tl = exact_tilings(self.class_mask[p], rel, lam)
            if not tl:
                raise EmptyConfigurations(p, lam, h)
            self.tilings.append(tl)
        self._clique_cache = {}
        self._table_cache = {}
        self._options_cache = {}
        self._frontier_cache = {}
        self._shape_cache = {}
        self._compat_cache = {}

    def is_clique(self, m):
        hit = self._clique_cache.get(m)
        if hit is None:
            hit = self._clique_cache[m] = self.graph.is_clique(m)
        return hit

    def compatible(self, c, U):
        key = (c, U)
        hit = self._compat_cache.get(key)
        if hit is None:
            hit = self._compat_cache[key] = any(self.is_clique(c | u) for u in U)
        return hit

    def forget_options(self, U, cand):
        """Auxiliary-graph table plus every feasible flip set F with its clique counts."""
        key = (U, cand)
        hit = self._options_cache.get(key)
        if hit is None:
            d = self.cover_table(U, cand)
            base = (1 << len(U)) - 1
            options = []
            for F in range(1 << len(cand)):
                ks = d(base | (F << len(U)))
                if ks:
                    options.append((F, tuple(ks)))
            hit = self._options_cache[key] = (d, options)
        return hit

    def frontier(self, U, cand):
        key = (U, cand)
        hit = self._frontier_cache.get(key)
        if hit is None:
            verts = U + cand
            adj = tuple(self.aux_graph(verts))
            if self.recorder is not None:
                self.recorder.append((adj, (1 << len(U)) - 1))
            # The outcome depends only on the graph structure, which repeats a lot.
            shape = self._shape_cache.get((adj, len(U)))
            if shape is None:
                shape = self._shape_cache[(adj, len(U))] = frontier_outcomes(adj, len(U))
            hit = []
            for F, k, blocks in shape:
                groups = tuple(sum_masks(verts[i] for i in indices(b)) for b in blocks)
                hit.append((F, k, groups))
            self._frontier_cache[key] = hit
        return hit

    def aux_graph(self, verts):
        adj = [0] * len(verts)
        for a, b in combinations(range(len(verts)), 2):
            if self.is_clique(verts[a] | verts[b]):
                adj[a] |= 1 << b
                adj[b] |= 1 << a
        return adj

    def cover_table(self, U, cand):
        key = (U, cand)
        hit = self._table_cache.get(key)
        if hit is None:
            verts = list(U) + list(cand)
            adj = [0] * len(verts)
            for a, b in combinations(range(len(verts)), 2):
                if self.is_clique(verts[a] | verts[b]):
                    adj[a] |= 1 << b
                    adj[b] |= 1 << a
            marked = (1 << len(U)) - 1
            if self.recorder is not None:
                self.recorder.append((tuple(adj), marked))
            hit = self._table_cache[key] = admissible_cover_table(adj, marked)
        return hit


def _put(table, f, ell, witness, full):
    entry = table.get(f)
    if entry is None:
        table[f] = {ell: witness}
    elif full:
        entry.setdefault(ell, witness)
    else:
        best = next(iter(entry))
        if ell < best:
            table[f] = {ell: witness}


def dp_solve(
    inst: Instance,
    nice: TreeDecomposition | None = None,
    lam: int = DEFAULT_LAMBDA,
    h: int = DEFAULT_HALFPLANES,
    *,
    graph: UnitBallGraph | None = None,
    partition: KappaPartition | None = None,
    full_table: bool = False,
    relevant=None,
    recorder: list | None = None,
    gamma: WeightFunction | None = None,
) -> DPResult:
    """Minimum clique cover via the configuration DP.

    With ``full_table`` every feasible l is kept per assignment and forget
    nodes run the plain subset recurrence over every flip set.  Otherwise
    only the smallest l is kept, forget nodes emit only flip sets not
    dominated by a larger one with no more cliques, and an assignment is
    dropped when another with the same tilings, a superset of covered
    flags and no larger l exists.  Covering a tile early never hurts later
    (a later clique can simply skip it), so the root minimum is the same.
    ``recorder``, when given, collects every auxiliary forget-node graph as
    (adjacency, marked).
    """
    start = time.perf_counter()
    gamma = gamma or WeightFunction()
    graph = graph or build_graph(inst)
    partition = partition or build_kappa_partition(inst)
    cg = None
    if nice is None:
        cg = contraction_graph(partition, graph)
        nice = to_nice(tree_decomposition(cg, gamma))
    ctx = _Context(inst, graph, partition, lam, h, relevant, recorder)
    stats = SolveStats(nodes=nice.size, bags=nice.size, max_bag=nice.max_bag())
    stats.max_configurations = max((sum(1 << len(t) for t in tl) for tl in ctx.tilings), default=0)
    if cg is not None:
        stats.weighted_width = weighted_width(nice, cg.sizes, gamma)
    else:
        sizes = [len(c) for c in partition.classes]
        stats.weighted_width = weighted_width(nice, sizes, gamma)

    tables = {}
    order = {t: sorted(nice.bags[t]) for t in range(nice.size)}
    for t in nice.postorder():
        tag = nice.tags[t]
        kids = nice.children[t]
        if tag == LEAF:
            table = {(): {0: None}}
        elif tag == INTRODUCE:
            table = _introduce(ctx, tables.pop(kids[0]), order[t], nice.vertex[t], full_table)
        elif tag == FORGET:
            table = _forget(ctx, tables.pop(kids[0]), order[kids[0]], nice.vertex[t], full_table)
        elif tag == JOIN:
            table = _join(tables.pop(kids[0]), tables.pop(kids[1]), full_table)
        else:
            raise ValueError(f"node {t} is not tagged")
        stats.max_table = max(stats.max_table, len(table))
        tables[t] = table
    root = tables[nice.root]
    entry = root.get((), {})
    feasible = sorted(entry)
    cover = None
    if feasible:
        cover = _reconstruct(entry[feasible[0]], inst.n)
        report = verify_cover(inst, cover)
        assert report.ok, report.describe()
        assert len(cover) == feasible[0]
    stats.wall_time = time.perf_counter() - start
    return DPResult(feasible, cover, stats, lam, h)


def _introduce(ctx, child, bag, p, full):
    pos = bag.index(p)
    table = {}
    options = [(ti, 0) for ti in range(len(ctx.tilings[p]))]
    for f, ells in child.items():
        for opt in options:
            g = f[:pos] + (opt,) + f[pos:]
            for ell, w in ells.items():
                _put(table, g, ell, w, full)
    return table


def _forget(ctx, child, child_bag, p, full):
    pos = child_bag.index(p)
    others = [c for c in child_bag if c != p]
    table = {}
    for f, ells in child.items():
        ti, chi = f[pos]
        tiling = ctx.tilings[p][ti]
        U = tuple(c for j, c in enumerate(tiling) if not chi >> j & 1)
        rest = f[:pos] + f[pos + 1 :]
        if not U:
            for ell, w in ells.items():
                _put(table, rest, ell, w, full)
            continue
        # Uncovered tiles of the remaining bag classes that could share a clique with P.
        cand, where = [], []
        for q, (tq, cq) in enumerate(rest):
            for j, c in enumerate(ctx.tilings[others[q]][tq]):
                if not cq >> j & 1 and ctx.compatible(c, U):
                    cand.append(c)
                    where.append((q, 1 << j))
        cand = tuple(cand)
        if full:
            d, options = ctx.forget_options(U, cand)
            outcomes = [(F, k, ("F", d, U + cand, (1 << len(U)) - 1 | F << len(U), k)) for F, ks in options for k in ks]
        else:
            outcomes = ctx.frontier(U, cand)
        for F, k, groups in outcomes:
            g = list(rest)
            b = 0
            while F >> b:
                if F >> b & 1:
                    q, bit = where[b]
                    g[q] = (g[q][0], g[q][1] | bit)
                b += 1
            g = tuple(g)
            for ell, w in ells.items():
                _put(table, g, ell + k, (groups, w), full)
    if not full:
        table = _prune(table)
    return table


def frontier_outcomes(adj, n_marked: int):
    """Pareto-maximal (F, k, blocks) for an auxiliary graph.

    Vertices 0..n_marked-1 are the marked tiles and must all be covered;
    the rest are optional.  F is the bitmask (over optional vertices) of
    those covered, k the fewest cliques achieving it, blocks the cliques.
    An outcome is dropped when another covers a superset with no more
    cliques.
    """
    n = len(adj)
    marked = (1 << n_marked) - 1
    memo = {}
    cliques_in = {}

    def dmin(S):
        # Fewest admissible cliques partitioning S, with the first block.
        hit = memo.get(S)
        if hit is not None:
            return hit
        if not S & marked:
            hit = (0, 0) if not S else (None, 0)
            memo[S] = hit
            return hit
        low = S & -S
        v = low.bit_length() - 1
        best = (None, 0)
        pool = S & marked & adj[v]
        # The optional part of v's block may be taken maximal: any optional
        # vertex it could absorb can leave its own block without emptying it of marked ones.
        for A in _submasks(pool):
            block = low | A
            if not _is_clique(adj, A):
                continue
            common = S & ~marked
            for i in indices(block):
                common &= adj[i]
            options = cliques_in.get(common)
            if options is None:
                options = cliques_in[common] = maximal_cliques_with_any(adj, common)
            for X in options:
                k, _ = dmin(S & ~(block | X))
                if k is not None and (best[0] is None or k + 1 < best[0]):
                    best = (k + 1, block | X)
        memo[S] = best
        return best

    k0 = dmin(marked)[0]
    if k0 is None:
        return []
    n_opt = n - n_marked
    order = sorted(range(1 << n_opt), key=lambda F: -bin(F).count("1"))
    kept = []
    for F in order:
        if any(k2 == k0 and F & ~F2 == 0 for F2, k2, _ in kept):
            continue
        S = marked | F << n_marked
        k, _ = dmin(S)
        if k is None or any(k2 <= k and F & ~F2 == 0 for F2, k2, _ in kept):
            continue
        blocks = []
        while S:
            _, blk = dmin(S)
            blocks.append(blk)
            S &= ~blk
        kept.append((F, k, tuple(blocks)))
    return kept


def _submasks(m):
    sub = m
    while True:
        yield sub
        if not sub:
            return
        sub = (sub - 1) & m


def indices(m):
    while m:
        low = m & -m
        yield low.bit_length() - 1
        m ^= low


def _is_clique(adj, m):
    for i in indices(m):
        if m & ~adj[i] & ~(1 << i):
            return False
    return True


def maximal_cliques_with_any(adj, within):
    """Maximal cliques of the subgraph induced on `within` (the empty set if within is empty)."""
    if not within:
        return [0]
    out = []

    def bk(R, P, X):
        if not P and not X:
            out.append(R)
            return
        u = max(indices(P | X), key=lambda w: bin(P & adj[w]).count("1"))
        for w in list(indices(P & ~adj[u])):
            bit = 1 << w
            bk(R | bit, P & adj[w], X & adj[w])
            P &= ~bit
            X |= bit

    bk(0, within, 0)
    return out


def _prune(table):
    """Drop entries whose flags are a subset of another entry's at no smaller l."""
    groups: dict = {}
    for f, ells in table.items():
        key = tuple(x[0] for x in f)
        flat = 0
        for x in f:
            flat = flat << 64 | x[1]
        groups.setdefault(key, []).append((next(iter(ells)), flat, f))
    out = {}
    for members in groups.values():
        members.sort(key=lambda m: (m[0], -bin(m[1]).count("1")))
        kept = []
        for ell, flat, f in members:
            if any(l2 <= ell and flat & ~fl2 == 0 for l2, fl2 in kept):
                continue
            kept.append((ell, flat))
            out[f] = table[f]
    return out


def sum_masks(ms):
    acc = 0
    for m in ms:
        acc |= m
    return acc


def _groups(d, S, k, verts):
    out = []
    while S:
        D = d(S)[k]
        m = 0
        for i in range(len(verts)):
            if D >> i & 1:
                m |= verts[i]
        out.append(m)
        S &= ~D
        k -= 1
    return out


def _join(left, right, full):
    by_tiling: dict = {}
    for f, ells in right.items():
        by_tiling.setdefault(tuple(x[0] for x in f), []).append((f, ells))
    table = {}
    for f1, ells1 in left.items():
        for f2, ells2 in by_tiling.get(tuple(x[0] for x in f1), ()):
            g = tuple((a[0], a[1] | b[1]) for a, b in zip(f1, f2))
            for l1, w1 in ells1.items():
                for l2, w2 in ells2.items():
                    _put(table, g, l1 + l2, ("J", w1, w2), full)
    return table


def _reconstruct(witness, n):
    groups, stack = [], [witness]
    while stack:
        w = stack.pop()
        if w is None:
            continue
        if w[0] == "J":
            stack.append(w[1])
            stack.append(w[2])
            continue
        how, child = w
        if how[0] == "F":
            _, d, verts, S, k = how
            groups.extend(_groups(d, S, k, verts))
        else:
            groups.extend(how)
        stack.append(child)
    # A tile flagged in both branches of a join lands in two groups; keep its first home.
    seen, cliques = 0, []
    for m in sorted(groups, key=lambda m: (m & -m, m)):
        m &= ~seen
        seen |= m
        if m:
            cliques.append(m)
    return CliqueCover.from_masks(sorted(cliques, key=lambda m: m & -m))


def solve(
    inst: Instance,
    lam: int = DEFAULT_LAMBDA,
    h: int = DEFAULT_HALFPLANES,
    *,
    max_lambda: int = 32,
    max_h: int = 5,
    stabilize: bool = True,
    gamma: WeightFunction | None = None,
) -> DPResult:
    """dp_solve with escalation.

    An empty configuration set raises lam by 4 (then h by 1 once lam hits
    its cap).  With ``stabilize`` one further escalation round is run and
    the loop continues until two consecutive rounds agree.
    """
    graph = build_graph(inst)
    partition = build_kappa_partition(inst)
    gamma = gamma or WeightFunction()
    cg = contraction_graph(partition, graph)
    nice = to_nice(tree_decomposition(cg, gamma))
    escalations = 0
    best = None
    while True:
        try:
            res = dp_solve(inst, nice, lam, h, graph=graph, partition=partition, gamma=gamma)
        except EmptyConfigurations as exc:
            log.info("escalating: %s", exc)
            lam, h = _bump(lam, h, max_lambda, max_h)
            escalations += 1
            continue
        settled = best is not None and res.k == best.k
        if best is None or res.k < best.k:
            best = res
        if not stabilize or settled or lam + 4 > max_lambda or h + 1 > max_h:
            best.stats.escalations = escalations
            return best
        lam, h = lam + 4, h + 1
        escalations += 1


def _bump(lam, h, max_lambda, max_h):
    if lam + 4 <= max_lambda:
        return lam + 4, h
    if h + 1 <= max_h:
        return lam, h + 1
    raise EscalationCapReached(f"escalation cap reached at lambda={lam}, h={h}")
