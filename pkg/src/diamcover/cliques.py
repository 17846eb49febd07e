"""Relevant cliques of a vertex set and the separation check for covers.

For a vertex set S the solver only ever tiles S with members of a
polynomial-size family R(S): vertices of S inside a lens spanned by two of
its points, cut down by a bounded number of half-planes whose boundary
lines pass through two points of S.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .geometry import (
    LEFT,
    RIGHT,
    HalfPlane,
    LensRegion,
    convex_hull,
    hulls_disjoint,
    in_halfplane,
    in_lens,
    sq_dist,
)
from .model import CliqueCover, Instance, UnitBallGraph, build_graph


@dataclass(frozen=True)
class RelevantCliqueSet:
    base: tuple
    cliques: tuple  # sorted tuples of global vertex indices, canonical order
    h: int

    def masks(self) -> list:
        return [sum(1 << i for i in c) for c in self.cliques]

    def __contains__(self, clique) -> bool:
        return tuple(sorted(clique)) in self._lookup

    @property
    def _lookup(self):
        cache = self.__dict__.get("_lookup_cache")
        if cache is None:
            cache = frozenset(self.cliques)
            object.__setattr__(self, "_lookup_cache", cache)
        return cache

    def __len__(self):
        return len(self.cliques)


def _local_mask(S, pred) -> int:
    m = 0
    for k, p in enumerate(S):
        if pred(p):
            m |= 1 << k
    return m


def lens_candidates(inst: Instance, S) -> list:
    """All lenses P_{u,v} for u, v in S (u = v allowed) with ||u - v|| <= D.

    Returns (LensRegion, vertex tuple) pairs; the tuple lists the members of
    S inside the closed lens.
    """
    S = sorted(S)
    limit = inst.diameter * inst.diameter
    out = []
    for a in range(len(S)):
        for b in range(a, len(S)):
            u, v = inst.points[S[a]], inst.points[S[b]]
            if sq_dist(u, v) > limit:
                continue
            lens = LensRegion.spanned_by(u, v)
            members = tuple(i for i in S if in_lens(inst.points[i], lens))
            out.append((lens, members))
    return out


def halfplane_masks(inst: Instance, S) -> set:
    """Local bitmasks (over sorted S) of every open/closed half-plane through two points of S."""
    S = sorted(S)
    pts = [inst.points[i] for i in S]
    locations = sorted(set(pts))
    masks = set()
    for p, q in combinations(locations, 2):
        for side in (LEFT, RIGHT):
            for closed in (True, False):
                hp = HalfPlane(p, q, side, closed)
                masks.add(_local_mask(pts, lambda x: in_halfplane(x, hp)))
    return masks


def _intersections(masks, full: int, h: int) -> set:
    """Every intersection of at most h of the given masks (full = no half-plane)."""
    reach = {full}
    frontier = {full}
    for _ in range(h):
        nxt = set()
        for m in frontier:
            for hm in masks:
                x = m & hm
                if x and x not in reach:
                    nxt.add(x)
        if not nxt:
            break
        reach |= nxt
        frontier = nxt
    return reach


def relevant_cliques(inst: Instance, S, h: int = 2, graph: UnitBallGraph | None = None) -> RelevantCliqueSet:
    if h < 0:
        raise ValueError("half-plane budget must be non-negative")
    S = sorted(S)
    if graph is None:
        graph = build_graph(inst)
    full = (1 << len(S)) - 1
    local = {g: k for k, g in enumerate(S)}
    lens_sets = set()
    for _, members in lens_candidates(inst, S):
        lens_sets.add(sum(1 << local[i] for i in members))
    cuts = _intersections(halfplane_masks(inst, S), full, h)

    def to_global(m):
        return sum(1 << S[k] for k in range(len(S)) if m >> k & 1)

    found = set()
    for lm in lens_sets:
        for cm in cuts:
            m = lm & cm
            if m and m not in found:
                found.add(m)
    cliques = set()
    for m in found:
        g = to_global(m)
        if graph.is_clique(g):
            cliques.add(tuple(S[k] for k in range(len(S)) if m >> k & 1))
    # Coincident points cannot be split by any region; singletons are kept regardless.
    cliques.update((i,) for i in S)
    ordered = tuple(sorted(cliques, key=lambda c: (len(c), c)))
    return RelevantCliqueSet(tuple(S), ordered, h)


def is_separated(inst: Instance, cover: CliqueCover) -> bool:
    """True iff the convex hulls of the cliques' centers are pairwise disjoint."""
    hulls = [convex_hull(inst.points[i] for i in c) for c in cover.cliques if c]
    for a, b in combinations(range(len(hulls)), 2):
        if not hulls_disjoint(hulls[a], hulls[b]):
            return False
    return True
