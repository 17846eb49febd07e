"""3-Coloring to 3-clique cover on unit ball graphs in R^5.

The enhanced graph G' doubles every edge of G into two 2-subdivided paths
and adds two special vertices; its complement is realised as a unit ball
graph in R^5.  All irrational coordinates are evaluated with outward
rounded interval arithmetic (mpmath.iv) and every pair is certified on the
correct side of the threshold before decimal coordinates are emitted.
Those decimals are then re-checked with exact rational arithmetic.
"""

from __future__ import annotations

import logging
from contextlib import contextmanager
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import ceil, log10

from mpmath import iv
from mpmath.libmp import to_rational as _mpf_to_rational

from ..model import Instance, build_graph, format_rational

log = logging.getLogger(__name__)

DELTA = Fraction(1, 1000)
START_BITS = 64
PRECISION_CAP = 4096
THETA_HALVINGS = 32


class CertificationError(RuntimeError):
    pass


# -- the enhanced graph --------------------------------------------------


@dataclass(frozen=True)
class EnhancedGraph:
    n: int  # vertices of G
    edges: tuple  # edges of G, as given
    names: tuple  # vertex names of G': ("w", i), ("t1", j), ("t2", j), ("b1", j), ("b2", j), ("c1",), ("c2",)
    adjacency: frozenset  # frozenset({a, b}) over indices into names

    @property
    def m(self) -> int:
        return len(self.edges)

    def index(self, name) -> int:
        return self._pos[name]

    @property
    def _pos(self):
        cache = self.__dict__.get("_pos_cache")
        if cache is None:
            cache = {nm: i for i, nm in enumerate(self.names)}
            object.__setattr__(self, "_pos_cache", cache)
        return cache

    def edge_list(self) -> list:
        return sorted(tuple(sorted(e)) for e in self.adjacency)


def check_simple(n: int, edges) -> list:
    out, seen = [], set()
    for u, v in edges:
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"edge {(u, v)} has an endpoint outside 0..{n - 1}")
        if u == v:
            raise ValueError("self-loops are not allowed")
        key = frozenset((u, v))
        if key in seen:
            raise ValueError(f"duplicate edge {(u, v)}")
        seen.add(key)
        out.append((u, v))
    return out


def build_enhanced_graph(n: int, edges) -> EnhancedGraph:
    edges = check_simple(n, edges)
    names = [("w", i) for i in range(n)]
    for j in range(len(edges)):
        names += [("t1", j), ("t2", j)]
    for j in range(len(edges)):
        names += [("b1", j), ("b2", j)]
    names += [("c1",), ("c2",)]
    pos = {nm: i for i, nm in enumerate(names)}
    adj = set()

    def link(a, b):
        adj.add(frozenset((pos[a], pos[b])))

    for j, (u, v) in enumerate(edges):
        # Both subdivided copies run from w_u to w_v.
        link(("w", u), ("t1", j))
        link(("t1", j), ("t2", j))
        link(("t2", j), ("w", v))
        link(("w", u), ("b1", j))
        link(("b1", j), ("b2", j))
        link(("b2", j), ("w", v))
        link(("t1", j), ("c1",))
        link(("t2", j), ("c1",))
        link(("b1", j), ("c2",))
        link(("b2", j), ("c2",))
    link(("c1",), ("c2",))
    return EnhancedGraph(n, tuple(edges), tuple(names), frozenset(adj))


# -- interval helpers ----------------------------------------------------


@contextmanager
def precision(bits: int):
    saved = iv.prec
    iv.prec = bits
    try:
        yield
    finally:
        iv.prec = saved


def ivq(q: Fraction):
    """Tight interval around a rational (exact when representable)."""
    q = Fraction(q)
    return iv.mpf(q.numerator) / iv.mpf(q.denominator)


def endpoints(x) -> tuple:
    """Exact rational endpoints of an interval."""
    lo, hi = x._mpi_
    return Fraction(*_mpf_to_rational(lo)), Fraction(*_mpf_to_rational(hi))


def certainly_less(a, b) -> bool:
    return endpoints(a)[1] < endpoints(b)[0]


# -- parameters ----------------------------------------------------------


@dataclass
class EmbeddingParams:
    n: int
    m: int
    delta: Fraction
    eps_prime: Fraction
    xi: Fraction
    eps: Fraction
    theta: Fraction
    r: Fraction
    bits: int = START_BITS
    # interval-valued, at `bits` precision
    R1: object = None
    R2: object = None
    D_sq: object = None
    D_boundary_sq: object = None

    def as_dict(self) -> dict:
        def iv_str(x):
            lo, hi = endpoints(x)
            return [format_interval(lo), format_interval(hi)]

        return {
            "n": self.n,
            "m": self.m,
            "delta": str(self.delta),
            "eps_prime": str(self.eps_prime),
            "xi": str(self.xi),
            "eps": str(self.eps),
            "theta": str(self.theta),
            "r": str(self.r),
            "bits": self.bits,
            "R1": iv_str(self.R1),
            "R2": iv_str(self.R2),
            "D_sq": iv_str(self.D_sq),
            "D_boundary_sq": iv_str(self.D_boundary_sq),
        }


def format_interval(q: Fraction, digits: int = 24) -> str:
    return f"{float(q):.{digits}g}" if q else "0"


def _derived(p: EmbeddingParams) -> None:
    s2 = iv.sqrt(2)
    a = s2 / 2 - ivq(p.eps)
    r = ivq(p.r)
    p.R1 = iv.sqrt(a * a + r * r)
    p.R2 = iv.sqrt(4 - p.R1 * p.R1)
    th = ivq(p.theta)
    c = iv.cos(ivq(p.delta) / max(p.n, 1))
    # R1^2 + R2^2 = 4 by definition of R2.
    p.D_boundary_sq = 4 + th * th + 2 * p.R2 * th * c
    # Neighbouring W points sit exactly on the boundary value; take the
    # midpoint between that and the matched distance instead.
    p.D_sq = 4 + th * th + p.R2 * th * (1 + c)


def check_params(p: EmbeddingParams) -> list:
    """Failed invariants (empty when everything certifies at the current precision)."""
    bad = []
    if p.xi * 2 != p.eps_prime:
        bad.append("2 xi = eps'")
    if p.eps_prime > p.delta**2 / (20 * max(p.m, 1) ** 2):
        bad.append("eps' <= delta^2/(20 m^2)")
    if p.eps < 8 * (p.eps_prime + p.xi + p.delta):
        bad.append("eps >= 8(eps' + xi + delta)")
    if not certainly_less(p.R1, iv.mpf(4)):
        bad.append("R1 < 4")
    if not certainly_less(iv.mpf(4), p.D_sq):
        bad.append("2 < D")
    hi = 2 + ivq(p.xi) / 2
    if not certainly_less(p.D_sq, hi * hi):
        bad.append("D < 2 + xi/2")
    return bad


def choose_embedding_params(n: int, m: int, bits: int = START_BITS, precision_cap: int = PRECISION_CAP) -> EmbeddingParams:
    """Parameters from the constraint formulas; theta is the largest power of two under the safe bound.

    Graphs without vertices or edges are treated as n = 1 / m = 1 for the
    formulas (the constraints only get looser).
    """
    mm = max(m, 1)
    delta = DELTA
    eps_prime = delta * delta / (20 * mm * mm)
    xi = eps_prime / 2
    eps = 8 * (eps_prime + xi + delta)
    p = EmbeddingParams(n, m, delta, eps_prime, xi, eps, Fraction(0), 1 + eps_prime, bits)
    while True:
        with precision(p.bits):
            _derived(p)
            bound_lo = endpoints(ivq(xi) / (64 * (p.R2 + 1)))[0]
            theta = Fraction(1)
            while theta > bound_lo:
                theta /= 2
            p.theta = theta
            _derived(p)
            bad = check_params(p)
        if not bad:
            return p
        if p.bits * 2 > precision_cap:
            raise CertificationError(f"parameter invariants do not certify: {bad}")
        p.bits *= 2


# -- the embedding -------------------------------------------------------


def embed_r5(G: EnhancedGraph, p: EmbeddingParams, shifted: bool = True) -> list:
    """Interval coordinates of every vertex of G' (with the theta shifts unless shifted=False)."""
    s2h = iv.sqrt(2) / 2
    e = ivq(p.eps)
    r = ivq(p.r)
    d = ivq(p.delta)
    zero = iv.mpf(0)
    c1x = iv.sqrt(3) - s2h + e
    n, m = max(G.n, 1), max(G.m, 1)
    w_pts = []
    for i in range(G.n):
        ang = d * (i + 1) / n
        w_pts.append((zero, zero, zero, p.R2 * iv.cos(ang), p.R2 * iv.sin(ang)))
    th = ivq(p.theta)

    def shift(pt, w):
        if not shifted:
            return pt
        # theta times the unit vector from pi(w) towards the origin
        return pt[:3] + (pt[3] - th * w[3] / p.R2, pt[4] - th * w[4] / p.R2)

    out = []
    for nm in G.names:
        kind = nm[0]
        if kind == "w":
            out.append(w_pts[nm[1]])
            continue
        if kind == "c1":
            out.append((c1x, zero, zero, zero, zero))
            continue
        if kind == "c2":
            out.append((-c1x, zero, zero, zero, zero))
            continue
        j = nm[1]
        ang = d * (j + 1) / m
        cs, sn = r * iv.cos(ang), r * iv.sin(ang)
        u, v = G.edges[j]
        if kind == "t1":
            pt, w = (-s2h + e, cs, sn, zero, zero), w_pts[u]
        elif kind == "t2":
            pt, w = (-s2h + e, -cs, -sn, zero, zero), w_pts[v]
        elif kind == "b1":
            pt, w = (s2h - e, -sn, cs, zero, zero), w_pts[u]
        else:
            pt, w = (s2h - e, sn, -cs, zero, zero), w_pts[v]
        out.append(shift(pt, w))
    return out


def sq_dist_iv(a, b):
    acc = iv.mpf(0)
    for x, y in zip(a, b):
        acc += (x - y) * (x - y)
    return acc


def _pair_class(G, a, b) -> str:
    ka, kb = sorted((G.names[a][0], G.names[b][0]))
    group = {"t1": "T", "t2": "T", "b1": "B", "b2": "B", "w": "W", "c1": "C", "c2": "C"}
    return "-".join(sorted((group[ka], group[kb])))


@dataclass
class Certificate:
    accepted: bool
    bits: int
    min_margin: dict = field(default_factory=dict)  # pair class -> smallest certified |d^2 - D^2| lower bound
    straddling: list = field(default_factory=list)
    wrong_side: list = field(default_factory=list)
    c1c2: tuple | None = None  # certified enclosure of ||pi(c1) - pi(c2)||

    def as_dict(self) -> dict:
        return {
            "accepted": self.accepted,
            "bits": self.bits,
            "min_margin": {k: format_interval(v) for k, v in sorted(self.min_margin.items())},
            "straddling": len(self.straddling),
            "wrong_side": len(self.wrong_side),
            "c1c2": [format_interval(x) for x in self.c1c2] if self.c1c2 else None,
        }


def certify_embedding(G: EnhancedGraph, p: EmbeddingParams, bits: int | None = None, precision_cap: int = PRECISION_CAP):
    """Certify that distance > D exactly on the edges of G', doubling precision as needed.

    Returns (certificate, interval points) at the first precision without
    straddling pairs.  A pair certified on the wrong side is a hard failure.
    """
    bits = bits or p.bits
    while True:
        with precision(bits):
            _derived(p)
            pts = embed_r5(G, p)
            cert = _certify_at(G, p, pts, bits)
        if cert.wrong_side or not cert.straddling:
            return cert, pts
        log.info("%d pairs straddle D at %d bits", len(cert.straddling), bits)
        if bits * 2 > precision_cap:
            return cert, pts
        bits *= 2


def _certify_at(G, p, pts, bits) -> Certificate:
    cert = Certificate(False, bits)
    Dlo, Dhi = endpoints(p.D_sq)
    for a, b in combinations(range(len(pts)), 2):
        lo, hi = endpoints(sq_dist_iv(pts[a], pts[b]))
        far = frozenset((a, b)) in G.adjacency
        if lo > Dhi:
            margin, side = lo - Dhi, True
        elif hi < Dlo:
            margin, side = Dlo - hi, False
        else:
            cert.straddling.append((a, b))
            continue
        if side != far:
            cert.wrong_side.append((a, b))
            continue
        cls = _pair_class(G, a, b)
        if cls not in cert.min_margin or margin < cert.min_margin[cls]:
            cert.min_margin[cls] = margin
    cert.accepted = not cert.straddling and not cert.wrong_side
    ca, cb = pts[G.index(("c1",))], pts[G.index(("c2",))]
    cert.c1c2 = endpoints(iv.sqrt(sq_dist_iv(ca, cb)))
    return cert


def _round(x, digits: int) -> Fraction:
    lo, hi = endpoints(x)
    scale = 10**digits
    return Fraction(round((lo + hi) / 2 * scale), scale)


@dataclass
class R5Instance:
    instance: Instance
    k: int
    graph: EnhancedGraph
    params: EmbeddingParams
    certificate: Certificate
    digits: int

    def sidecar(self) -> dict:
        return {
            "target_k": self.k,
            "digits": self.digits,
            "params": self.params.as_dict(),
            "certificate": self.certificate.as_dict(),
            "source_graph": {"n": self.graph.n, "edges": [list(e) for e in self.graph.edges]},
        }


def build_r5_instance(n: int, edges, precision_cap: int = PRECISION_CAP) -> R5Instance:
    """Certified instance whose unit ball graph is the complement of G'; target k = 3."""
    G = build_enhanced_graph(n, edges)
    p = choose_embedding_params(n, len(G.edges), precision_cap=precision_cap)
    for _ in range(THETA_HALVINGS):
        cert, pts = certify_embedding(G, p, precision_cap=precision_cap)
        if not cert.wrong_side:
            break
        p.theta /= 2
    if not cert.accepted:
        raise CertificationError(
            f"certification failed at {cert.bits} bits: {len(cert.straddling)} straddling, {len(cert.wrong_side)} wrong-side pairs"
        )
    p.bits = cert.bits
    # Decimal output: enough digits that rounding moves squared distances far less than the margins.
    margin = min(cert.min_margin.values(), default=Fraction(1))
    digits = max(ceil(-log10(margin)) + 6, 12)
    with precision(cert.bits):
        _derived(p)
        while True:
            coords = [tuple(_round(x, digits) for x in pt) for pt in pts]
            D = _rational_threshold(p, digits)
            inst = _exact_instance(coords, D, G)
            if inst is not None:
                break
            digits += 6
            if digits > cert.bits:
                raise CertificationError("decimal coordinates do not reproduce the certified graph")
    return R5Instance(inst, 3, G, p, cert, digits)


def _rational_threshold(p, digits) -> Fraction:
    # D itself is irrational; any rational strictly between the extreme distances works.
    return _round(iv.sqrt(p.D_sq), digits + 2)


def _exact_instance(coords, D, G):
    labels = tuple("".join(str(x) for x in nm) for nm in G.names)
    inst = Instance(5, D, tuple(coords), labels)
    if reproduces_complement(inst, G):
        return inst
    return None


def reproduces_complement(inst: Instance, G: EnhancedGraph) -> bool:
    """Exact check: the unit ball graph of inst is the complement of G'."""
    graph = build_graph(inst)
    for a, b in combinations(range(inst.n), 2):
        if graph.adjacent(a, b) == (frozenset((a, b)) in G.adjacency):
            return False
    return True


def coordinate_strings(inst: Instance) -> list:
    return [[format_rational(c) for c in pt] for pt in inst.points]
