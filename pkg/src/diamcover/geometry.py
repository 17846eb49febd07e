"""Exact geometric predicates over rational coordinates.

Points are plain tuples of :class:`fractions.Fraction`.  Nothing in this
module takes a square root: distances are always compared through their
squares, orientations through the sign of a cross product.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

Point = tuple  # tuple[Fraction, ...]

LEFT, COLLINEAR, RIGHT = 1, 0, -1
LESS, EQUAL, GREATER = -1, 0, 1


class DimensionError(ValueError):
    pass


def to_rational(value) -> Fraction:
    """Convert ints, Fractions and decimal/"p/q" strings to an exact Fraction.

    Floats are rejected on purpose: a float literal such as 0.1 is not the
    rational the user meant.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not coordinates")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


def point(*coords) -> Point:
    return tuple(to_rational(c) for c in coords)


def _check_dims(*pts: Sequence, dim: int | None = None) -> int:
    d = len(pts[0])
    for p in pts:
        if len(p) != d:
            raise DimensionError(f"dimension mismatch: {len(p)} != {d}")
    if dim is not None and d != dim:
        raise DimensionError(f"expected {dim}-dimensional points, got {d}")
    return d


def sq_dist(a: Point, b: Point) -> Fraction:
    _check_dims(a, b)
    return sum(((x - y) * (x - y) for x, y in zip(a, b)), Fraction(0))


def cross(o: Point, a: Point, b: Point) -> Fraction:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def orientation(a: Point, b: Point, c: Point) -> int:
    """Return LEFT, RIGHT or COLLINEAR for the turn a -> b -> c."""
    _check_dims(a, b, c, dim=2)
    s = cross(a, b, c)
    return (s > 0) - (s < 0)


def cmp_sq(value: Fraction, t_sq: Fraction) -> int:
    return (value > t_sq) - (value < t_sq)


def cmp_dist(a: Point, b: Point, t) -> int:
    """Compare ||a - b|| against t exactly; returns LESS, EQUAL or GREATER."""
    t = to_rational(t)
    if t < 0:
        raise ValueError("distance threshold must be non-negative")
    return cmp_sq(sq_dist(a, b), t * t)


@dataclass(frozen=True)
class ConvexPolygon:
    """Counter-clockwise vertex list; one vertex is a point, two a segment."""

    vertices: tuple

    def __len__(self):
        return len(self.vertices)

    def edges(self):
        vs = self.vertices
        if len(vs) < 2:
            return []
        if len(vs) == 2:
            return [(vs[0], vs[1])]
        return [(vs[i], vs[(i + 1) % len(vs)]) for i in range(len(vs))]

    def contains(self, p: Point) -> bool:
        """Closed membership test."""
        vs = self.vertices
        if len(vs) == 1:
            return p == vs[0]
        if len(vs) == 2:
            a, b = vs
            if cross(a, b, p) != 0:
                return False
            dot = (p[0] - a[0]) * (b[0] - a[0]) + (p[1] - a[1]) * (b[1] - a[1])
            return 0 <= dot <= sq_dist(a, b)
        return all(cross(a, b, p) >= 0 for a, b in self.edges())


def convex_hull(points: Iterable[Point]) -> ConvexPolygon:
    """Andrew's monotone chain; collinear boundary points are dropped."""
    pts = sorted(set(points))
    if not pts:
        raise ValueError("convex hull of an empty set")
    _check_dims(*pts, dim=2)
    if len(pts) == 1:
        return ConvexPolygon((pts[0],))

    def chain(seq):
        out = []
        for p in seq:
            while len(out) >= 2 and cross(out[-2], out[-1], p) <= 0:
                out.pop()
            out.append(p)
        return out

    lower = chain(pts)
    upper = chain(reversed(pts))
    hull = lower[:-1] + upper[:-1]
    if len(hull) == 2 or (len(hull) > 2 and all(cross(hull[0], hull[1], q) == 0 for q in hull)):
        return ConvexPolygon((pts[0], pts[-1]))
    return ConvexPolygon(tuple(hull))


def _projection_range(poly: ConvexPolygon, axis):
    vals = [axis[0] * v[0] + axis[1] * v[1] for v in poly.vertices]
    return min(vals), max(vals)


def hulls_disjoint(p1: ConvexPolygon, p2: ConvexPolygon) -> bool:
    """True iff the two closed convex regions share no point.

    Separating-axis test.  The candidate axes are every edge normal plus
    every vertex-to-vertex difference; the closest pair of two disjoint
    convex polygons is realised vertex-vertex or vertex-edge, so one of
    these axes separates strictly whenever the regions are disjoint.
    """
    axes = []
    for poly in (p1, p2):
        for a, b in poly.edges():
            axes.append((a[1] - b[1], b[0] - a[0]))
    for u in p1.vertices:
        for v in p2.vertices:
            if u != v:
                axes.append((v[0] - u[0], v[1] - u[1]))
    for axis in axes:
        lo1, hi1 = _projection_range(p1, axis)
        lo2, hi2 = _projection_range(p2, axis)
        if hi1 < lo2 or hi2 < lo1:
            return True
    return False


@dataclass(frozen=True)
class LensRegion:
    """Intersection of the closed disks of radius r around u and v (r stored squared)."""

    u: Point
    v: Point
    r_sq: Fraction

    @classmethod
    def spanned_by(cls, u: Point, v: Point) -> "LensRegion":
        return cls(u, v, sq_dist(u, v))


def in_lens(p: Point, lens: LensRegion) -> bool:
    return sq_dist(p, lens.u) <= lens.r_sq and sq_dist(p, lens.v) <= lens.r_sq


@dataclass(frozen=True)
class HalfPlane:
    """Points on `side` of the directed line a -> b; the line itself iff closed.

    With a == b and neutral=True the region is the whole plane.
    """

    a: Point
    b: Point
    side: int = LEFT
    closed: bool = True
    neutral: bool = False

    def __post_init__(self):
        if self.a == self.b and not self.neutral:
            raise ValueError("half-plane boundary needs two distinct points")
        if self.side not in (LEFT, RIGHT):
            raise ValueError("side must be LEFT or RIGHT")


def in_halfplane(p: Point, h: HalfPlane) -> bool:
    if h.neutral and h.a == h.b:
        return True
    o = orientation(h.a, h.b, p)
    if o == COLLINEAR:
        return h.closed
    return o == h.side
