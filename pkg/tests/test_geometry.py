from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from diamcover.geometry import (
    COLLINEAR,
    EQUAL,
    GREATER,
    LEFT,
    LESS,
    RIGHT,
    DimensionError,
    HalfPlane,
    LensRegion,
    cmp_dist,
    convex_hull,
    hulls_disjoint,
    in_halfplane,
    in_lens,
    orientation,
    point,
    sq_dist,
    to_rational,
)

coord = st.integers(-12, 12)
pts = st.tuples(coord, coord).map(lambda p: point(*p))


def test_to_rational_rejects_floats():
    with pytest.raises(TypeError):
        to_rational(0.1)
    assert to_rational("0.1") == Fraction(1, 10)
    assert to_rational("3/7") == Fraction(3, 7)


def test_exact_tie_is_equal_not_less():
    # 3-4-5 triangle scaled by 1/10: distance exactly 1/2
    a, b = point(0, 0), point("0.3", "0.4")
    assert cmp_dist(a, b, "0.5") == EQUAL
    assert cmp_dist(a, b, "0.4999999999") == GREATER
    assert cmp_dist(a, b, "0.5000000001") == LESS


def test_orientation_signs():
    assert orientation(point(0, 0), point(1, 0), point(0, 1)) == LEFT
    assert orientation(point(0, 0), point(1, 0), point(0, -1)) == RIGHT
    assert orientation(point(0, 0), point(1, 1), point("1/3", "1/3")) == COLLINEAR


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        sq_dist(point(0, 0), point(0, 0, 0))
    with pytest.raises(DimensionError):
        orientation(point(0, 0, 0), point(1, 0, 0), point(0, 1, 0))


@given(pts, pts, pts)
def test_orientation_antisymmetric(a, b, c):
    assert orientation(a, b, c) == -orientation(b, a, c)
    assert orientation(a, b, c) == orientation(b, c, a)


@given(st.lists(pts, min_size=1, max_size=12))
def test_hull_contains_all_points(ps):
    hull = convex_hull(ps)
    for p in ps:
        assert hull.contains(p)
    vs = hull.vertices
    if len(vs) >= 3:
        for i in range(len(vs)):
            assert orientation(vs[i], vs[(i + 1) % len(vs)], vs[(i + 2) % len(vs)]) == LEFT


def _seg_intersect(p, q, r, s):
    def on(a, b, c):
        return min(a[0], b[0]) <= c[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= c[1] <= max(a[1], b[1])

    o1, o2, o3, o4 = orientation(p, q, r), orientation(p, q, s), orientation(r, s, p), orientation(r, s, q)
    if o1 * o2 < 0 and o3 * o4 < 0:
        return True
    return (
        (o1 == 0 and on(p, q, r))
        or (o2 == 0 and on(p, q, s))
        or (o3 == 0 and on(r, s, p))
        or (o4 == 0 and on(r, s, q))
    )


def _segments(hull):
    vs = hull.vertices
    if len(vs) == 1:
        return [(vs[0], vs[0])]
    return [(vs[i], vs[(i + 1) % len(vs)]) for i in range(len(vs))]


def _intersect_oracle(h1, h2):
    # Convex regions meet iff a vertex of one lies in the other or two boundary segments cross.
    if any(h2.contains(v) for v in h1.vertices) or any(h1.contains(v) for v in h2.vertices):
        return True
    return any(_seg_intersect(a, b, c, d) for a, b in _segments(h1) for c, d in _segments(h2))


@given(st.lists(pts, min_size=1, max_size=6), st.lists(pts, min_size=1, max_size=6))
def test_hull_disjointness_matches_segment_oracle(p1, p2):
    h1, h2 = convex_hull(p1), convex_hull(p2)
    assert hulls_disjoint(h1, h2) == (not _intersect_oracle(h1, h2))


def test_touching_hulls_are_not_disjoint():
    a = convex_hull([point(0, 0), point(1, 0), point(0, 1)])
    b = convex_hull([point(1, 0), point(2, 0), point(2, 1)])
    assert not hulls_disjoint(a, b)
    c = convex_hull([point("1.01", 0), point(2, 0), point(2, 1)])
    assert hulls_disjoint(a, c)


@given(pts, pts, pts)
def test_lens_membership_is_two_disk_test(u, v, p):
    lens = LensRegion.spanned_by(u, v)
    r = lens.r_sq
    assert in_lens(p, lens) == (sq_dist(p, u) <= r and sq_dist(p, v) <= r)
    assert in_lens(u, lens) and in_lens(v, lens)


@given(st.lists(pts, min_size=2, max_size=8, unique=True))
def test_lens_of_farthest_pair_holds_clique(ps):
    # A set whose diameter is realised by (u, v) lies in the lens of u and v.
    u, v = max(combinations(ps, 2), key=lambda pr: sq_dist(*pr))
    lens = LensRegion.spanned_by(u, v)
    assert all(in_lens(p, lens) for p in ps)


def test_halfplane_open_and_closed():
    a, b = point(0, 0), point(1, 0)
    on_line = point(5, 0)
    assert in_halfplane(on_line, HalfPlane(a, b, LEFT, closed=True))
    assert not in_halfplane(on_line, HalfPlane(a, b, LEFT, closed=False))
    assert in_halfplane(point(0, -1), HalfPlane(a, b, RIGHT, closed=False))
    with pytest.raises(ValueError):
        HalfPlane(a, a)
    assert in_halfplane(point(3, 3), HalfPlane(a, a, neutral=True))
