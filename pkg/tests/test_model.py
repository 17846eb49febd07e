import json
from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from diamcover.geometry import GREATER, DimensionError, cmp_dist
from diamcover.model import (
    CliqueCover,
    Instance,
    ParseError,
    build_graph,
    format_rational,
    gen_random,
    parse_cover,
    parse_instance,
    serialize_cover,
    serialize_instance,
    verify_cover,
)

rationals = st.fractions(min_value=-50, max_value=50, max_denominator=64)


@st.composite
def instances(draw, max_n=12, dim=2):
    n = draw(st.integers(0, max_n))
    pts = [tuple(draw(rationals) for _ in range(dim)) for _ in range(n)]
    d = draw(st.fractions(min_value=Fraction(1, 8), max_value=20, max_denominator=16))
    return Instance.from_coords(pts, d, dim=dim)


@given(instances())
def test_json_round_trip(inst):
    text = serialize_instance(inst)
    back = parse_instance(text)
    assert back == inst
    assert serialize_instance(back) == text


@given(rationals)
def test_format_rational_is_exact(q):
    assert Fraction(format_rational(q)) == q


def test_format_rational_prefers_decimals():
    assert format_rational(Fraction(3, 8)) == "0.375"
    assert format_rational(Fraction(-1, 20)) == "-0.05"
    assert format_rational(Fraction(1, 3)) == "1/3"


@given(instances(max_n=14))
def test_graph_matches_quadratic_scan(inst):
    g = build_graph(inst)
    for i, j in combinations(range(inst.n), 2):
        expect = cmp_dist(inst.points[i], inst.points[j], inst.diameter) != GREATER
        assert g.adjacent(i, j) == expect


def test_graph_in_five_dimensions():
    inst = Instance.from_coords([(0, 0, 0, 0, 1), (0, 0, 0, 0, 0), (1, 1, 1, 1, 1)], 1)
    g = build_graph(inst)
    assert g.edges() == [(0, 1)]


def test_closed_threshold():
    inst = Instance.from_coords([(0, 0), (2, 0)], 2)
    assert build_graph(inst).adjacent(0, 1)


@pytest.mark.parametrize(
    "text",
    [
        "{",
        "[]",
        '{"dim": 2, "diameter": "1"}',
        '{"dim": 2, "diameter": "0", "points": []}',
        '{"dim": 2, "diameter": "1", "points": [["0"]]}',
        '{"dim": 2, "diameter": "1", "points": [[0.5, 1]]}',
        '{"dim": 2, "diameter": "x", "points": []}',
        '{"dim": 0, "diameter": "1", "points": []}',
    ],
)
def test_malformed_instances(text):
    with pytest.raises(ParseError):
        parse_instance(text)


def test_instance_dimension_check():
    with pytest.raises(DimensionError):
        Instance(2, Fraction(1), ((Fraction(0),),))


def test_verify_cover_reports_each_problem():
    inst = Instance.from_coords([(0, 0), (1, 0), (5, 0)], 1)
    assert verify_cover(inst, CliqueCover.of([[0, 1], [2]])).ok
    bad = verify_cover(inst, CliqueCover.of([[0, 2], [1]]))
    assert not bad.cliques_ok and bad.violations == [(0, 0, 2)]
    assert "farther apart" in bad.describe()
    missing = verify_cover(inst, CliqueCover.of([[0, 1]]))
    assert missing.missing == [2]
    overlap = verify_cover(inst, CliqueCover.of([[0, 1], [1], [2]]))
    assert overlap.overlaps == [1]
    empty = verify_cover(inst, CliqueCover.of([[0, 1], [], [2]]))
    assert empty.empty_classes == [1]
    with pytest.raises(IndexError):
        verify_cover(inst, CliqueCover.of([[0, 1, 2, 7]]))


def test_cover_round_trip_and_errors():
    cover = CliqueCover.of([[3, 1], [0], [2]])
    assert parse_cover(serialize_cover(cover)) == cover
    for text in ["{}", '{"cliques": [[1, "a"]]}', '{"cliques": [true]}', "nope"]:
        with pytest.raises(ParseError):
            parse_cover(text)


def test_serialization_layout_is_line_per_point():
    inst = Instance.from_coords([(0, 0), ("1/3", "0.5")], 2)
    lines = serialize_instance(inst).splitlines()
    assert lines[0] == "{" and lines[-1] == "}"
    assert '    ["1/3", "0.5"]' in lines
    json.loads(serialize_instance(inst))


def test_random_generator_is_deterministic():
    a = gen_random(20, 5, 2, seed=3)
    b = gen_random(20, 5, 2, seed=3)
    c = gen_random(20, 5, 2, seed=4)
    assert serialize_instance(a) == serialize_instance(b)
    assert a != c
    assert all(0 <= x <= 5 for p in a.points for x in p)
