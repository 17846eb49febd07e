"""Instances, unit ball graphs, clique covers and their JSON files."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from math import floor
from typing import Sequence

from .geometry import GREATER, DimensionError, cmp_dist, to_rational


class ParseError(ValueError):
    pass


@dataclass(frozen=True)
class Instance:
    dim: int
    diameter: Fraction
    points: tuple
    labels: tuple | None = None

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be positive")
        if self.diameter <= 0:
            raise ValueError("diameter threshold must be positive")
        for p in self.points:
            if len(p) != self.dim:
                raise DimensionError(f"point {p} is not {self.dim}-dimensional")
        if self.labels is not None and len(self.labels) != len(self.points):
            raise ValueError("one label per point")

    @classmethod
    def from_coords(cls, coords, diameter, dim=None, labels=None) -> "Instance":
        pts = tuple(tuple(to_rational(c) for c in p) for p in coords)
        if dim is None:
            dim = len(pts[0]) if pts else 2
        return cls(dim, to_rational(diameter), pts, tuple(labels) if labels is not None else None)

    @property
    def n(self) -> int:
        return len(self.points)

    def subinstance(self, indices: Sequence[int]) -> "Instance":
        labels = None if self.labels is None else tuple(self.labels[i] for i in indices)
        return Instance(self.dim, self.diameter, tuple(self.points[i] for i in indices), labels)


@dataclass(frozen=True)
class UnitBallGraph:
    """Adjacency stored as one bitmask per vertex (bit j of adj[i] <=> edge ij)."""

    n: int
    adj: tuple

    def adjacent(self, i: int, j: int) -> bool:
        return bool(self.adj[i] >> j & 1)

    def edges(self):
        return [(i, j) for i in range(self.n) for j in range(i + 1, self.n) if self.adj[i] >> j & 1]

    def is_clique(self, mask: int) -> bool:
        rest = mask
        while rest:
            low = rest & -rest
            i = low.bit_length() - 1
            if mask & ~self.adj[i] & ~low:
                return False
            rest ^= low
        return True

    def degree(self, i: int) -> int:
        return bin(self.adj[i]).count("1")

    def complement(self) -> "UnitBallGraph":
        full = (1 << self.n) - 1
        return UnitBallGraph(self.n, tuple(full & ~a & ~(1 << i) for i, a in enumerate(self.adj)))


def graph_from_edges(n: int, edges) -> UnitBallGraph:
    adj = [0] * n
    for i, j in edges:
        if i == j:
            raise ValueError("self-loop")
        adj[i] |= 1 << j
        adj[j] |= 1 << i
    return UnitBallGraph(n, tuple(adj))


def build_graph(inst: Instance) -> UnitBallGraph:
    """Closed threshold: points at distance exactly D are adjacent.

    Points are bucketed into cubes of side D; only neighbouring cubes are
    compared, always with the exact predicate.
    """
    adj = [0] * inst.n
    pts = inst.points
    D = inst.diameter
    buckets: dict = {}
    for i, p in enumerate(pts):
        buckets.setdefault(tuple(floor(c / D) for c in p), []).append(i)
    offsets = list(product((-1, 0, 1), repeat=inst.dim))
    for key, members in buckets.items():
        for off in offsets:
            other = buckets.get(tuple(k + o for k, o in zip(key, off)))
            if other is None:
                continue
            for i in members:
                for j in other:
                    if i < j and cmp_dist(pts[i], pts[j], D) != GREATER:
                        adj[i] |= 1 << j
                        adj[j] |= 1 << i
    return UnitBallGraph(inst.n, tuple(adj))


def mask_of(indices) -> int:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


def indices_of(mask: int) -> list:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


@dataclass(frozen=True)
class CliqueCover:
    cliques: tuple

    @classmethod
    def of(cls, cliques) -> "CliqueCover":
        return cls(tuple(tuple(sorted(c)) for c in cliques))

    @classmethod
    def from_masks(cls, masks) -> "CliqueCover":
        return cls.of(indices_of(m) for m in masks)

    def canonical(self) -> "CliqueCover":
        return CliqueCover(tuple(sorted(tuple(sorted(c)) for c in self.cliques)))

    def __len__(self):
        return len(self.cliques)


@dataclass
class CoverReport:
    disjoint: bool = True
    cliques_ok: bool = True
    complete: bool = True
    overlaps: list = field(default_factory=list)
    violations: list = field(default_factory=list)  # (class index, i, j)
    missing: list = field(default_factory=list)
    empty_classes: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.disjoint and self.cliques_ok and self.complete and not self.empty_classes

    def describe(self) -> str:
        if self.ok:
            return "cover accepted"
        parts = []
        if self.overlaps:
            parts.append(f"vertices in several classes: {self.overlaps}")
        if self.violations:
            k, i, j = self.violations[0]
            parts.append(f"class {k} is not a clique: points {i} and {j} are farther apart than D")
        if self.missing:
            parts.append(f"uncovered vertices: {self.missing}")
        if self.empty_classes:
            parts.append(f"empty classes: {self.empty_classes}")
        return "; ".join(parts)


def verify_cover(inst: Instance, cover: CliqueCover, full: bool = True) -> CoverReport:
    report = CoverReport()
    seen = {}
    for k, clique in enumerate(cover.cliques):
        if not clique:
            report.empty_classes.append(k)
        for i in clique:
            if not 0 <= i < inst.n:
                raise IndexError(f"vertex index {i} out of range [0, {inst.n})")
            if i in seen:
                report.overlaps.append(i)
            seen[i] = k
        for i, j in combinations(clique, 2):
            if cmp_dist(inst.points[i], inst.points[j], inst.diameter) == GREATER:
                report.violations.append((k, i, j))
    report.disjoint = not report.overlaps
    report.cliques_ok = not report.violations
    if full:
        report.missing = [i for i in range(inst.n) if i not in seen]
        report.complete = not report.missing
    return report


# -- serialization -------------------------------------------------------


def format_rational(q: Fraction) -> str:
    """Decimal string when the value has a finite expansion, else "p/q"."""
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    den = q.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return f"{q.numerator}/{q.denominator}"
    digits = max(twos, fives)
    scaled = abs(q.numerator) * 10**digits // q.denominator
    sign = "-" if q < 0 else ""
    s = str(scaled).rjust(digits + 1, "0")
    return f"{sign}{s[:-digits]}.{s[-digits:]}"


def _parse_rational(value, what: str) -> Fraction:
    if isinstance(value, bool) or not isinstance(value, (str, int)):
        raise ParseError(f"{what}: expected a rational string, got {value!r}")
    try:
        return to_rational(value)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"{what}: not a rational number: {value!r}") from exc


def _dump(doc: dict) -> str:
    # One top-level key per line, each list element on its own line; stable bytes.
    lines = ["{"]
    items = list(doc.items())
    for pos, (key, value) in enumerate(items):
        tail = "," if pos < len(items) - 1 else ""
        if isinstance(value, list) and value and isinstance(value[0], (list, dict)):
            lines.append(f"  {json.dumps(key)}: [")
            for k, elem in enumerate(value):
                sep = "," if k < len(value) - 1 else ""
                lines.append(f"    {json.dumps(elem, separators=(', ', ': '))}{sep}")
            lines.append(f"  ]{tail}")
        else:
            lines.append(f"  {json.dumps(key)}: {json.dumps(value, separators=(', ', ': '))}{tail}")
    lines.append("}")
    return "\n".join(lines) + "\n"


def instance_to_dict(inst: Instance) -> dict:
    doc = {
        "dim": inst.dim,
        "diameter": format_rational(inst.diameter),
        "points": [[format_rational(c) for c in p] for p in inst.points],
    }
    if inst.labels is not None:
        doc["labels"] = list(inst.labels)
    return doc


def serialize_instance(inst: Instance, extra: dict | None = None) -> str:
    doc = instance_to_dict(inst)
    if extra:
        doc.update(extra)
    return _dump(doc)


def instance_from_dict(doc) -> Instance:
    if not isinstance(doc, dict):
        raise ParseError("instance document must be a JSON object")
    for key in ("dim", "diameter", "points"):
        if key not in doc:
            raise ParseError(f"missing field {key!r}")
    dim = doc["dim"]
    if isinstance(dim, bool) or not isinstance(dim, int) or dim < 1:
        raise ParseError(f"dim must be a positive integer, got {dim!r}")
    diameter = _parse_rational(doc["diameter"], "diameter")
    if diameter <= 0:
        raise ParseError("diameter must be positive")
    if not isinstance(doc["points"], list):
        raise ParseError("points must be a list")
    pts = []
    for k, raw in enumerate(doc["points"]):
        if not isinstance(raw, list):
            raise ParseError(f"point {k} must be a list of coordinates")
        if len(raw) != dim:
            raise ParseError(f"point {k} has dimension {len(raw)}, expected {dim}")
        pts.append(tuple(_parse_rational(c, f"point {k}") for c in raw))
    labels = doc.get("labels")
    if labels is not None and (not isinstance(labels, list) or len(labels) != len(pts)):
        raise ParseError("labels must be a list with one entry per point")
    return Instance(dim, diameter, tuple(pts), tuple(labels) if labels is not None else None)


def parse_instance(text: str) -> Instance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc}") from exc
    return instance_from_dict(doc)


def serialize_cover(cover: CliqueCover) -> str:
    return _dump({"cliques": [list(c) for c in cover.cliques]})


def parse_cover(text: str) -> CliqueCover:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("cliques"), list):
        raise ParseError("cover document needs a 'cliques' list")
    out = []
    for k, c in enumerate(doc["cliques"]):
        if not isinstance(c, list) or not all(isinstance(i, int) and not isinstance(i, bool) for i in c):
            raise ParseError(f"clique {k} must be a list of vertex indices")
        out.append(c)
    return CliqueCover.of(out)


# -- random instances ----------------------------------------------------

GRID_BITS = 20


def gen_random(n: int, box_side, diameter, seed: int) -> Instance:
    """n points on the 2^20-resolution grid of [0, box_side]^2."""
    box_side = to_rational(box_side)
    if n < 0 or box_side <= 0:
        raise ValueError("need n >= 0 and a positive box side")
    rng = random.Random(seed)
    res = 1 << GRID_BITS
    pts = []
    for _ in range(n):
        x = rng.randint(0, res)
        y = rng.randint(0, res)
        pts.append((box_side * x / res, box_side * y / res))
    return Instance(2, to_rational(diameter), tuple(pts))
