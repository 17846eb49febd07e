"""Grid partition of the instance, its contraction graph, tree decompositions.

Classes are the non-empty half-open grid cells of side s <= D/sqrt(2), so
every class is a clique.  The decomposition of the contraction graph is
built from balanced axis-parallel separators over the cell coordinates,
with a min-fill elimination ordering as a fallback; whichever has the
smaller weighted width wins.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import floor, isqrt

import networkx as nx
from networkx.algorithms.approximation import treewidth_min_fill_in

from .model import Instance, UnitBallGraph, build_graph

LEAF, INTRODUCE, FORGET, JOIN = "leaf", "introduce", "forget", "join"

# Contraction graphs larger than this skip the min-fill fallback (it is cubic).
FILL_IN_LIMIT = 2000


@dataclass(frozen=True)
class WeightFunction:
    epsilon: Fraction = Fraction(1, 5)

    def __call__(self, t: int) -> float:
        if t < 1:
            raise ValueError("class sizes are positive")
        return float(self.epsilon) * math.log2(t) + 1.0


@dataclass
class KappaPartition:
    classes: list  # tuples of vertex indices
    cells: list  # (cx, cy) per class
    side: Fraction
    kappa: int = 1

    def class_of(self) -> dict:
        return {v: k for k, cls in enumerate(self.classes) for v in cls}


@dataclass
class ContractionGraph:
    adj: list  # set of neighbouring class indices per class
    sizes: list
    cells: list | None = None

    @property
    def n(self) -> int:
        return len(self.adj)

    def edges(self):
        return [(a, b) for a in range(self.n) for b in self.adj[a] if a < b]


@dataclass
class TreeDecomposition:
    """Rooted tree; bags hold class indices.  Tags are filled in for nice ones."""

    bags: list
    children: list
    root: int
    tags: list | None = None
    vertex: list | None = None  # class introduced/forgotten at each node

    @property
    def size(self) -> int:
        return len(self.bags)

    def postorder(self) -> list:
        order, stack = [], [(self.root, False)]
        while stack:
            node, done = stack.pop()
            if done:
                order.append(node)
                continue
            stack.append((node, True))
            for c in reversed(self.children[node]):
                stack.append((c, False))
        return order

    def parents(self) -> list:
        par = [None] * self.size
        for t, cs in enumerate(self.children):
            for c in cs:
                par[c] = t
        return par

    def max_bag(self) -> int:
        return max((len(b) for b in self.bags), default=0)


def cell_side(diameter: Fraction) -> Fraction:
    """Largest k / 2^20 times D whose square is at most D^2 / 2."""
    k = isqrt(1 << 39)
    return diameter * Fraction(k, 1 << 20)


def build_kappa_partition(inst: Instance) -> KappaPartition:
    if inst.dim != 2:
        raise ValueError("grid partition needs a 2-dimensional instance")
    s = cell_side(inst.diameter)
    buckets: dict = {}
    for i, (x, y) in enumerate(inst.points):
        buckets.setdefault((floor(x / s), floor(y / s)), []).append(i)
    cells = sorted(buckets)
    return KappaPartition([tuple(buckets[c]) for c in cells], cells, s)


def contraction_graph(partition: KappaPartition, graph: UnitBallGraph) -> ContractionGraph:
    masks = [sum(1 << v for v in cls) for cls in partition.classes]
    reach = []
    for cls in partition.classes:
        r = 0
        for v in cls:
            r |= graph.adj[v]
        reach.append(r)
    adj = [set() for _ in masks]
    for a in range(len(masks)):
        for b in range(a + 1, len(masks)):
            if reach[a] & masks[b]:
                adj[a].add(b)
                adj[b].add(a)
    return ContractionGraph(adj, [len(c) for c in partition.classes], list(partition.cells))


# -- construction ---------------------------------------------------------


def _components(nodes: set, adj) -> list:
    seen, out = set(), []
    for s in sorted(nodes):
        if s in seen:
            continue
        comp, stack = {s}, [s]
        seen.add(s)
        while stack:
            a = stack.pop()
            for b in adj[a]:
                if b in nodes and b not in seen:
                    seen.add(b)
                    comp.add(b)
                    stack.append(b)
        out.append(comp)
    return out


def separator_decomposition(cg: ContractionGraph, gamma: WeightFunction, leaf_size: int = 3) -> TreeDecomposition:
    """Recursive balanced line separators over cell coordinates."""
    if cg.cells is None:
        raise ValueError("separator decomposition needs cell coordinates")
    weight = [gamma(s) for s in cg.sizes]
    bags, children = [], []

    def new_node(bag):
        bags.append(frozenset(bag))
        children.append([])
        return len(bags) - 1

    def split(X):
        best = None
        for axis in (0, 1):
            coords = sorted(X, key=lambda a: (cg.cells[a][axis], a))
            lo, hi = cg.cells[coords[0]][axis], cg.cells[coords[-1]][axis]
            if lo == hi:
                continue
            total = sum(weight[a] for a in X)
            acc, cut = 0.0, None
            for a in coords:
                acc += weight[a]
                if acc >= total / 2:
                    cut = cg.cells[a][axis]
                    break
            if cut == lo:
                cut = lo + 1  # keep both sides non-empty
            left = {a for a in X if cg.cells[a][axis] < cut}
            right = X - left
            if not left or not right:
                continue
            s_left = {a for a in left if cg.adj[a] & right}
            s_right = {a for a in right if cg.adj[a] & left}
            sep = s_left if sum(weight[a] for a in s_left) <= sum(weight[a] for a in s_right) else s_right
            score = (sum(weight[a] for a in sep), max(len(left), len(right)))
            if best is None or score < best[0]:
                best = (score, sep)
        return None if best is None else best[1]

    def build(X: set, interface: frozenset) -> int:
        sep = split(X) if len(X) > leaf_size else None
        if sep is None:
            return new_node(interface | X)
        node = new_node(interface | sep)
        bag = bags[node]
        for part in _components(X - sep, cg.adj):
            sub_iface = frozenset(b for b in bag if cg.adj[b] & part)
            children[node].append(build(part, sub_iface))
        return node

    # Iterative driver over connected components keeps the recursion depth at O(log n).
    root = new_node(frozenset())
    for comp in _components(set(range(cg.n)), cg.adj):
        children[root].append(build(comp, frozenset()))
    return TreeDecomposition(bags, children, root)


def fill_in_decomposition(cg: ContractionGraph) -> TreeDecomposition:
    """Greedy min-fill elimination (networkx), rooted at an arbitrary bag."""
    g = nx.Graph()
    g.add_nodes_from(range(cg.n))
    g.add_edges_from(cg.edges())
    bags, children = [frozenset()], [[]]
    for comp in nx.connected_components(g):
        sub = g.subgraph(comp)
        if sub.number_of_nodes() == 1:
            bags.append(frozenset(comp))
            children.append([])
            children[0].append(len(bags) - 1)
            continue
        _, tree = treewidth_min_fill_in(sub)
        ids = {}
        for bag in tree.nodes:
            ids[bag] = len(bags)
            bags.append(frozenset(bag))
            children.append([])
        start = next(iter(tree.nodes))
        children[0].append(ids[start])
        for parent, child in nx.bfs_edges(tree, start):
            children[ids[parent]].append(ids[child])
    return TreeDecomposition(bags, children, 0)


def single_bag_decomposition(cg: ContractionGraph) -> TreeDecomposition:
    """Deliberately poor decomposition: everything in one bag."""
    return TreeDecomposition([frozenset(range(cg.n))], [[]], 0)


def weighted_width(td: TreeDecomposition, sizes, gamma: WeightFunction) -> float:
    return max((sum(gamma(sizes[p]) for p in bag) for bag in td.bags), default=0.0)


def tree_decomposition(cg: ContractionGraph, gamma: WeightFunction | None = None) -> TreeDecomposition:
    gamma = gamma or WeightFunction()
    candidates = []
    if cg.cells is not None:
        candidates.append(separator_decomposition(cg, gamma))
    if cg.n <= FILL_IN_LIMIT or not candidates:
        candidates.append(fill_in_decomposition(cg))
    best = min(candidates, key=lambda td: weighted_width(td, cg.sizes, gamma))
    report = validate(best, cg)
    assert report.ok, report.describe()
    return best


# -- nice decompositions ----------------------------------------------------


def to_nice(td: TreeDecomposition, cg: ContractionGraph | None = None) -> TreeDecomposition:
    """Leaf/introduce/forget/join form with an empty root bag, same width."""
    if cg is not None:
        report = validate(td, cg)
        if not report.ok:
            raise ValueError(f"invalid tree decomposition: {report.describe()}")
    bags, children, tags, vertex = [], [], [], []

    def add(bag, tag, kids, v=None):
        bags.append(frozenset(bag))
        children.append(list(kids))
        tags.append(tag)
        vertex.append(v)
        return len(bags) - 1

    def morph(node, target):
        bag = bags[node]
        for v in sorted(bag - target):
            bag = bag - {v}
            node = add(bag, FORGET, [node], v)
        for v in sorted(target - bag):
            bag = bag | {v}
            node = add(bag, INTRODUCE, [node], v)
        return node

    built = {}
    for t in td.postorder():
        target = td.bags[t]
        if not td.children[t]:
            node = morph(add(frozenset(), LEAF, []), target)
        else:
            branches = [morph(built.pop(c), target) for c in td.children[t]]
            node = branches[0]
            for other in branches[1:]:
                node = add(target, JOIN, [node, other])
        built[t] = node
    root = morph(built[td.root], frozenset())
    return TreeDecomposition(bags, children, root, tags, vertex)


@dataclass
class DecompositionReport:
    missing_edges: list = field(default_factory=list)
    missing_classes: list = field(default_factory=list)
    disconnected: list = field(default_factory=list)
    not_a_tree: bool = False
    nice_violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (
            self.missing_edges or self.missing_classes or self.disconnected or self.not_a_tree or self.nice_violations
        )

    def describe(self) -> str:
        if self.ok:
            return "valid"
        parts = []
        if self.not_a_tree:
            parts.append("node structure is not a rooted tree")
        if self.missing_edges:
            parts.append(f"edges in no bag: {self.missing_edges[:5]}")
        if self.missing_classes:
            parts.append(f"classes in no bag: {self.missing_classes[:5]}")
        if self.disconnected:
            parts.append(f"classes whose bags are disconnected: {self.disconnected[:5]}")
        if self.nice_violations:
            parts.append(f"niceness violations at nodes: {self.nice_violations[:5]}")
        return "; ".join(parts)


def validate(td: TreeDecomposition, cg: ContractionGraph) -> DecompositionReport:
    report = DecompositionReport()
    par = td.parents()
    reached = td.postorder()
    if len(reached) != td.size or len(set(reached)) != td.size or par[td.root] is not None:
        report.not_a_tree = True
        return report
    where: dict = {}
    for t, bag in enumerate(td.bags):
        for p in bag:
            where.setdefault(p, []).append(t)
    for p in range(cg.n):
        nodes = where.get(p)
        if not nodes:
            report.missing_classes.append(p)
            continue
        # Connected iff exactly one node of the set has its parent outside the set.
        node_set = set(nodes)
        tops = [t for t in nodes if par[t] is None or par[t] not in node_set]
        if len(tops) != 1:
            report.disconnected.append(p)
    for a, b in cg.edges():
        if not any(a in td.bags[t] and b in td.bags[t] for t in where.get(a, [])):
            report.missing_edges.append((a, b))
    if td.tags is not None:
        report.nice_violations = nice_violations(td)
    return report


def nice_violations(td: TreeDecomposition) -> list:
    bad = []
    if td.bags[td.root]:
        bad.append(td.root)
    for t, tag in enumerate(td.tags):
        kids = td.children[t]
        bag = td.bags[t]
        v = td.vertex[t]
        if tag == LEAF:
            ok = not kids and not bag
        elif tag == INTRODUCE:
            ok = len(kids) == 1 and v not in td.bags[kids[0]] and bag == td.bags[kids[0]] | {v}
        elif tag == FORGET:
            ok = len(kids) == 1 and v in td.bags[kids[0]] and bag == td.bags[kids[0]] - {v}
        elif tag == JOIN:
            ok = len(kids) == 2 and all(td.bags[c] == bag for c in kids)
        else:
            ok = False
        if not ok:
            bad.append(t)
    return bad


def decompose(inst: Instance, graph: UnitBallGraph | None = None, gamma: WeightFunction | None = None):
    """Partition, contraction graph and nice decomposition in one call."""
    graph = graph or build_graph(inst)
    gamma = gamma or WeightFunction()
    partition = build_kappa_partition(inst)
    cg = contraction_graph(partition, graph)
    nice = to_nice(tree_decomposition(cg, gamma))
    return partition, cg, nice


def dump_decomposition(td: TreeDecomposition, cg: ContractionGraph, gamma: WeightFunction) -> str:
    doc = {
        "weighted_width": weighted_width(td, cg.sizes, gamma),
        "root": td.root,
        "nodes": [
            {
                "id": t,
                "tag": td.tags[t] if td.tags else None,
                "bag": sorted(td.bags[t]),
                "children": td.children[t],
            }
            for t in range(td.size)
        ],
    }
    return json.dumps(doc, indent=1) + "\n"
