"""Grid-embedded SAT to clique cover on unit disk graphs (threshold 1).

Every variable becomes a paw of four disks around its grid vertex, every
clause a single disk, and every variable/clause incidence a wire of disks
on consecutive grid points.  After doubling the grid each wire has an even
number of edges and the formula is satisfiable iff the points admit a
cover by n + L/2 cliques (L = total wire length).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from ..model import Instance, build_graph

HALF = Fraction(1, 2)
DIRECTIONS = ((1, 0), (0, 1), (-1, 0), (0, -1))

# Gadget disks in a local frame (e1, e2) around the variable vertex.  The
# unused grid direction is always -e2.  "attach" names the local direction
# of the wire each connection disk touches.
TEMPLATES = {
    # negative literal leaves along e2
    "A": {
        "u": (-HALF, -HALF),
        "u'": (HALF, -HALF),
        "v": (0, -HALF),
        "w": (0, HALF),
        "attach": {"u": (-1, 0), "u'": (1, 0), "w": (0, 1)},
    },
    # negative literal leaves along e1
    "B": {
        "u": (-HALF, 0),
        "u'": (0, HALF),
        "v": (0, -HALF),
        "w": (HALF, -HALF),
        "attach": {"u": (-1, 0), "u'": (0, 1), "w": (1, 0)},
    },
}
PAW_EDGES = (("u", "u'"), ("u", "v"), ("u'", "v"), ("v", "w"))


class ReductionError(ValueError):
    pass


# -- formulas ------------------------------------------------------------


def parse_literal(lit) -> tuple:
    """'x' -> ('x', True), '-x' or '~x' -> ('x', False); ints follow DIMACS signs."""
    if isinstance(lit, bool):
        raise ReductionError(f"bad literal {lit!r}")
    if isinstance(lit, int):
        if lit == 0:
            raise ReductionError("literal 0 is not allowed")
        return (str(abs(lit)), lit > 0)
    if isinstance(lit, str):
        s = lit.strip()
        if s[:1] in "-~¬":
            return (s[1:].strip(), False)
        return (s, True)
    if isinstance(lit, (tuple, list)) and len(lit) == 2:
        return (str(lit[0]), bool(lit[1]))
    raise ReductionError(f"bad literal {lit!r}")


def format_literal(lit) -> str:
    name, positive = lit
    return name if positive else "-" + name


@dataclass(frozen=True)
class NormalizedFormula:
    """Every variable occurs twice positively and once negatively.

    ``flipped`` lists variables whose polarity was inverted during
    normalization; ``dropped`` the input clauses removed with pure variables.
    """

    variables: tuple
    clauses: tuple  # tuples of (name, positive)
    occurrences: dict = field(compare=False)  # name -> ((clause, clause), clause)
    flipped: frozenset = frozenset()
    dropped: tuple = ()

    def evaluate(self, assignment: dict) -> bool:
        return all(any(assignment[v] == pos for v, pos in c) for c in self.clauses)

    def to_dict(self) -> dict:
        return {"clauses": [[format_literal(l) for l in c] for c in self.clauses]}


def _count(clauses):
    occ: dict = {}
    for ci, clause in enumerate(clauses):
        for name, pos in clause:
            occ.setdefault(name, ([], []))[0 if pos else 1].append(ci)
    return occ


def normalize_formula(clauses) -> NormalizedFormula:
    """Bring a (3,3)-CNF into the two-positive/one-negative shape.

    Pure variables have their clauses deleted, variables with two negative
    and one positive occurrence are flipped; both steps repeat until
    nothing changes.  Any other pattern (1 positive / 1 negative) is
    rejected.
    """
    work = []
    for clause in clauses:
        lits = tuple(parse_literal(l) for l in clause)
        if not lits:
            raise ReductionError("empty clause")
        if len(lits) > 3:
            raise ReductionError(f"clause {clause!r} has more than three literals")
        work.append(lits)
    for name, (pos, neg) in _count(work).items():
        if len(pos) + len(neg) > 3:
            raise ReductionError(f"variable {name!r} occurs more than three times")

    flipped: set = set()
    dropped: list = []
    changed = True
    while changed:
        changed = False
        occ = _count(work)
        for name in sorted(occ):
            pos, neg = occ[name]
            if not pos or not neg:
                gone = set(pos) | set(neg)
                dropped.extend(work[i] for i in sorted(gone))
                work = [c for i, c in enumerate(work) if i not in gone]
                changed = True
                break
            if len(pos) == 1 and len(neg) == 2:
                work = [tuple((v, p != (v == name)) for v, p in c) for c in work]
                flipped ^= {name}
                changed = True
                break
            if len(pos) == 1 and len(neg) == 1:
                raise ReductionError(f"variable {name!r} occurs once positively and once negatively; no normalization applies")
            if len(pos) != 2 or len(neg) != 1:
                raise ReductionError(f"variable {name!r} has pattern {len(pos)}+/{len(neg)}-")

    occ = _count(work)
    variables = tuple(sorted(occ))
    occurrences = {v: (tuple(occ[v][0]), occ[v][1][0]) for v in variables}
    return NormalizedFormula(variables, tuple(work), occurrences, frozenset(flipped), tuple(dropped))


def load_formula(doc) -> list:
    if isinstance(doc, str):
        doc = json.loads(doc)
    if not isinstance(doc, dict) or not isinstance(doc.get("clauses"), list):
        raise ReductionError("formula document needs a 'clauses' list")
    return doc["clauses"]


# -- embeddings ----------------------------------------------------------


@dataclass(frozen=True)
class Wire:
    variable: str
    clause: int
    path: tuple  # grid points from the variable vertex to the clause vertex


@dataclass(frozen=True)
class GridEmbedding:
    variables: dict  # name -> (i, j)
    clauses: tuple  # clause index -> (i, j)
    wires: tuple

    @property
    def total_length(self) -> int:
        return sum(len(w.path) - 1 for w in self.wires)

    def refine(self, factor: int = 2) -> "GridEmbedding":
        """Scale by `factor`, filling in the intermediate grid points of every wire."""

        def scale(p):
            return (p[0] * factor, p[1] * factor)

        wires = []
        for w in self.wires:
            path = [scale(w.path[0])]
            for a, b in zip(w.path, w.path[1:]):
                dx, dy = b[0] - a[0], b[1] - a[1]
                for s in range(1, factor + 1):
                    path.append((a[0] * factor + dx * s, a[1] * factor + dy * s))
            wires.append(Wire(w.variable, w.clause, tuple(path)))
        return GridEmbedding(
            {v: scale(p) for v, p in self.variables.items()},
            tuple(scale(c) for c in self.clauses),
            tuple(wires),
        )

    def directions(self, variable: str) -> dict:
        """Clause index -> unit step of the wire leaving the variable."""
        out = {}
        for w in self.wires:
            if w.variable == variable:
                a, b = w.path[0], w.path[1]
                out[w.clause] = (b[0] - a[0], b[1] - a[1])
        return out


def load_embedding(doc) -> GridEmbedding:
    if isinstance(doc, str):
        doc = json.loads(doc)
    try:
        variables = {k: tuple(v) for k, v in doc["variables"].items()}
        clauses = tuple(tuple(c) for c in doc["clauses"])
        wires = tuple(Wire(w["variable"], int(w["clause"]), tuple(tuple(p) for p in w["path"])) for w in doc["wires"])
    except (KeyError, TypeError, AttributeError) as exc:
        raise ReductionError(f"malformed embedding: {exc}") from exc
    return GridEmbedding(variables, clauses, wires)


def check_embedding(phi: NormalizedFormula, emb: GridEmbedding, refined: bool = True) -> None:
    """Raise ReductionError unless emb is a valid grid embedding of phi's incidence graph."""
    if set(emb.variables) != set(phi.variables):
        raise ReductionError("embedding variables differ from the formula's")
    if len(emb.clauses) != len(phi.clauses):
        raise ReductionError("embedding has a different number of clauses")
    sites = list(emb.variables.values()) + list(emb.clauses)
    if len(set(sites)) != len(sites):
        raise ReductionError("two gadgets share a grid point")
    expected = sorted((v, ci) for ci, c in enumerate(phi.clauses) for v, _ in c)
    got = sorted((w.variable, w.clause) for w in emb.wires)
    if expected != got:
        raise ReductionError("wires do not match the literal occurrences")
    site_set = set(sites)
    used: set = set()
    for w in emb.wires:
        if w.path[0] != emb.variables[w.variable] or w.path[-1] != emb.clauses[w.clause]:
            raise ReductionError(f"wire {w.variable}->{w.clause} has wrong endpoints")
        for a, b in zip(w.path, w.path[1:]):
            if abs(a[0] - b[0]) + abs(a[1] - b[1]) != 1:
                raise ReductionError(f"wire {w.variable}->{w.clause} takes a non-grid step {a}->{b}")
        inner = w.path[1:-1]
        if len(set(inner)) != len(inner) or used & set(inner) or site_set & set(inner):
            raise ReductionError(f"wire {w.variable}->{w.clause} is not vertex-disjoint")
        used |= set(inner)
        if refined and (len(w.path) - 1) % 2:
            raise ReductionError(f"wire {w.variable}->{w.clause} has odd length")
    for v in phi.variables:
        dirs = list(emb.directions(v).values())
        if len(set(dirs)) != 3:
            raise ReductionError(f"wires of {v!r} must leave in three distinct directions")


def _gadget_frame(phi: NormalizedFormula, emb: GridEmbedding, v: str):
    dirs = emb.directions(v)
    (p1, p2), neg = phi.occurrences[v]
    free = [d for d in DIRECTIONS if d not in dirs.values()][0]
    e2 = (-free[0], -free[1])
    d_neg = dirs[neg]
    if d_neg == e2:
        case = "A"
        e1 = dirs[p1]
    else:
        case = "B"
        e1 = d_neg
    return case, e1, e2, dirs


def _place(center, e1, e2, local):
    a, b = local
    return (center[0] + a * e1[0] + b * e2[0], center[1] + a * e1[1] + b * e2[1])


@dataclass
class SatInstance:
    instance: Instance
    k: int
    L: int
    roles: list  # per point: ("gadget", var, name) | ("wire", var, clause, step) | ("clause", index)
    abstract_edges: set


def build_sat_instance(phi: NormalizedFormula, emb: GridEmbedding) -> SatInstance:
    """Place the disks for a (2-refined) embedding and audit the resulting graph."""
    check_embedding(phi, emb)
    coords: list = []
    roles: list = []
    index: dict = {}

    def add(p, role):
        index[role] = len(coords)
        coords.append((Fraction(p[0]), Fraction(p[1])))
        roles.append(role)

    attach_of: dict = {}
    for v in phi.variables:
        case, e1, e2, dirs = _gadget_frame(phi, emb, v)
        tpl = TEMPLATES[case]
        center = emb.variables[v]
        for name in ("u", "u'", "v", "w"):
            add(_place(center, e1, e2, tpl[name]), ("gadget", v, name))
        by_dir = {_place((0, 0), e1, e2, d): name for name, d in tpl["attach"].items()}
        (p1, p2), neg = phi.occurrences[v]
        for ci, d in dirs.items():
            conn = by_dir[d]
            if (conn == "w") != (ci == neg):
                raise ReductionError(f"variable {v!r}: the negative wire does not meet w")
            attach_of[(v, ci)] = conn
    for ci, c in enumerate(emb.clauses):
        add(c, ("clause", ci))
    edges = set()
    for v in phi.variables:
        for a, b in PAW_EDGES:
            edges.add(frozenset((index[("gadget", v, a)], index[("gadget", v, b)])))
    for w in emb.wires:
        prev = index[("gadget", w.variable, attach_of[(w.variable, w.clause)])]
        for step, p in enumerate(w.path[1:-1], start=1):
            add(p, ("wire", w.variable, w.clause, step))
            cur = index[("wire", w.variable, w.clause, step)]
            edges.add(frozenset((prev, cur)))
            prev = cur
        edges.add(frozenset((prev, index[("clause", w.clause)])))

    inst = Instance(2, Fraction(1), tuple(coords), tuple(_role_label(r) for r in roles))
    L = emb.total_length
    out = SatInstance(inst, len(phi.variables) + L // 2, L, roles, edges)
    audit(out)
    return out


def _role_label(role) -> str:
    if role[0] == "gadget":
        return f"{role[1]}.{role[2]}"
    if role[0] == "clause":
        return f"C{role[1]}"
    return f"{role[1]}>C{role[2]}#{role[3]}"


def audit(si: SatInstance) -> None:
    """The unit disk graph must be exactly the intended gadget graph."""
    graph = build_graph(si.instance)
    actual = {frozenset(e) for e in graph.edges()}
    if actual != si.abstract_edges:
        extra = [tuple(sorted(e)) for e in actual - si.abstract_edges]
        missing = [tuple(sorted(e)) for e in si.abstract_edges - actual]
        label = si.instance.labels
        raise ReductionError(
            "disk placement does not realise the gadget graph: "
            f"unexpected {[(label[a], label[b]) for a, b in extra][:5]}, "
            f"missing {[(label[a], label[b]) for a, b in missing][:5]}"
        )
    # One gadget disk per wire touches the first wire disk.
    for i, role in enumerate(si.roles):
        if role[0] == "wire" and role[3] == 1:
            touching = [j for j in range(graph.n) if graph.adjacent(i, j) and si.roles[j][0] == "gadget"]
            if len(touching) != 1:
                raise ReductionError(f"wire disk {si.instance.labels[i]} meets {len(touching)} gadget disks")


def generate(formula_doc, embedding_doc, refine: bool = True) -> SatInstance:
    phi = normalize_formula(load_formula(formula_doc))
    emb = load_embedding(embedding_doc)
    check_embedding(phi, emb, refined=False)
    if refine:
        emb = emb.refine(2)
    return build_sat_instance(phi, emb)
