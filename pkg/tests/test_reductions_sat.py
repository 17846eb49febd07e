import json
from importlib.resources import files

import pytest

from diamcover.model import build_graph
from diamcover.oracles import branch_and_bound_min_cover, truth_table_sat
from diamcover.reductions.sat import (
    GridEmbedding,
    ReductionError,
    Wire,
    build_sat_instance,
    check_embedding,
    generate,
    load_embedding,
    load_formula,
    normalize_formula,
)

DATA = files("diamcover.data")


def _fixture(name):
    return DATA.joinpath(f"{name}.json").read_text(), DATA.joinpath(f"{name}_embedding.json").read_text()


PHI_S = [["x", "y"], ["x", "-y"], ["y", "-x"]]


def _parse(raw):
    return [[(l.lstrip("-"), not l.startswith("-")) for l in c] for c in raw]


def test_pure_variable_clauses_are_deleted():
    # p is pure; once its clause is gone q only occurs negatively and goes too.
    phi = normalize_formula(PHI_S + [["p", "q"], ["-q"]])
    assert phi.clauses == tuple(tuple(c) for c in _parse(PHI_S))
    assert len(phi.dropped) == 2


def test_two_negative_one_positive_is_flipped():
    raw = [["-x", "y"], ["-x", "y"], ["x", "-y"]]
    phi = normalize_formula(raw)
    assert phi.flipped == {"x"}
    counts = {}
    for c in phi.clauses:
        for v, pos in c:
            counts.setdefault(v, [0, 0])[0 if pos else 1] += 1
    assert counts == {"x": [2, 1], "y": [2, 1]}
    assert (truth_table_sat(_parse(raw)) is None) == (truth_table_sat(phi.clauses) is None)


def test_one_and_one_is_rejected():
    with pytest.raises(ReductionError, match="once positively and once negatively"):
        normalize_formula([["x", "y"], ["-x", "y"], ["-y"]])


def test_too_many_occurrences_rejected():
    with pytest.raises(ReductionError):
        normalize_formula([["x"], ["x"], ["x"], ["-x"]])
    with pytest.raises(ReductionError):
        normalize_formula([["a", "b", "c", "d"]])


def test_phi_s_is_already_normalized():
    text, _ = _fixture("phi_s")
    raw = load_formula(text)
    phi = normalize_formula(raw)
    assert not phi.flipped and not phi.dropped
    assert [[f"{'' if p else '-'}{v}" for v, p in c] for c in phi.clauses] == raw
    assert truth_table_sat(phi.clauses) is not None


def test_phi_u_is_normalized_and_unsat():
    text, _ = _fixture("phi_u")
    phi = normalize_formula(load_formula(text))
    assert not phi.flipped and not phi.dropped
    assert phi.variables == ("a", "b", "c")
    assert truth_table_sat(phi.clauses) is None


@pytest.mark.parametrize("name,satisfiable", [("phi_s", True), ("phi_u", False)])
def test_fixture_cover_bound(name, satisfiable):
    si = generate(*_fixture(name))
    k, cover = branch_and_bound_min_cover(build_graph(si.instance))
    assert si.L % 2 == 0
    assert si.k == len({r[1] for r in si.roles if r[0] == "gadget"}) + si.L // 2
    assert k >= si.k
    assert (k == si.k) == satisfiable


def test_phi_s_sizes():
    si = generate(*_fixture("phi_s"))
    assert si.L == 20 and si.k == 12 and si.instance.n == 25
    assert si.instance.diameter == 1


def test_refinement_doubles_lengths():
    _, emb_text = _fixture("phi_s")
    emb = load_embedding(emb_text)
    ref = emb.refine(2)
    assert ref.total_length == 2 * emb.total_length
    for w in ref.wires:
        assert (len(w.path) - 1) % 2 == 0


def test_invalid_embeddings_rejected():
    phi = normalize_formula([["x", "y"], ["x", "-y"], ["y", "-x"]])
    _, emb_text = _fixture("phi_s")
    emb = load_embedding(json.loads(emb_text)).refine(2)
    with pytest.raises(ReductionError):
        check_embedding(phi, GridEmbedding(emb.variables, emb.clauses, emb.wires[:-1]))
    bent = list(emb.wires)
    w = bent[0]
    bent[0] = Wire(w.variable, w.clause, w.path[:1] + ((5, 5),) + w.path[2:])
    with pytest.raises(ReductionError):
        check_embedding(phi, GridEmbedding(emb.variables, emb.clauses, tuple(bent)))


def test_unrefined_embedding_rejected_by_builder():
    phi = normalize_formula([["x", "y"], ["x", "-y"], ["y", "-x"]])
    emb = load_embedding(_fixture("phi_s")[1])
    with pytest.raises(ReductionError, match="odd length"):
        build_sat_instance(phi, emb)


def test_each_wire_meets_one_gadget_disk():
    si = generate(*_fixture("phi_u"))
    g = build_graph(si.instance)
    firsts = [i for i, r in enumerate(si.roles) if r[0] == "wire" and r[3] == 1]
    assert len(firsts) == 9
    for i in firsts:
        touching = [j for j in range(g.n) if g.adjacent(i, j) and si.roles[j][0] == "gadget"]
        assert len(touching) == 1


def test_audit_catches_touching_wires():
    # Two wires on neighbouring grid lines touch although the gadget graph has no such edge.
    phi = normalize_formula(PHI_S)
    emb = load_embedding(_fixture("phi_s")[1]).refine(2)
    wires = list(emb.wires)
    w = wires[1]  # x -> C1, straight (0,0)-(2,0)
    assert w.path == ((0, 0), (1, 0), (2, 0))
    moved_clause = (2, 0)
    wires[0] = Wire("x", 0, ((0, 0), (0, 1), (1, 1), (2, 1), (2, 2)))
    with pytest.raises(ReductionError, match="does not realise"):
        build_sat_instance(phi, GridEmbedding(emb.variables, emb.clauses, tuple(wires)))
