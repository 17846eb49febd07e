import csv
import json
from importlib.resources import files

import pytest

from diamcover.cli import EXIT_INPUT, EXIT_OK, EXIT_VIOLATION, main
from diamcover.model import CliqueCover, gen_random, serialize_cover, serialize_instance

DATA = files("diamcover.data")


@pytest.fixture
def tiny(tmp_path):
    path = tmp_path / "tiny.json"
    path.write_text(serialize_instance(gen_random(9, 3, 2, seed=7)))
    return path


def _solve(path, out, oracle):
    assert main(["solve", "--input", str(path), "--output", str(out), "--oracle", oracle, "--verify"]) == EXIT_OK
    return json.loads(out.read_text())


def test_solve_engines_agree(tiny, tmp_path):
    dp = _solve(tiny, tmp_path / "dp.json", "dp")
    brute = _solve(tiny, tmp_path / "brute.json", "brute")
    bnb = _solve(tiny, tmp_path / "bnb.json", "bnb")
    assert dp["k"] == brute["k"] == bnb["k"]
    assert dp["verified"]


def test_solve_output_is_deterministic(tiny, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    _solve(tiny, a, "dp")
    _solve(tiny, b, "dp")
    assert a.read_bytes() == b.read_bytes()


def test_empty_instance(tmp_path):
    path = tmp_path / "empty.json"
    path.write_text('{"dim": 2, "diameter": "1", "points": []}')
    assert _solve(path, tmp_path / "out.json", "dp")["k"] == 0


def test_malformed_input_exits_with_input_code(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"dim": 2, "diameter": "1", "points": [[0.5, 1]]}')
    assert main(["solve", "--input", str(path)]) == EXIT_INPUT
    assert "error" in capsys.readouterr().err
    assert main(["solve", "--input", str(tmp_path / "missing.json")]) == EXIT_INPUT
    assert main(["no-such-command"]) == EXIT_INPUT


def test_generate_random_is_byte_identical(tmp_path):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / f"{name}.json"
        args = ["generate", "random", "--n", "25", "--box", "6", "--seed", "11", "--output", str(out)]
        assert main(args) == EXIT_OK
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_generate_color3_writes_certificate(tmp_path):
    graph = tmp_path / "k4.json"
    graph.write_text(json.dumps({"n": 4, "edges": [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]]}))
    out = tmp_path / "k4_r5.json"
    assert main(["generate", "color3", "--graph", str(graph), "--output", str(out)]) == EXIT_OK
    doc = json.loads(out.read_text())
    assert doc["target_k"] == 3 and doc["dim"] == 5
    cert = json.loads(out.with_suffix(".cert.json").read_text())
    assert cert["certificate"]["accepted"]
    assert main(["certify", "--graph", str(graph), "--output", str(tmp_path / "c.json")]) == EXIT_OK


def test_generate_sat_header(tmp_path):
    out = tmp_path / "phi_u.json"
    args = [
        "generate", "sat",
        "--formula", str(DATA.joinpath("phi_u.json")),
        "--embedding", str(DATA.joinpath("phi_u_embedding.json")),
        "--output", str(out),
    ]
    assert main(args) == EXIT_OK
    doc = json.loads(out.read_text())
    # three variables survive normalization
    assert doc["target_k"] == 3 + doc["wire_length"] // 2 == 20


def test_verify_exit_codes(tiny, tmp_path):
    sol = _solve(tiny, tmp_path / "sol.json", "bnb")
    good = tmp_path / "good.json"
    good.write_text(serialize_cover(CliqueCover.of(sol["cliques"])))
    assert main(["verify", "--input", str(tiny), "--cover", str(good)]) == EXIT_OK
    bad = tmp_path / "bad.json"
    bad.write_text(serialize_cover(CliqueCover.of([list(range(9))])))
    assert main(["verify", "--input", str(tiny), "--cover", str(bad)]) == EXIT_VIOLATION


def test_bench_rows(tmp_path):
    out = tmp_path / "bench.csv"
    args = ["bench", "--sizes", "20,40,60", "--seeds", "2", "--decompose-only", "--output", str(out)]
    assert main(args) == EXIT_OK
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 6
    assert {int(r["n"]) for r in rows} == {20, 40, 60}
    assert all(float(r["width"]) > 0 for r in rows)


def test_cliques_dump(tiny, tmp_path):
    out = tmp_path / "cl.json"
    assert main(["cliques", "--input", str(tiny), "--output", str(out)]) == EXIT_OK
    doc = json.loads(out.read_text())
    assert sorted(v for c in doc["classes"] for v in c["members"]) == list(range(9))
