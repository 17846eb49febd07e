"""Command-line entry point: ``python -m diamcover <command> ...``.

Exit codes: 0 success, 1 a property check failed, 2 bad input,
3 an escalation or precision cap was hit.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import oracles
from .cliques import relevant_cliques
from .decomposition import WeightFunction, build_kappa_partition, contraction_graph, tree_decomposition, weighted_width
from .model import (
    ParseError,
    _dump,
    build_graph,
    gen_random,
    parse_cover,
    parse_instance,
    serialize_instance,
    verify_cover,
)
from .reductions import coloring, sat
from .solver import DEFAULT_HALFPLANES, DEFAULT_LAMBDA, EscalationCapReached, solve

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT, EXIT_CAP = 0, 1, 2, 3

log = logging.getLogger("diamcover")


class InputError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    input: Path | None = None
    output: Path | None = None
    oracle: str = "dp"
    lam: int = DEFAULT_LAMBDA
    halfplanes: int = DEFAULT_HALFPLANES
    epsilon: Fraction = Fraction(1, 5)
    seed: int = 0
    jobs: int = 1
    precision_cap: int = coloring.PRECISION_CAP
    verify: bool = False
    extra: dict = field(default_factory=dict)

    def validate(self) -> None:
        if self.lam < 1 or self.lam > 64:
            raise InputError("--lambda must lie in [1, 64]")
        if self.halfplanes < 0 or self.halfplanes > 8:
            raise InputError("--halfplanes must lie in [0, 8]")
        if not 0 < self.epsilon <= 1:
            raise InputError("--epsilon must lie in (0, 1]")
        if self.jobs < 1:
            raise InputError("--jobs must be positive")
        if self.precision_cap < 64:
            raise InputError("--precision-cap must be at least 64 bits")
        if self.input is not None and not self.input.is_file():
            raise InputError(f"cannot read {self.input}")
        if self.output is not None and not self.output.parent.exists():
            raise InputError(f"output directory {self.output.parent} does not exist")


def _read(path: Path | None) -> str:
    if path is None:
        return sys.stdin.read()
    try:
        return path.read_text()
    except OSError as exc:
        raise InputError(str(exc)) from exc


def _write(cfg: RunConfig, text: str) -> None:
    if cfg.output is None:
        sys.stdout.write(text)
    else:
        cfg.output.write_text(text)


def _read_json(path: Path) -> dict:
    try:
        return json.loads(_read(path))
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON: {exc}") from exc


# -- commands ------------------------------------------------------------


def cmd_solve(cfg: RunConfig) -> int:
    inst = parse_instance(_read(cfg.input))
    graph = build_graph(inst)
    doc: dict = {"engine": cfg.oracle, "n": inst.n}
    if cfg.oracle == "dp":
        res = solve(inst, cfg.lam, cfg.halfplanes, gamma=WeightFunction(cfg.epsilon))
        cover = res.cover
        stats = res.stats.as_dict()
        stats.pop("wall_time", None)
        doc.update(lam=res.lam, halfplanes=res.h, stats=stats)
    elif cfg.oracle == "brute":
        _, cover = oracles.brute_force_min_cover(graph)
    elif cfg.oracle == "bnb":
        _, cover = oracles.branch_and_bound_min_cover(graph)
    else:
        raise InputError(f"unknown oracle {cfg.oracle!r}")
    doc["k"] = len(cover)
    doc["cliques"] = [list(c) for c in cover.cliques]
    if cfg.verify:
        report = verify_cover(inst, cover)
        doc["verified"] = report.ok
        if not report.ok:
            log.error("witness rejected: %s", report.describe())
            _write(cfg, _dump(doc))
            return EXIT_VIOLATION
    _write(cfg, _dump(doc))
    return EXIT_OK


def cmd_generate(cfg: RunConfig) -> int:
    kind = cfg.extra["kind"]
    if kind == "random":
        inst = gen_random(cfg.extra["n"], cfg.extra["box"], cfg.extra["diameter"], cfg.seed)
        _write(cfg, serialize_instance(inst))
        return EXIT_OK
    if kind == "sat":
        formula = _read(cfg.extra["formula"])
        embedding = _read(cfg.extra["embedding"])
        si = sat.generate(formula, embedding, refine=not cfg.extra.get("refined", False))
        _write(cfg, serialize_instance(si.instance, {"target_k": si.k, "wire_length": si.L}))
        return EXIT_OK
    if kind == "color3":
        doc = _read_json(cfg.extra["graph"])
        n, edges = _graph_doc(doc)
        r5 = coloring.build_r5_instance(n, edges, precision_cap=cfg.precision_cap)
        _write(cfg, serialize_instance(r5.instance, {"target_k": r5.k}))
        cert_path = cfg.extra.get("certificate")
        if cert_path is None and cfg.output is not None:
            cert_path = cfg.output.with_suffix(".cert.json")
        if cert_path is not None:
            Path(cert_path).write_text(json.dumps(r5.sidecar(), indent=2, sort_keys=True) + "\n")
        return EXIT_OK
    raise InputError(f"unknown generator {kind!r}")


def _graph_doc(doc) -> tuple:
    try:
        n = int(doc["n"])
        edges = [tuple(int(x) for x in e) for e in doc["edges"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"graph document needs 'n' and 'edges': {exc}") from exc
    return n, edges


def cmd_verify(cfg: RunConfig) -> int:
    inst = parse_instance(_read(cfg.input))
    cover = parse_cover(_read(cfg.extra["cover"]))
    try:
        report = verify_cover(inst, cover)
    except IndexError as exc:
        raise InputError(str(exc)) from exc
    print(report.describe())
    return EXIT_OK if report.ok else EXIT_VIOLATION


def cmd_certify(cfg: RunConfig) -> int:
    n, edges = _graph_doc(_read_json(cfg.extra["graph"]))
    G = coloring.build_enhanced_graph(n, edges)
    params = coloring.choose_embedding_params(n, len(G.edges), precision_cap=cfg.precision_cap)
    bits = max(cfg.extra.get("precision") or params.bits, params.bits)
    cert, _ = coloring.certify_embedding(G, params, bits=bits, precision_cap=cfg.precision_cap)
    report = {"params": params.as_dict(), "certificate": cert.as_dict()}
    _write(cfg, json.dumps(report, indent=2, sort_keys=True) + "\n")
    if cert.wrong_side:
        return EXIT_VIOLATION
    if cert.straddling:
        return EXIT_CAP
    return EXIT_OK


def bench_row(args) -> dict:
    n, seed, degree, decompose_only, eps = args
    box = box_for_degree(n, degree)
    inst = gen_random(n, box, 1, seed)
    gamma = WeightFunction(eps)
    t0 = time.perf_counter()
    graph = build_graph(inst)
    part = build_kappa_partition(inst)
    cg = contraction_graph(part, graph)
    td = tree_decomposition(cg, gamma)
    width = weighted_width(td, cg.sizes, gamma)
    k = ""
    if not decompose_only:
        k = solve(inst, gamma=gamma).k
    return {"n": n, "seed": seed, "wall_time": round(time.perf_counter() - t0, 4), "width": round(width, 4), "classes": cg.n, "k": k}


def box_for_degree(n: int, degree: float) -> Fraction:
    """Box side (D = 1) giving roughly the requested average degree for n uniform points."""
    side = math.sqrt(max(n - 1, 1) * math.pi / max(degree, 1e-9))
    return Fraction(side).limit_denominator(1000)


def cmd_bench(cfg: RunConfig) -> int:
    sizes = cfg.extra["sizes"]
    seeds = range(cfg.seed, cfg.seed + cfg.extra["seeds"])
    tasks = [(n, s, cfg.extra["degree"], cfg.extra["decompose_only"], cfg.epsilon) for s in seeds for n in sizes]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(cfg.jobs) as pool:
            rows = list(pool.map(bench_row, tasks))
    else:
        rows = [bench_row(t) for t in tasks]
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=["n", "seed", "wall_time", "width", "classes", "k"], lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    _write(cfg, buf.getvalue())
    return EXIT_OK


def cmd_cliques(cfg: RunConfig) -> int:
    inst = parse_instance(_read(cfg.input))
    graph = build_graph(inst)
    part = build_kappa_partition(inst)
    doc = {"classes": []}
    for cls in part.classes:
        rel = relevant_cliques(inst, cls, cfg.halfplanes, graph)
        doc["classes"].append({"members": list(rel.base), "cliques": [list(c) for c in rel.cliques]})
    _write(cfg, json.dumps(doc, indent=1) + "\n")
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "generate": cmd_generate,
    "verify": cmd_verify,
    "certify": cmd_certify,
    "bench": cmd_bench,
    "cliques": cmd_cliques,
}


# -- argument parsing ----------------------------------------------------


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def _sizes(text: str) -> list:
    try:
        return [int(x) for x in text.split(",") if x]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad size list {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", type=Path)
    common.add_argument("--output", type=Path)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--precision-cap", type=int, default=coloring.PRECISION_CAP)
    common.add_argument("--lambda", dest="lam", type=int, default=DEFAULT_LAMBDA)
    common.add_argument("--halfplanes", type=int, default=DEFAULT_HALFPLANES)
    common.add_argument("--epsilon", type=_rational, default=Fraction(1, 5))

    parser = argparse.ArgumentParser(prog="diamcover", description="Exact clique cover of unit ball graphs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", parents=[common], help="minimum clique cover of an instance")
    p.add_argument("--oracle", choices=["dp", "brute", "bnb"], default="dp")
    p.add_argument("--verify", action="store_true")

    g = sub.add_parser("generate", help="write an instance")
    gsub = g.add_subparsers(dest="kind", required=True)
    r = gsub.add_parser("random", parents=[common])
    r.add_argument("--n", type=int, required=True)
    r.add_argument("--box", type=_rational, default=Fraction(5))
    r.add_argument("--diameter", type=_rational, default=Fraction(2))
    s = gsub.add_parser("sat", parents=[common])
    s.add_argument("--formula", type=Path, required=True)
    s.add_argument("--embedding", type=Path, required=True)
    s.add_argument("--refined", action="store_true", help="embedding is already 2-refined")
    c = gsub.add_parser("color3", parents=[common])
    c.add_argument("--graph", type=Path, required=True)
    c.add_argument("--certificate", type=Path)

    v = sub.add_parser("verify", parents=[common], help="check a cover against an instance")
    v.add_argument("--cover", type=Path, required=True)

    ce = sub.add_parser("certify", parents=[common], help="certify the R^5 embedding of a graph")
    ce.add_argument("--graph", type=Path, required=True)
    ce.add_argument("--precision", type=int)

    b = sub.add_parser("bench", parents=[common], help="CSV of (n, time, width) rows")
    b.add_argument("--sizes", type=_sizes, default=[50, 100, 200])
    b.add_argument("--seeds", type=int, default=1)
    b.add_argument("--degree", type=float, default=4.0)
    b.add_argument("--decompose-only", action="store_true")

    sub.add_parser("cliques", parents=[common], help="dump relevant cliques per partition class")
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    known = {"command", "input", "output", "oracle", "lam", "halfplanes", "epsilon", "seed", "jobs", "precision_cap", "verify"}
    extra = {k: v for k, v in vars(ns).items() if k not in known}
    return RunConfig(
        command=ns.command,
        input=ns.input,
        output=ns.output,
        oracle=getattr(ns, "oracle", "dp"),
        lam=ns.lam,
        halfplanes=ns.halfplanes,
        epsilon=ns.epsilon,
        seed=ns.seed,
        jobs=ns.jobs,
        precision_cap=ns.precision_cap,
        verify=getattr(ns, "verify", False),
        extra=extra,
    )


def setup_logging() -> None:
    level = os.environ.get("DIAMCOVER_LOG", "error").lower()
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(level=levels.get(level, logging.ERROR), format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def main(argv=None) -> int:
    setup_logging()
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    cfg = config_from_args(ns)
    try:
        cfg.validate()
        return COMMANDS[cfg.command](cfg)
    except (InputError, ParseError, sat.ReductionError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except EscalationCapReached as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except coloring.CertificationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP


if __name__ == "__main__":
    sys.exit(main())
