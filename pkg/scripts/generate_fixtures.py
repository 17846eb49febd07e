"""Write the reduction instances used in the docs into a directory.

    python scripts/generate_fixtures.py out/
"""

import json
import sys
from importlib.resources import files
from pathlib import Path

from diamcover.model import gen_random, serialize_instance
from diamcover.reductions import sat
from diamcover.reductions.coloring import build_r5_instance

GRAPHS = {
    "k3": (3, [(0, 1), (1, 2), (0, 2)]),
    "k4": (4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]),
    "c5": (5, [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)]),
}


def main(out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    data = files("diamcover.data")
    for name in ("phi_s", "phi_u"):
        si = sat.generate(data.joinpath(f"{name}.json").read_text(), data.joinpath(f"{name}_embedding.json").read_text())
        (out / f"{name}_instance.json").write_text(serialize_instance(si.instance, {"target_k": si.k, "wire_length": si.L}))
        print(f"{name}: {si.instance.n} points, target k {si.k}")
    for name, (n, edges) in GRAPHS.items():
        r5 = build_r5_instance(n, edges)
        (out / f"{name}_r5.json").write_text(serialize_instance(r5.instance, {"target_k": r5.k}))
        (out / f"{name}_r5.cert.json").write_text(json.dumps(r5.sidecar(), indent=2, sort_keys=True) + "\n")
        print(f"{name}: {r5.instance.n} points in R^5, certified at {r5.certificate.bits} bits, {r5.digits} digits")
    for n in (10, 50, 200):
        (out / f"random_{n}.json").write_text(serialize_instance(gen_random(n, 6, 2, seed=n)))


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "fixtures")
