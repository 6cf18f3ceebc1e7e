#!/usr/bin/env python3
"""Enumerate the PWA cells of a random 2D ReLU network and write the stream.

Output pair (cells JSONL + summary JSON) is directly consumable by the viz
package:  python scripts/enumerate_random.py --neurons 12 --out-dir out/
"""

import argparse
import json
import time
from pathlib import Path

import numpy as np

from polyreach import HPolyhedron, ReluNetwork, augment, dump_network_json, march
from polyreach.marching import write_cell_stream


def build_net(rng, neurons):
    W1 = rng.standard_normal((neurons, 2))
    b1 = rng.standard_normal(neurons) * 0.4
    W2 = rng.standard_normal((1, neurons)) / np.sqrt(neurons)
    return ReluNetwork([(W1, b1), (W2, np.zeros(1))])


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--neurons", type=int, default=12)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--box", type=float, default=1.5, help="domain half-width")
    ap.add_argument("--out-dir", type=Path, default=Path("out"))
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    net = build_net(rng, args.neurons)
    domain = HPolyhedron.from_box([-args.box] * 2, [args.box] * 2)

    t0 = time.perf_counter()
    result = march(augment(net), domain, rng_seed=args.seed)
    dt = time.perf_counter() - t0

    args.out_dir.mkdir(parents=True, exist_ok=True)
    (args.out_dir / "network.json").write_text(dump_network_json(net))
    with open(args.out_dir / "cells.jsonl", "w") as fh:
        write_cell_stream(result.cells, fh)
    summary = {
        "command": "enumerate",
        "status": "COMPLETE" if result.stats.complete else "INCOMPLETE",
        "cells": result.stats.cells,
        "lps": result.stats.lps,
        "wall_time_s": dt,
        "discarded_empty": result.stats.discarded_empty,
        "complete": result.stats.complete,
        "steps": 1,
        "n_hidden": net.hidden_neuron_count,
        "seed": args.seed,
        "domain": domain.to_json_dict(),
    }
    (args.out_dir / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(f"{result.stats.cells} cells ({result.stats.lps} LPs) in {dt:.2f}s "
          f"-> {args.out_dir}/cells.jsonl")


if __name__ == "__main__":
    main()
