#!/usr/bin/env python3
"""Regenerate the committed fixtures consumed by the viz package tests.

The viz package reads only the documented JSONL / summary formats, so its test
fixtures are produced here once and checked in:
  - arrangement: the 7-cell decomposition of a 3-neuron 2D network
  - backward: a backward-reach stream where only some payloads are nonempty
"""

import argparse
import json
from pathlib import Path

import numpy as np

from polyreach import (
    HPolyhedron,
    ReachSpec,
    ReluNetwork,
    augment,
    backward_reach,
    march,
)
from polyreach.marching import write_cell_stream


def summary_dict(command, res, steps, n_hidden, domain):
    return {
        "command": command,
        "status": "COMPLETE" if res.stats.complete else "INCOMPLETE",
        "cells": res.stats.cells,
        "lps": res.stats.lps,
        "wall_time_s": res.stats.wall_time_s,
        "discarded_empty": res.stats.discarded_empty,
        "complete": res.stats.complete,
        "steps": steps,
        "n_hidden": n_hidden,
        "seed": 0,
        "domain": domain.to_json_dict(),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", type=Path, default=Path("viz/fixtures"))
    args = ap.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)

    # 3 well-spread lines: exactly 1 + 3 + 3 = 7 cells
    theta = np.array([0.3, 1.4, 2.5])
    W1 = np.column_stack([np.cos(theta), np.sin(theta)])
    b1 = np.array([0.1, -0.2, 0.3])
    net = ReluNetwork([(W1, b1), (np.array([[1.0, -0.5, 0.8]]), np.array([0.0]))])
    domain = HPolyhedron.from_box([-2.0, -2.0], [2.0, 2.0])
    res = march(augment(net), domain)
    assert res.stats.cells == 7, res.stats.cells
    with open(args.out_dir / "arrangement_cells.jsonl", "w") as fh:
        write_cell_stream(res.cells, fh)
    (args.out_dir / "arrangement_summary.json").write_text(
        json.dumps(summary_dict("enumerate", res, 1, 3, domain), indent=2) + "\n"
    )

    target = HPolyhedron.from_box([0.5], [5.0], tag="output-set:0")
    bwd = backward_reach(net, ReachSpec("backward", domain, output_sets=(target,)))
    hits = sum(1 for c in bwd.cells if any(p is not None for p in c.payload))
    assert 0 < hits < bwd.stats.cells, hits
    with open(args.out_dir / "backward_cells.jsonl", "w") as fh:
        write_cell_stream(bwd.cells, fh)
    (args.out_dir / "backward_summary.json").write_text(
        json.dumps(summary_dict("backward", bwd, 1, 3, domain), indent=2) + "\n"
    )
    print(f"fixtures written to {args.out_dir} ({res.stats.cells} arrangement cells, "
          f"{hits}/{bwd.stats.cells} backward cells with payload)")


if __name__ == "__main__":
    main()
