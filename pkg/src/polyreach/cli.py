"""Command-line front end.

Subcommands: enumerate, forward, backward, verify, plus `check` which
re-validates an emitted cell stream against its network.  Every run writes a
JSONL cell stream and a summary JSON; exit codes are 0 (complete / SAFE),
2 (UNSAFE), 3 (INCOMPLETE), 1 (usage or runtime error).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import replace
from types import SimpleNamespace

import numpy as np

from . import __version__
from .geometry import (
    EPS_DUP,
    EPS_LP,
    EPS_RANK,
    EPS_ZERO,
    GeometryError,
    HPolyhedron,
    chebyshev_center,
)
from .lp import default_backend
from .marching import MarchBudgets, cell_from_record, cell_record
from .network import compose, load_network_file
from .reach import (
    INCOMPLETE,
    UNSAFE,
    ReachSpec,
    backward_reach,
    enumerate_cells,
    forward_reach,
    verify,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_UNSAFE = 2
EXIT_INCOMPLETE = 3


def parse_box(text: str, tag: str = "domain") -> HPolyhedron:
    """Box shorthand `box:lo,hi x lo,hi x ...` (spaces optional)."""
    body = text[len("box:"):]
    lo, hi = [], []
    for i, part in enumerate(body.replace(" ", "").split("x")):
        pieces = part.split(",")
        if len(pieces) != 2:
            raise ValueError(f"box axis {i}: expected 'lo,hi', got {part!r}")
        lo.append(float(pieces[0]))
        hi.append(float(pieces[1]))
    return HPolyhedron.from_box(lo, hi, tag=tag)


def load_set(text: str, tag: str) -> HPolyhedron:
    """A polyhedron argument: box shorthand or a path to H-rep JSON."""
    if text.startswith("box:"):
        return parse_box(text, tag=tag)
    with open(text) as fh:
        data = json.load(fh)
    poly = HPolyhedron.from_json_dict(data)
    cs = tuple(
        c if c.provenance else replace(c, provenance=(tag,)) for c in poly.constraints
    )
    return HPolyhedron(cs, poly.dim)


def _add_common(p: argparse.ArgumentParser, needs_domain: bool = True):
    p.add_argument("--network", required=True, help="network file (.nnet or .json)")
    p.add_argument("--format", choices=["nnet", "json"], default=None,
                   help="network format (default: by extension)")
    p.add_argument("--nnet-normalize", action="store_true",
                   help="fold NNet header normalization constants into the weights")
    if needs_domain:
        p.add_argument("--domain", required=True,
                       help="input set: box:lo,hi x lo,hi ... or an H-rep JSON path")
    p.add_argument("--steps", type=int, default=1, help="composition horizon T")
    p.add_argument("--output", default=None, help="cell stream path (JSONL)")
    p.add_argument("--summary", default=None, help="summary JSON path")
    p.add_argument("--seed", type=int, default=0, help="RNG seed for seed-point perturbation")
    p.add_argument("--seed-point", default=None,
                   help="explicit marching start point, comma separated")
    p.add_argument("--max-cells", type=int, default=1_000_000)
    p.add_argument("--max-lps", type=int, default=100_000_000)
    p.add_argument("--wall-time", type=float, default=None, help="budget in seconds")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="polyreach",
        description="Exact PWA decomposition and reachability for ReLU networks.",
    )
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enumerate", help="enumerate all cells over the domain")
    _add_common(p)

    p = sub.add_parser("forward", help="cells plus their forward images")
    _add_common(p)
    p.add_argument("--minimize", action="store_true",
                   help="LP-minimize each forward image payload")

    p = sub.add_parser("backward", help="cells plus preimage intersections")
    _add_common(p)
    p.add_argument("--output-set", action="append", required=True,
                   help="target output set (box shorthand or JSON path); repeatable")
    p.add_argument("--nonempty-only", action="store_true",
                   help="stream only cells with a nonempty payload")

    p = sub.add_parser("verify", help="decide whether any input reaches the output set")
    _add_common(p)
    p.add_argument("--output-set", action="append", required=True,
                   help="unsafe output set (box shorthand or JSON path); repeatable")
    p.add_argument("--anytime", action="store_true",
                   help="return UNSAFE at the first witness cell")

    p = sub.add_parser("check", help="re-validate an emitted cell stream")
    _add_common(p, needs_domain=False)
    p.add_argument("--cells", required=True, help="JSONL stream to validate")
    p.add_argument("--samples", type=int, default=20, help="interior samples per cell")
    return ap


def _tolerances() -> dict:
    return {"eps_zero": EPS_ZERO, "eps_dup": EPS_DUP, "eps_lp": EPS_LP, "eps_rank": EPS_RANK}


def emit_summary(path, command, args, stats, domain, n_hidden, verdict=None, extra=None):
    """Deterministic field order; includes the tolerance values used."""
    summary = {
        "command": command,
        "status": (
            verdict.status
            if verdict is not None
            else ("COMPLETE" if stats.complete else "INCOMPLETE")
        ),
        "cells": stats.cells,
        "lps": stats.lps,
        "wall_time_s": stats.wall_time_s,
        "discarded_empty": stats.discarded_empty,
        "complete": stats.complete,
        "steps": args.steps,
        "network": args.network,
        "n_hidden": n_hidden,
        "seed": args.seed,
        "domain": domain.to_json_dict() if domain is not None else None,
        "tolerances": _tolerances(),
        "verdict": verdict.to_json_dict() if verdict is not None else None,
    }
    if extra:
        summary.update(extra)
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    return summary


def _run_reach(args) -> int:
    net = load_network_file(args.network, args.format, nnet_normalize=args.nnet_normalize)
    domain = load_set(args.domain, tag="domain")
    out_path = args.output or f"{args.command}_cells.jsonl"
    summary_path = args.summary or f"{args.command}_summary.json"
    budgets = MarchBudgets(args.max_cells, args.max_lps, args.wall_time)
    backend = default_backend()
    seed = None
    if args.seed_point:
        seed = np.array([float(t) for t in args.seed_point.split(",")])

    output_sets = tuple(
        load_set(t, tag=f"output-set:{k}")
        for k, t in enumerate(getattr(args, "output_set", None) or ())
    )
    spec = ReachSpec(
        mode=args.command,
        domain=domain,
        output_sets=output_sets,
        steps=args.steps,
        anytime=getattr(args, "anytime", False),
    )

    verdict = None
    n_composed_hidden = net.hidden_neuron_count * args.steps
    with open(out_path, "w") as fh:
        def stream(cell):
            if getattr(args, "nonempty_only", False) and isinstance(cell.payload, list):
                if all(p is None for p in cell.payload):
                    return True
            fh.write(json.dumps(cell_record(cell), separators=(",", ":")) + "\n")
            return True

        if args.command == "enumerate":
            result = enumerate_cells(net, spec, visitor=stream, backend=backend,
                                     budgets=budgets, seed=seed, rng_seed=args.seed)
        elif args.command == "forward":
            result = forward_reach(net, spec, visitor=stream, backend=backend,
                                   budgets=budgets, seed=seed, rng_seed=args.seed,
                                   minimize=args.minimize)
        elif args.command == "backward":
            result = backward_reach(net, spec, visitor=stream, backend=backend,
                                    budgets=budgets, seed=seed, rng_seed=args.seed)
        else:  # verify
            t0 = time.perf_counter()
            verdict = verify(net, spec, backend=backend, budgets=budgets,
                             seed=seed, rng_seed=args.seed, visitor=stream)
            stats = SimpleNamespace(
                cells=verdict.cells_processed,
                lps=backend.calls,
                wall_time_s=time.perf_counter() - t0,
                discarded_empty=0,
                complete=verdict.status != INCOMPLETE,
            )

    if args.command != "verify":
        stats = result.stats
    emit_summary(summary_path, args.command, args, stats, domain,
                 n_composed_hidden, verdict=verdict)

    if verdict is not None:
        print(f"{verdict.status}: {verdict.cells_processed} cells processed")
        if verdict.status == UNSAFE:
            return EXIT_UNSAFE
        if verdict.status == INCOMPLETE:
            return EXIT_INCOMPLETE
        return EXIT_OK
    print(f"{stats.cells} cells, {stats.lps} LPs, {stats.wall_time_s:.2f}s -> {out_path}")
    return EXIT_OK if stats.complete else EXIT_INCOMPLETE


def _run_check(args) -> int:
    net = load_network_file(args.network, args.format, nnet_normalize=args.nnet_normalize)
    if args.steps > 1:
        net = compose(net, args.steps)
    n_bits = net.hidden_neuron_count
    rng = np.random.default_rng(0)
    bad = 0
    total = 0
    with open(args.cells) as fh:
        for line_no, line in enumerate(fh, 1):
            if not line.strip():
                continue
            cell = cell_from_record(json.loads(line), n_bits, net.input_dim)
            center, radius = chebyshev_center(cell.hrep)
            if center is None:
                print(f"line {line_no}: empty cell in stream")
                bad += 1
                continue
            pts = [center]
            for _ in range(args.samples - 1):
                u = rng.standard_normal(net.input_dim)
                pts.append(center + u / np.linalg.norm(u) * rng.uniform(0, 0.9) * radius)
            for x in pts:
                total += 1
                y_net = net.evaluate(x)
                y_map = cell.map.apply(x)
                if np.max(np.abs(y_net - y_map)) > 1e-7:
                    bad += 1
                    print(f"line {line_no}: affine map mismatch at {x.tolist()}")
                    break
                if net.activation_pattern(x) != cell.ap:
                    bad += 1
                    print(f"line {line_no}: activation pattern mismatch at {x.tolist()}")
                    break
    print(f"check: {total} samples, {bad} bad cells")
    return EXIT_OK if bad == 0 else EXIT_ERROR


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "check":
            return _run_check(args)
        return _run_reach(args)
    except (OSError, ValueError, GeometryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
