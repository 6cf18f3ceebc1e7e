"""Reachability drivers: forward/backward set computation and anytime verification.

All drivers compose the network over the requested horizon, march the input
domain, and attach per-cell payloads: forward images of the cell, or its
intersection with the preimage of each output set.
"""

from __future__ import annotations

from dataclasses import dataclass

from .geometry import (
    HPolyhedron,
    affine_image,
    affine_preimage,
    chebyshev_center,
    essential_constraints,
    intersect,
    is_empty,
    normalize_constraint,
)
from .lp import LpBackend, default_backend
from .marching import Cell, MarchBudgets, PwaRepresentation, cell_record, march
from .network import ReluNetwork, augment, compose

MODES = ("enumerate", "forward", "backward", "verify")

SAFE = "SAFE"
UNSAFE = "UNSAFE"
INCOMPLETE = "INCOMPLETE"


@dataclass
class ReachSpec:
    """What to compute: mode, input domain, output targets, horizon, anytime flag."""

    mode: str
    domain: HPolyhedron
    output_sets: tuple[HPolyhedron, ...] = ()
    steps: int = 1
    anytime: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        self.output_sets = tuple(self.output_sets)
        if self.mode in ("backward", "verify") and not self.output_sets:
            raise ValueError(f"{self.mode} mode needs at least one output set")
        if self.mode in ("enumerate", "forward") and self.output_sets:
            raise ValueError(f"{self.mode} mode takes no output sets")


@dataclass
class Verdict:
    status: str
    witness: Cell | None
    cells_processed: int
    total_known: int | None = None

    def to_json_dict(self) -> dict:
        return {
            "status": self.status,
            "witness": cell_record(self.witness) if self.witness else None,
            "cells_processed": self.cells_processed,
            "total_known": self.total_known,
        }


def _prepared(net: ReluNetwork, spec: ReachSpec):
    composed = compose(net, spec.steps) if spec.steps > 1 else net
    return composed, augment(composed)


def enumerate_cells(
    net: ReluNetwork,
    spec: ReachSpec,
    visitor=None,
    backend: LpBackend | None = None,
    budgets: MarchBudgets | None = None,
    seed=None,
    rng_seed: int = 0,
) -> PwaRepresentation:
    """Plain PWA enumeration over spec.domain (mode 'enumerate')."""
    _, anet = _prepared(net, spec)
    return march(
        anet, spec.domain, seed=seed, visitor=visitor, backend=backend,
        budgets=budgets, rng_seed=rng_seed,
    )


def forward_reach(
    net: ReluNetwork,
    spec: ReachSpec,
    visitor=None,
    backend: LpBackend | None = None,
    budgets: MarchBudgets | None = None,
    seed=None,
    rng_seed: int = 0,
    minimize: bool = False,
) -> PwaRepresentation:
    """March the domain attaching each cell's forward image as payload.

    The forward reachable set is the union of payloads.  Payloads come back as
    the projection produces them; pass minimize=True to LP-minimize each.
    """
    backend = backend or default_backend()
    _, anet = _prepared(net, spec)

    def attach(cell: Cell) -> Cell:
        image = affine_image(cell.hrep, cell.map, backend)
        if minimize and image.constraints:
            image = essential_constraints(image, backend)
        return cell.with_payload(image)

    return _march_mapped(anet, spec, attach, visitor, backend, budgets, seed, rng_seed)


def backward_reach(
    net: ReluNetwork,
    spec: ReachSpec,
    visitor=None,
    backend: LpBackend | None = None,
    budgets: MarchBudgets | None = None,
    seed=None,
    rng_seed: int = 0,
) -> PwaRepresentation:
    """March the domain attaching, per output set, cell ∩ preimage(output set).

    Payload entries certified empty by LP are recorded as None; the union of
    the nonempty payloads over all cells is the exact preimage within the
    domain.  Multiple output sets cost one extra preimage/intersection per set.
    """
    backend = backend or default_backend()
    _, anet = _prepared(net, spec)

    def attach(cell: Cell) -> Cell:
        payloads = []
        for target in spec.output_sets:
            pre = affine_preimage(target, cell.map)
            part = intersect(cell.hrep, pre)
            payloads.append(None if is_empty(part, backend) else part)
        return cell.with_payload(payloads)

    return _march_mapped(anet, spec, attach, visitor, backend, budgets, seed, rng_seed)


def _march_mapped(anet, spec, attach, visitor, backend, budgets, seed, rng_seed):
    collected: list[Cell] | None = [] if visitor is None else None

    def inner(cell: Cell):
        cell = attach(cell)
        if collected is not None:
            collected.append(cell)
            return True
        return visitor(cell)

    result = march(
        anet, spec.domain, seed=seed, visitor=inner, backend=backend,
        budgets=budgets, rng_seed=rng_seed, collect=False,
    )
    result.cells = collected
    return result


def verify(
    net: ReluNetwork,
    spec: ReachSpec,
    backend: LpBackend | None = None,
    budgets: MarchBudgets | None = None,
    seed=None,
    rng_seed: int = 0,
    visitor=None,
) -> Verdict:
    """Decide whether any domain input reaches an output set.

    Runs backward reachability; with spec.anytime set, aborts on the first cell
    whose payload is certified nonempty and reports it as the UNSAFE witness.
    SAFE requires exhausting the enumeration; a budget abort yields INCOMPLETE.
    """
    backend = backend or default_backend()
    state: dict = {"witness": None, "count": 0}

    def watch(cell: Cell):
        state["count"] += 1
        hit = any(p is not None for p in cell.payload)
        if hit and state["witness"] is None:
            state["witness"] = cell
        if visitor is not None:
            visitor(cell)
        if hit and spec.anytime:
            return False
        return True

    result = backward_reach(
        net, spec, visitor=watch, backend=backend, budgets=budgets,
        seed=seed, rng_seed=rng_seed,
    )
    witness = state["witness"]
    if witness is not None:
        total = state["count"] if result.stats.complete else None
        return Verdict(UNSAFE, witness, state["count"], total)
    if not result.stats.complete:
        return Verdict(INCOMPLETE, None, state["count"], None)
    return Verdict(SAFE, None, state["count"], state["count"])


def witness_point(verdict: Verdict, backend: LpBackend | None = None):
    """An input certified to reach the output set: the witness payload's center."""
    if verdict.witness is None:
        return None
    for part in verdict.witness.payload:
        if part is not None:
            x, _ = chebyshev_center(part, backend or default_backend())
            return x
    return None


def build_argmax_output_set(index: int, num_outputs: int, sense: str = "max") -> HPolyhedron:
    """Outputs where coordinate `index` attains the max (or min), ties included.

    num_outputs - 1 halfspaces: y_j - y_i <= 0 for max sense, reversed for min.
    """
    if num_outputs < 2:
        raise ValueError("need at least two outputs")
    if not 0 <= index < num_outputs:
        raise ValueError(f"index {index} out of range for {num_outputs} outputs")
    if sense not in ("max", "min"):
        raise ValueError("sense must be 'max' or 'min'")
    cs = []
    for j in range(num_outputs):
        if j == index:
            continue
        a = [0.0] * num_outputs
        if sense == "max":
            a[j], a[index] = 1.0, -1.0
        else:
            a[index], a[j] = 1.0, -1.0
        cs.append(normalize_constraint(a, 0.0, (f"output-set:argmax:{index}",)))
    return HPolyhedron(tuple(cs), num_outputs)
