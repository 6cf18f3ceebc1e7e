"""Cell marching: the explicit piecewise-affine decomposition of a ReLU network.

Each activation pattern names one polyhedral cell of the input space.  Starting
from a seed pattern, the marcher builds the cell's minimal H-representation,
emits it, and crosses every essential non-domain facet to the neighboring
pattern, until the working set is exhausted or the visitor aborts.  Only
(pattern key, status) pairs stay in memory; cells stream to the visitor.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    EPS_ZERO,
    AffineMap,
    Constraint,
    EmptyPolyhedronError,
    GeometryError,
    HPolyhedron,
    chebyshev_center,
    essential_constraints,
    normalize_constraint,
    remove_duplicates,
)
from .lp import LpBackend, default_backend
from .network import AugmentedNetwork
from .pattern import ActivationPattern, ap_key

__all__ = [
    "Cell",
    "EmptyCellError",
    "MarchBudgets",
    "MarchStats",
    "PwaRepresentation",
    "affine_map_from_ap",
    "ap_key",
    "cell_from_ap",
    "cell_record",
    "cell_from_record",
    "march",
    "neighbor_ap",
    "neuron_hyperplane",
]

INTERIOR_RADIUS = 1e-9      # cells thinner than this are treated as empty
SEED_CLEARANCE = 1e-9       # min distance from the seed to any active hyperplane
SEED_PERTURB_SCALE = 1e-6   # perturbation norm, relative to the domain radius
SEED_MAX_TRIES = 100


class EmptyCellError(GeometryError):
    """The pattern's cell has no interior inside the domain."""

    def __init__(self, ap: ActivationPattern):
        super().__init__("cell is empty or has empty interior inside the domain")
        self.ap = ap


@dataclass(frozen=True, eq=False)
class Cell:
    """One record of the PWA representation.

    hrep holds the essential constraints (neuron and domain provenance); map is
    the affine function the network equals on the cell; degenerate_neurons are the
    neurons whose preactivation row is identically zero on the cell.
    """

    ap: ActivationPattern
    hrep: HPolyhedron
    map: AffineMap
    degenerate_neurons: frozenset[tuple[int, int]]
    payload: object = None

    def with_payload(self, payload) -> "Cell":
        return Cell(self.ap, self.hrep, self.map, self.degenerate_neurons, payload)


@dataclass
class MarchBudgets:
    max_cells: int = 1_000_000
    max_lps: int = 100_000_000
    wall_time_s: float | None = None


@dataclass
class MarchStats:
    cells: int = 0
    lps: int = 0
    wall_time_s: float = 0.0
    discarded_empty: int = 0
    complete: bool = True
    aborted: bool = False


@dataclass
class PwaRepresentation:
    domain: HPolyhedron
    stats: MarchStats
    cells: list[Cell] | None = field(default=None)


def _neuron_tag(layer: int, index: int) -> str:
    return f"neuron:{layer}:{index}"


def _parse_neuron_tags(provenance) -> list[tuple[int, int]]:
    out = []
    for tag in provenance:
        if tag.startswith("neuron:"):
            _, i, j = tag.split(":")
            out.append((int(i), int(j)))
    return out


def _masked(M: np.ndarray, bits: np.ndarray) -> np.ndarray:
    out = M.copy()
    out[:-1][bits == 0] = 0.0
    return out


def _is_zero_row(row: np.ndarray) -> bool:
    # matches the degenerate test in normalize_constraint: zero normal and offset
    return float(np.linalg.norm(row[:-1])) <= EPS_ZERO and abs(float(row[-1])) <= EPS_ZERO


def _layer_bits(anet: AugmentedNetwork, bits: np.ndarray) -> list[np.ndarray]:
    out = []
    offset = 0
    for w in anet.hidden_widths:
        out.append(bits[offset : offset + w])
        offset += w
    return out


def affine_map_from_ap(anet: AugmentedNetwork, ap: ActivationPattern) -> AffineMap:
    """[C d]: the output matrix times the masked hidden products under ap."""
    if len(ap) != anet.hidden_neuron_count:
        raise ValueError("pattern length does not match the network")
    prefix = np.eye(anet.input_dim + 1)
    for M, bits in zip(anet.hidden, _layer_bits(anet, ap.bits)):
        prefix = _masked(M, bits) @ prefix
    Cd = anet.output @ prefix
    return AffineMap(Cd[:, :-1], Cd[:, -1])


def _raw_row(anet: AugmentedNetwork, ap: ActivationPattern, layer: int, index: int) -> np.ndarray:
    prefix = np.eye(anet.input_dim + 1)
    per_layer = _layer_bits(anet, ap.bits)
    for l in range(layer):
        prefix = _masked(anet.hidden[l], per_layer[l]) @ prefix
    return anet.hidden[layer][index] @ prefix


def _oriented(raw: np.ndarray, bit: int, tag: str) -> Constraint:
    # raw = [a | c] with preactivation a.x + c; active neurons keep a.x + c >= 0,
    # stored in <= form as -a.x <= c; inactive neurons store a.x <= -c
    a, c = raw[:-1], float(raw[-1])
    if bit:
        return normalize_constraint(-a, c, (tag,))
    return normalize_constraint(a, -c, (tag,))


def neuron_hyperplane(
    anet: AugmentedNetwork, ap: ActivationPattern, layer: int, index: int
) -> Constraint:
    """The (normalized, oriented) constraint of one hidden neuron under ap."""
    widths = anet.hidden_widths
    if not (0 <= layer < len(widths)) or not (0 <= index < widths[layer]):
        raise IndexError(f"no hidden neuron ({layer}, {index})")
    raw = _raw_row(anet, ap, layer, index)
    offset = sum(widths[:layer]) + index
    return _oriented(raw, int(ap.bits[offset]), _neuron_tag(layer, index))


def cell_from_ap(
    anet: AugmentedNetwork,
    ap: ActivationPattern,
    domain: HPolyhedron,
    backend: LpBackend | None = None,
) -> Cell:
    """Build the cell of a realizable pattern: constraints, minimal form, map.

    Raises EmptyCellError when the pattern has no interior inside the domain
    (the marching loop drops such neighbors).
    """
    backend = backend or default_backend()
    if len(ap) != anet.hidden_neuron_count:
        raise ValueError("pattern length does not match the network")
    if domain.dim != anet.input_dim:
        raise GeometryError("domain dimension does not match the network input")

    constraints: list[Constraint] = []
    degenerate = []
    prefix = np.eye(anet.input_dim + 1)
    per_layer = _layer_bits(anet, ap.bits)
    for layer, (M, bits) in enumerate(zip(anet.hidden, per_layer)):
        rows = M[:-1] @ prefix
        for j in range(rows.shape[0]):
            if _is_zero_row(rows[j]):
                degenerate.append((layer, j))
            constraints.append(_oriented(rows[j], int(bits[j]), _neuron_tag(layer, j)))
        prefix = _masked(M, bits) @ prefix
    constraints.extend(domain.constraints)

    deduped = HPolyhedron(tuple(remove_duplicates(constraints)), domain.dim)
    try:
        _, radius = chebyshev_center(deduped, backend)
    except EmptyPolyhedronError:
        raise EmptyCellError(ap) from None
    if radius <= INTERIOR_RADIUS:
        raise EmptyCellError(ap)
    try:
        hrep = essential_constraints(deduped, backend)
    except EmptyPolyhedronError:
        raise EmptyCellError(ap) from None

    Cd = anet.output @ prefix
    return Cell(
        ap=ap,
        hrep=hrep,
        map=AffineMap(Cd[:, :-1], Cd[:, -1]),
        degenerate_neurons=frozenset(degenerate),
    )


def neighbor_ap(anet: AugmentedNetwork, cell: Cell, facet: Constraint) -> ActivationPattern:
    """Pattern across one essential facet of a cell.

    Sweeps neurons in layer-major order under the evolving pattern: neurons on
    the facet (its provenance) and neurons with degenerate rows in the cell get
    their hyperplane recomputed; a still-zero row pins the bit to 0, otherwise
    the bit is set by which side of the facet the recomputed preactivation is
    positive on.  All other neurons keep their bit (their preactivation has a
    fixed sign across the facet by continuity).
    """
    if "domain" in facet.provenance:
        raise GeometryError("facet borders the domain; there is no neighbor cell")
    on_facet = set(_parse_neuron_tags(facet.provenance))
    if not on_facet:
        raise GeometryError("facet provenance names no neuron")
    touched = on_facet | set(cell.degenerate_neurons)

    # facet direction [a | -b]: positive where the facet constraint is violated,
    # i.e. on the neighbor side
    facet_dir = np.append(facet.a, -facet.b)

    bits = np.array(cell.ap.bits, dtype=np.uint8)
    widths = anet.hidden_widths
    prefix = np.eye(anet.input_dim + 1)
    offset = 0
    for layer, M in enumerate(anet.hidden):
        k = widths[layer]
        rows = None
        for j in range(k):
            if (layer, j) not in touched:
                continue
            if rows is None:
                rows = M[:-1] @ prefix
            row = rows[j]
            if _is_zero_row(row):
                bits[offset + j] = 0
            else:
                # row is a scalar multiple of the facet row; the sign of the
                # multiplier says which side the preactivation is positive on
                bits[offset + j] = 1 if float(row @ facet_dir) > 0.0 else 0
        prefix = _masked(M, bits[offset : offset + k]) @ prefix
        offset += k
    return ActivationPattern(bits)


def _seed_clearance(anet: AugmentedNetwork, x: np.ndarray) -> float:
    """Distance from x to the nearest active neuron hyperplane under its own pattern."""
    ap = anet.activation_pattern(x)
    per_layer = _layer_bits(anet, ap.bits)
    xt = np.append(x, 1.0)
    prefix = np.eye(anet.input_dim + 1)
    best = np.inf
    for M, bits in zip(anet.hidden, per_layer):
        rows = M[:-1] @ prefix
        norms = np.linalg.norm(rows[:, :-1], axis=1)
        vals = np.abs(rows @ xt)
        for nrm, val, row in zip(norms, vals, rows):
            if _is_zero_row(row):
                continue
            if nrm <= EPS_ZERO:
                continue  # constant preactivation, never on a boundary
            best = min(best, float(val / nrm))
        prefix = _masked(M, bits) @ prefix
    return best


def _generic_seed(anet, domain, seed, radius, rng) -> np.ndarray:
    base = np.asarray(seed, dtype=float)
    x = base
    for attempt in range(1, SEED_MAX_TRIES + 1):
        if domain.contains(x, tol=0.0) and _seed_clearance(anet, x) > SEED_CLEARANCE:
            return x
        step = rng.standard_normal(domain.dim)
        step *= SEED_PERTURB_SCALE * radius * attempt / np.linalg.norm(step)
        x = base + step
    raise GeometryError(
        "could not find a generic seed point inside the domain; is the seed inside?"
    )


def march(
    anet: AugmentedNetwork,
    domain: HPolyhedron,
    seed=None,
    visitor=None,
    backend: LpBackend | None = None,
    budgets: MarchBudgets | None = None,
    rng_seed: int = 0,
    collect: bool | None = None,
) -> PwaRepresentation:
    """Enumerate all cells of the network over a bounded domain.

    Depth-first over patterns: pop, build the cell, emit it to the visitor, and
    push every unseen neighbor.  The visitor may return False to abort early
    (anytime use).  Neighbors whose cells are empty inside the domain are
    discarded and counted.  Returns the stream statistics plus the collected
    cells when no visitor consumes them (or collect=True).
    """
    backend = backend or default_backend()
    budgets = budgets or MarchBudgets()
    if collect is None:
        collect = visitor is None
    collected: list[Cell] | None = [] if collect else None
    rng = np.random.default_rng(rng_seed)
    t0 = time.perf_counter()
    lps0 = backend.calls

    center, radius = chebyshev_center(domain, backend)
    if radius <= INTERIOR_RADIUS:
        raise GeometryError("domain is empty or has empty interior")
    seed_x = _generic_seed(anet, domain, center if seed is None else seed, radius, rng)

    stats = MarchStats()
    start = anet.activation_pattern(seed_x)
    working = [start]
    in_working = {start.key}
    visited: set[bytes] = set()

    while working:
        if stats.cells >= budgets.max_cells or backend.calls - lps0 >= budgets.max_lps:
            stats.complete = False
            break
        if budgets.wall_time_s is not None and time.perf_counter() - t0 > budgets.wall_time_s:
            stats.complete = False
            break
        ap = working.pop()
        in_working.discard(ap.key)
        visited.add(ap.key)
        try:
            cell = cell_from_ap(anet, ap, domain, backend)
        except EmptyCellError:
            stats.discarded_empty += 1
            continue
        stats.cells += 1
        if collected is not None:
            collected.append(cell)
        if visitor is not None and visitor(cell) is False:
            stats.complete = False
            stats.aborted = True
            break
        for cons in cell.hrep.constraints:
            if "domain" in cons.provenance or not any(
                t.startswith("neuron:") for t in cons.provenance
            ):
                continue
            nap = neighbor_ap(anet, cell, cons)
            if nap.key not in visited and nap.key not in in_working:
                working.append(nap)
                in_working.add(nap.key)

    stats.lps = backend.calls - lps0
    stats.wall_time_s = time.perf_counter() - t0
    return PwaRepresentation(domain=domain, stats=stats, cells=collected)


def cell_record(cell: Cell) -> dict:
    """JSONL wire form; backward payload lists flatten when there is one output set."""
    payload = cell.payload
    if isinstance(payload, list):
        encoded = [p.to_json_dict() if p is not None else None for p in payload]
        payload_json = encoded[0] if len(encoded) == 1 else encoded
    elif payload is None:
        payload_json = None
    else:
        payload_json = payload.to_json_dict()
    return {
        "ap": cell.ap.to_base64(),
        "hrep": cell.hrep.to_json_dict(),
        "C": cell.map.C.tolist(),
        "d": cell.map.d.tolist(),
        "payload": payload_json,
    }


def cell_from_record(record: dict, n_bits: int, input_dim: int) -> Cell:
    """Rebuild a cell from its wire form (degenerate-neuron context is not round-tripped)."""
    ap = ActivationPattern.from_base64(record["ap"], n_bits)
    hrep = HPolyhedron.from_json_dict(record["hrep"], dim=input_dim)
    amap = AffineMap(np.array(record["C"], dtype=float), np.array(record["d"], dtype=float))
    payload = record.get("payload")
    if isinstance(payload, list):
        payload = [HPolyhedron.from_json_dict(p) if p else None for p in payload]
    elif payload:
        payload = HPolyhedron.from_json_dict(payload)
    return Cell(ap=ap, hrep=hrep, map=amap, degenerate_neurons=frozenset(), payload=payload)


def write_cell_stream(cells, fh) -> int:
    n = 0
    for cell in cells:
        fh.write(json.dumps(cell_record(cell), separators=(",", ":")) + "\n")
        n += 1
    return n
