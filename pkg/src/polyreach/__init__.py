"""polyreach: exact PWA decomposition and reachability for ReLU networks."""

__version__ = "0.1.0"

from .geometry import (
    AffineMap,
    Constraint,
    EmptyPolyhedronError,
    GeometryError,
    HPolyhedron,
    ProjectionBudgetError,
    affine_image,
    affine_preimage,
    chebyshev_center,
    essential_constraints,
    essential_indices,
    intersect,
    is_empty,
    normalize_constraint,
    remove_duplicates,
)
from .lp import LpBackend, LpError, LpResult, ScipyLpBackend, default_backend
from .marching import (
    Cell,
    EmptyCellError,
    MarchBudgets,
    MarchStats,
    PwaRepresentation,
    affine_map_from_ap,
    ap_key,
    cell_from_ap,
    march,
    neighbor_ap,
    neuron_hyperplane,
)
from .network import (
    AugmentedNetwork,
    NetworkFormatError,
    NetworkStructureError,
    ReluNetwork,
    augment,
    compose,
    dump_network_json,
    dump_nnet,
    load_network,
    load_network_file,
)
from .pattern import ActivationPattern
from .reach import (
    ReachSpec,
    Verdict,
    backward_reach,
    build_argmax_output_set,
    enumerate_cells,
    forward_reach,
    verify,
    witness_point,
)

__all__ = [
    "ActivationPattern",
    "AffineMap",
    "AugmentedNetwork",
    "Cell",
    "Constraint",
    "EmptyCellError",
    "EmptyPolyhedronError",
    "GeometryError",
    "HPolyhedron",
    "LpBackend",
    "LpError",
    "LpResult",
    "MarchBudgets",
    "MarchStats",
    "NetworkFormatError",
    "NetworkStructureError",
    "ProjectionBudgetError",
    "PwaRepresentation",
    "ReachSpec",
    "ReluNetwork",
    "ScipyLpBackend",
    "Verdict",
    "affine_image",
    "affine_map_from_ap",
    "affine_preimage",
    "ap_key",
    "augment",
    "backward_reach",
    "build_argmax_output_set",
    "cell_from_ap",
    "chebyshev_center",
    "compose",
    "default_backend",
    "dump_network_json",
    "dump_nnet",
    "enumerate_cells",
    "essential_constraints",
    "essential_indices",
    "forward_reach",
    "intersect",
    "is_empty",
    "load_network",
    "load_network_file",
    "march",
    "neighbor_ap",
    "neuron_hyperplane",
    "normalize_constraint",
    "remove_duplicates",
    "verify",
    "witness_point",
]
