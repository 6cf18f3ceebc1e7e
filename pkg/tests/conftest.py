"""Shared fixtures and independent test oracles.

Oracles here deliberately avoid the library's own code paths: redundancy is
decided by one plain scipy LP per constraint, facet points come from an
equality-constrained LP, and membership checks go through raw numpy.
"""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import settings
from scipy.optimize import linprog

from polyreach import HPolyhedron, ReluNetwork

settings.register_profile("repeatable", derandomize=True)
settings.load_profile("repeatable")


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def random_net(rng, widths, in_dim, out_dim, weight_scale=1.0, bias_scale=0.3) -> ReluNetwork:
    """Random Gaussian net; weight rows scaled by 1/sqrt(fan_in) * weight_scale."""
    layers = []
    prev = in_dim
    for w in widths:
        layers.append(
            (
                rng.standard_normal((w, prev)) * weight_scale / np.sqrt(prev),
                rng.standard_normal(w) * bias_scale,
            )
        )
        prev = w
    layers.append(
        (
            rng.standard_normal((out_dim, prev)) * weight_scale / np.sqrt(prev),
            rng.standard_normal(out_dim) * bias_scale,
        )
    )
    return ReluNetwork(layers)


def brute_force_essential(A, b, eps_lp=1e-7) -> list[int]:
    """Exhaustive oracle: one LP per constraint against all the others, no prefilter."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    keep = []
    for i in range(len(b)):
        rest = [j for j in range(len(b)) if j != i]
        res = linprog(
            -A[i], A_ub=A[rest], b_ub=b[rest], bounds=(None, None), method="highs"
        )
        if res.status == 3:  # unbounded: essential
            keep.append(i)
        elif res.status == 0:
            if -res.fun > b[i] + eps_lp:
                keep.append(i)
        else:
            raise AssertionError(f"oracle LP failed with status {res.status}")
    return keep


def facet_interior_point(hrep: HPolyhedron, facet_index: int) -> np.ndarray:
    """Chebyshev-style center of one facet: equality on the facet, slack elsewhere."""
    A, b = hrep.A, hrep.b
    f = hrep.constraints[facet_index]
    rest = [i for i in range(len(b)) if i != facet_index]
    dim = hrep.dim
    c = np.zeros(dim + 1)
    c[-1] = -1.0  # maximize slack radius
    A_ub = np.column_stack([A[rest], np.ones(len(rest))])
    res = linprog(
        c,
        A_ub=A_ub,
        b_ub=b[rest],
        A_eq=[[*f.a, 0.0]],
        b_eq=[f.b],
        bounds=(None, None),
        method="highs",
    )
    assert res.status == 0, f"facet LP failed: status {res.status}"
    return res.x[:dim]


def sample_box(rng, lo, hi, n) -> np.ndarray:
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    return rng.uniform(lo, hi, size=(n, lo.size))


def membership_counts(cells, X, tol=1e-8) -> np.ndarray:
    counts = np.zeros(len(X), dtype=int)
    for cell in cells:
        counts += cell.hrep.contains(X, tol=tol)
    return counts


def in_any_payload(cells, Y, tol=1e-7) -> np.ndarray:
    """Membership of each row of Y in the union of forward payloads."""
    hit = np.zeros(len(Y), dtype=bool)
    for cell in cells:
        if cell.payload is not None:
            hit |= cell.payload.contains(Y, tol=tol)
    return hit


def in_any_backward_payload(cells, X, set_index=0, tol=1e-7) -> np.ndarray:
    hit = np.zeros(len(X), dtype=bool)
    for cell in cells:
        part = cell.payload[set_index]
        if part is not None:
            hit |= part.contains(X, tol=tol)
    return hit


def box_image_vertices(lo, hi, C, d) -> np.ndarray:
    """Vertex oracle on boxes: map every corner, the image is their hull."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    dim = lo.size
    corners = []
    for mask in range(1 << dim):
        corner = np.where([(mask >> i) & 1 for i in range(dim)], hi, lo)
        corners.append(np.asarray(C) @ corner + np.asarray(d))
    return np.array(corners)
