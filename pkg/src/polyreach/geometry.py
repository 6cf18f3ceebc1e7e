"""Polyhedral geometry on normalized halfspace representations.

Constraints are stored as a.x <= b with unit normals (or exactly zero normals
for constant rows), each carrying provenance tags.  Operations are pure:
inputs are never mutated.  LP-backed routines accept an optional backend so a
caller can share one call counter across a whole run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from .lp import INFEASIBLE, OPTIMAL, UNBOUNDED, LpBackend, LpError, default_backend

EPS_ZERO = 1e-10   # norms below this count as exactly zero
EPS_DUP = 1e-8     # componentwise tolerance when matching duplicate rows
EPS_LP = 1e-7      # slack margin on LP redundancy / feasibility verdicts
EPS_RANK = 1e-10   # relative singular-value cutoff for invertibility

_BIG = 1e9  # internal cap when a Chebyshev LP is unbounded


class GeometryError(Exception):
    """Contract violation in a polyhedral operation."""


class EmptyPolyhedronError(GeometryError):
    """Operation requires a nonempty polyhedron."""


class ProjectionBudgetError(GeometryError):
    """Constraint growth during projection exceeded the configured budget."""


@dataclass(frozen=True, eq=False)
class Constraint:
    """Halfspace a.x <= b with ||a|| = 1, or a == 0 for constant rows."""

    a: np.ndarray
    b: float
    provenance: tuple[str, ...] = ()

    @property
    def is_constant(self) -> bool:
        return not self.a.any()

    @property
    def is_degenerate(self) -> bool:
        # the all-zero row 0.x <= 0, satisfied everywhere
        return self.is_constant and self.b == 0.0

    @property
    def always_satisfied(self) -> bool:
        return self.is_constant and self.b >= 0.0

    @property
    def never_satisfied(self) -> bool:
        return self.is_constant and self.b < 0.0

    def row(self) -> np.ndarray:
        return np.append(self.a, self.b)

    def __repr__(self) -> str:
        return f"Constraint(a={self.a.tolist()}, b={self.b:g})"


def normalize_constraint(raw_a, raw_b, provenance: tuple[str, ...] = ()) -> Constraint:
    """Scale (raw_a, raw_b) to a unit normal.

    Near-zero normals collapse to constant rows: (0, 0) when the offset is also
    negligible, otherwise (0, sign(raw_b)) which is feasible iff raw_b >= 0.
    """
    a = np.array(raw_a, dtype=float).reshape(-1)
    b = float(raw_b)
    if not np.isfinite(a).all() or not math.isfinite(b):
        raise GeometryError("constraint has non-finite entries")
    norm = float(np.linalg.norm(a))
    if norm <= EPS_ZERO:
        zero = np.zeros(a.size)
        zero.setflags(write=False)
        if abs(b) <= EPS_ZERO:
            return Constraint(zero, 0.0, provenance)
        return Constraint(zero, math.copysign(1.0, b), provenance)
    a = a / norm
    a.setflags(write=False)
    return Constraint(a, b / norm, provenance)


@dataclass(frozen=True, eq=False)
class HPolyhedron:
    """Closed convex set {x | A x <= b} with per-row provenance."""

    constraints: tuple[Constraint, ...]
    dim: int

    @classmethod
    def from_arrays(cls, A, b, provenance=None, dim: int | None = None) -> "HPolyhedron":
        A = np.asarray(A, dtype=float)
        b = np.asarray(b, dtype=float).reshape(-1)
        if A.size == 0:
            if dim is None and A.ndim == 2:
                dim = A.shape[1]
            if dim is None:
                raise GeometryError("dim is required for an unconstrained polyhedron")
            return cls((), dim)
        A = A.reshape(len(b), -1)
        if provenance is None:
            provenance = [()] * len(b)
        cs = tuple(
            normalize_constraint(A[i], b[i], tuple(provenance[i])) for i in range(len(b))
        )
        return cls(cs, A.shape[1])

    @classmethod
    def from_box(cls, lo, hi, tag: str = "domain") -> "HPolyhedron":
        lo = np.asarray(lo, dtype=float).reshape(-1)
        hi = np.asarray(hi, dtype=float).reshape(-1)
        if lo.size != hi.size or np.any(lo > hi):
            raise GeometryError("invalid box bounds")
        cs = []
        for i in range(lo.size):
            e = np.zeros(lo.size)
            e[i] = 1.0
            cs.append(normalize_constraint(-e, -lo[i], (tag,)))
            cs.append(normalize_constraint(e, hi[i], (tag,)))
        return cls(tuple(cs), lo.size)

    @cached_property
    def A(self) -> np.ndarray:
        if not self.constraints:
            return np.zeros((0, self.dim))
        return np.stack([c.a for c in self.constraints])

    @cached_property
    def b(self) -> np.ndarray:
        return np.array([c.b for c in self.constraints])

    def __len__(self) -> int:
        return len(self.constraints)

    def contains(self, x, tol: float = EPS_LP):
        """Membership test; x may be a point (dim,) or a batch (m, dim)."""
        x = np.asarray(x, dtype=float)
        if not self.constraints:
            return np.ones(x.shape[0], dtype=bool) if x.ndim == 2 else True
        slack = x @ self.A.T - self.b
        if x.ndim == 1:
            return bool(np.all(slack <= tol))
        return np.all(slack <= tol, axis=1)

    def retagged(self, tag: str) -> "HPolyhedron":
        cs = tuple(replace(c, provenance=(tag,)) for c in self.constraints)
        return HPolyhedron(cs, self.dim)

    def to_json_dict(self) -> dict:
        return {
            "A": [c.a.tolist() for c in self.constraints],
            "b": [c.b for c in self.constraints],
            "provenance": [list(c.provenance) for c in self.constraints],
        }

    @classmethod
    def from_json_dict(cls, data: dict, dim: int | None = None) -> "HPolyhedron":
        prov = data.get("provenance")
        A = data["A"]
        if dim is None:
            dim = len(A[0]) if A else None
        return cls.from_arrays(A, data["b"], provenance=prov, dim=dim)


@dataclass(frozen=True, eq=False)
class AffineMap:
    """y = C x + d; invertibility is computed, never assumed."""

    C: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        C = np.asarray(self.C, dtype=float)
        d = np.asarray(self.d, dtype=float).reshape(-1)
        if C.ndim != 2 or C.shape[0] != d.size:
            raise GeometryError("affine map dimensions are inconsistent")
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "d", d)

    @property
    def input_dim(self) -> int:
        return self.C.shape[1]

    @property
    def output_dim(self) -> int:
        return self.C.shape[0]

    def apply(self, x):
        x = np.asarray(x, dtype=float)
        return x @ self.C.T + self.d

    @cached_property
    def _svd(self):
        return np.linalg.svd(self.C)

    @property
    def rank(self) -> int:
        s = self._svd[1]
        if s.size == 0 or s[0] <= EPS_ZERO:
            return 0
        return int(np.sum(s > EPS_RANK * s[0]))

    @property
    def is_invertible(self) -> bool:
        return self.C.shape[0] == self.C.shape[1] and self.rank == self.C.shape[0]


def _hash_direction(width: int) -> np.ndarray:
    rng = np.random.default_rng(0x5EED)
    u = rng.standard_normal(width)
    return u / np.linalg.norm(u)


def _dedup_indices(constraints) -> tuple[list[int], list[tuple[str, ...]]]:
    """First-of-class indices under componentwise EPS_DUP equality, merged provenance.

    Buckets on a scalar projection so candidate pairs always land in adjacent
    buckets; exact check within buckets.
    """
    cs = list(constraints)
    if not cs:
        return [], []
    rows = np.stack([c.row() for c in cs])
    u = _hash_direction(rows.shape[1])
    width = EPS_DUP * float(np.abs(u).sum()) + 1e-300
    keys = np.floor(rows @ u / width).astype(np.int64)
    buckets: dict[int, list[int]] = {}
    kept: list[int] = []
    provs: list[list[str]] = []
    for i in range(len(cs)):
        hit = -1
        for bk in (keys[i] - 1, keys[i], keys[i] + 1):
            for pos in buckets.get(int(bk), ()):
                if np.abs(rows[i] - rows[kept[pos]]).max() <= EPS_DUP:
                    hit = pos
                    break
            if hit >= 0:
                break
        if hit < 0:
            buckets.setdefault(int(keys[i]), []).append(len(kept))
            kept.append(i)
            provs.append(list(cs[i].provenance))
        else:
            for tag in cs[i].provenance:
                if tag not in provs[hit]:
                    provs[hit].append(tag)
    return kept, [tuple(p) for p in provs]


def remove_duplicates(constraints) -> list[Constraint]:
    """Drop positive-scaling duplicates, keeping the first and merging provenance."""
    cs = list(constraints)
    kept, provs = _dedup_indices(cs)
    return [replace(cs[i], provenance=provs[pos]) for pos, i in enumerate(kept)]


def _box_max(a: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> float:
    """max of a.x over the box [lo, hi]; +inf when an active bound is infinite."""
    pos = a > 0
    neg = a < 0
    if np.any(pos & ~np.isfinite(hi)) or np.any(neg & ~np.isfinite(lo)):
        return math.inf
    val = 0.0
    if pos.any():
        val += float(a[pos] @ hi[pos])
    if neg.any():
        val += float(a[neg] @ lo[neg])
    return val


def _bounding_box(A, b, dim, backend) -> tuple[np.ndarray, np.ndarray]:
    lo = np.full(dim, -math.inf)
    hi = np.full(dim, math.inf)
    for i in range(dim):
        e = np.zeros(dim)
        e[i] = 1.0
        res = backend.maximize(e, A, b)
        if res.status == INFEASIBLE:
            raise EmptyPolyhedronError("polyhedron is empty")
        if res.status == OPTIMAL:
            hi[i] = res.objective
        res = backend.maximize(-e, A, b)
        if res.status == INFEASIBLE:
            raise EmptyPolyhedronError("polyhedron is empty")
        if res.status == OPTIMAL:
            lo[i] = -res.objective
    return lo, hi


def _antipodal_pairs(rows: np.ndarray) -> set[int]:
    """Indices participating in (a, b) / (-a, -b) pairs (equality-thin facets)."""
    flagged: set[int] = set()
    if len(rows) < 2:
        return flagged
    u = _hash_direction(rows.shape[1])
    width = EPS_DUP * float(np.abs(u).sum()) + 1e-300
    keys = np.floor(rows @ u / width).astype(np.int64)
    neg_keys = np.floor(-rows @ u / width).astype(np.int64)
    buckets: dict[int, list[int]] = {}
    for i, k in enumerate(keys):
        buckets.setdefault(int(k), []).append(i)
    for i in range(len(rows)):
        for bk in (neg_keys[i] - 1, neg_keys[i], neg_keys[i] + 1):
            for j in buckets.get(int(bk), ()):
                if j != i and np.abs(rows[i] + rows[j]).max() <= EPS_DUP:
                    flagged.add(i)
                    flagged.add(j)
    return flagged


def _essential(p: HPolyhedron, backend: LpBackend):
    """Shared core: (essential original indices, constraints with merged provenance)."""
    kept, provs = _dedup_indices(p.constraints)
    merged = {k: provs[pos] for pos, k in enumerate(kept)}
    work: list[int] = []
    for k in kept:
        c = p.constraints[k]
        if c.is_constant:
            if c.never_satisfied:
                raise EmptyPolyhedronError("polyhedron has an infeasible constant row")
            continue  # always satisfied, never essential
        work.append(k)
    if not work:
        return [], merged
    A = np.stack([p.constraints[k].a for k in work])
    b = np.array([p.constraints[k].b for k in work])

    if len(work) > 2 * p.dim:
        # prefilter pays for itself only past the 2*dim LPs it costs
        lo, hi = _bounding_box(A, b, p.dim, backend)
        survivors = [
            pos for pos in range(len(work)) if _box_max(A[pos], lo, hi) > b[pos] - EPS_LP
        ]
    else:
        survivors = list(range(len(work)))

    rows = np.column_stack([A, b])
    paired = _antipodal_pairs(rows)

    essential: list[int] = []
    for pos in survivors:
        if pos in paired:
            # one side of an equality pair: removal always changes the set
            essential.append(work[pos])
            continue
        res = backend.maximize(A[pos], np.delete(A, pos, axis=0), np.delete(b, pos))
        if res.status == UNBOUNDED:
            essential.append(work[pos])
        elif res.status == OPTIMAL:
            if res.objective > b[pos] + EPS_LP:
                essential.append(work[pos])
        elif res.status == INFEASIBLE:
            raise EmptyPolyhedronError("polyhedron is empty")
        else:  # pragma: no cover - backend contract
            raise LpError(f"LP failed while testing constraint {work[pos]}")
    return essential, merged


def essential_indices(p: HPolyhedron, backend: LpBackend | None = None) -> list[int]:
    """Indices (into p.constraints) of the essential constraints."""
    backend = backend or default_backend()
    idx, _ = _essential(p, backend)
    return idx


def essential_constraints(p: HPolyhedron, backend: LpBackend | None = None) -> HPolyhedron:
    """Minimal representation: duplicates merged, redundant rows LP-certified away.

    Requires p nonempty.  Bounding-box prefilter first (sound: a row with slack
    over the whole box is redundant), then one LP per surviving row.
    """
    backend = backend or default_backend()
    idx, merged = _essential(p, backend)
    cs = tuple(replace(p.constraints[i], provenance=merged[i]) for i in idx)
    return HPolyhedron(cs, p.dim)


def _chebyshev_rows(p: HPolyhedron) -> tuple[np.ndarray, np.ndarray]:
    # variables (x, r); rows a.x + ||a|| r <= b, constants become 0.x + 0 r <= b
    A = np.zeros((len(p.constraints), p.dim + 1))
    b = np.zeros(len(p.constraints))
    for i, c in enumerate(p.constraints):
        A[i, : p.dim] = c.a
        A[i, p.dim] = 0.0 if c.is_constant else 1.0
        b[i] = c.b
    return A, b


def chebyshev_center(
    p: HPolyhedron, backend: LpBackend | None = None
) -> tuple[np.ndarray | None, float]:
    """Center and radius of the largest inscribed ball (one LP).

    radius <= 0 signals empty interior; (None, -inf) signals an empty set.
    Unbounded problems are re-solved under an internal cap so a finite interior
    point is still returned.
    """
    backend = backend or default_backend()
    A, b = _chebyshev_rows(p)
    c = np.zeros(p.dim + 1)
    c[-1] = 1.0
    res = backend.maximize(c, A, b)
    if res.status == INFEASIBLE:
        return None, -math.inf
    if res.status == UNBOUNDED:
        cap = np.vstack([np.eye(p.dim + 1), -np.eye(p.dim + 1)])
        A = np.vstack([A, cap])
        b = np.concatenate([b, np.full(2 * (p.dim + 1), _BIG)])
        res = backend.maximize(c, A, b)
        if res.status != OPTIMAL:  # pragma: no cover - capped LP is bounded
            raise LpError("capped Chebyshev LP did not solve")
    return res.x[: p.dim], float(res.x[p.dim])


def is_empty(p: HPolyhedron, backend: LpBackend | None = None) -> bool:
    """True iff the feasibility LP is infeasible."""
    backend = backend or default_backend()
    if not p.constraints:
        return False
    res = backend.maximize(np.zeros(p.dim), p.A, p.b)
    if res.status == INFEASIBLE:
        return True
    if res.status == OPTIMAL:
        return False
    raise LpError("feasibility LP returned an unexpected status")


def intersect(
    p: HPolyhedron,
    q: HPolyhedron,
    minimize: bool = False,
    backend: LpBackend | None = None,
) -> HPolyhedron:
    """Concatenate constraints and drop duplicates; LP-minimize only on request."""
    if p.dim != q.dim:
        raise GeometryError(f"dimension mismatch: {p.dim} vs {q.dim}")
    out = HPolyhedron(tuple(remove_duplicates(p.constraints + q.constraints)), p.dim)
    if minimize:
        out = essential_constraints(out, backend)
    return out


def affine_preimage(p: HPolyhedron, m: AffineMap) -> HPolyhedron:
    """{x | A C x <= b - A d}; exact, no invertibility needed, not minimized."""
    if m.output_dim != p.dim:
        raise GeometryError(
            f"map output dim {m.output_dim} does not match polyhedron dim {p.dim}"
        )
    cs = tuple(
        normalize_constraint(m.C.T @ c.a, c.b - float(c.a @ m.d), c.provenance)
        for c in p.constraints
    )
    return HPolyhedron(cs, m.input_dim)


def _prune_rows(rows, provs, ambient, backend):
    """Normalize, dedup and LP-minimize an intermediate system during projection."""
    cs = []
    for r, pv in zip(rows, provs):
        c = normalize_constraint(r[:-1], r[-1], pv)
        if c.always_satisfied:
            continue
        if c.never_satisfied:
            raise EmptyPolyhedronError("projection produced an infeasible system")
        cs.append(c)
    poly = HPolyhedron(tuple(remove_duplicates(cs)), ambient)
    poly = essential_constraints(poly, backend)
    rows = [np.append(c.a, c.b) for c in poly.constraints]
    provs = [c.provenance for c in poly.constraints]
    return rows, provs


def _fourier_motzkin(rows, provs, n_keep, backend, max_constraints):
    """Eliminate trailing columns (between the kept block and the rhs) one at a time."""
    rows = [np.asarray(r, dtype=float) for r in rows]
    n_elim = rows[0].size - 1 - n_keep if rows else 0
    for _ in range(n_elim):
        col = rows[0].size - 2  # eliminate the last variable column
        zero_idx = [i for i, r in enumerate(rows) if abs(r[col]) <= EPS_ZERO]
        pos_idx = [i for i, r in enumerate(rows) if r[col] > EPS_ZERO]
        neg_idx = [i for i, r in enumerate(rows) if r[col] < -EPS_ZERO]
        new_rows = [np.delete(rows[i], col) for i in zero_idx]
        new_provs = [provs[i] for i in zero_idx]
        if len(new_rows) + len(pos_idx) * len(neg_idx) > max_constraints:
            raise ProjectionBudgetError(
                "projection exceeded the constraint budget; lower the composition "
                "horizon T or shrink the input/output sets"
            )
        for i in pos_idx:
            for j in neg_idx:
                combo = rows[i] / rows[i][col] - rows[j] / rows[j][col]
                new_rows.append(np.delete(combo, col))
                merged = list(provs[i])
                for tag in provs[j]:
                    if tag not in merged:
                        merged.append(tag)
                new_provs.append(tuple(merged))
        if not new_rows:
            return [], []
        rows, provs = _prune_rows(new_rows, new_provs, new_rows[0].size - 1, backend)
        if not rows:
            return [], []
    return rows, provs


def affine_image(
    p: HPolyhedron,
    m: AffineMap,
    backend: LpBackend | None = None,
    max_constraints: int = 10000,
) -> HPolyhedron:
    """Exact image {C x + d | x in p}.

    Invertible maps use the closed form A C^-1 y <= b + A C^-1 d.  Otherwise the
    system is rewritten in image coordinates via the SVD of C: the row-space
    block is substituted away, remaining null-space coordinates are eliminated
    by Fourier-Motzkin with LP pruning, and the affine hull of a rank-deficient
    image is pinned by explicit equality pairs.  Requires p nonempty.
    """
    backend = backend or default_backend()
    if p.dim != m.input_dim:
        raise GeometryError(
            f"polyhedron dim {p.dim} does not match map input dim {m.input_dim}"
        )
    live = [c for c in p.constraints if not c.is_constant]
    for c in p.constraints:
        if c.never_satisfied:
            raise EmptyPolyhedronError("cannot project an empty polyhedron")
    A = np.stack([c.a for c in live]) if live else np.zeros((0, p.dim))
    b = np.array([c.b for c in live])
    provs = [c.provenance for c in live]

    n, out = m.input_dim, m.output_dim
    U, s, Vt = np.linalg.svd(m.C)
    r = 0 if (s.size == 0 or s[0] <= EPS_ZERO) else int(np.sum(s > EPS_RANK * s[0]))

    if r == n == out:
        M = np.linalg.solve(m.C.T, A.T).T  # A C^-1
        cs = tuple(
            normalize_constraint(M[i], b[i] + float(M[i] @ m.d), provs[i])
            for i in range(len(b))
        )
        return HPolyhedron(cs, out)

    # x = V_r s^-1 U_r^T (y - d) + V_0 eta
    if r > 0:
        W = Vt[:r].T @ np.diag(1.0 / s[:r]) @ U[:, :r].T  # (n, out)
        Gy = A @ W
    else:
        Gy = np.zeros((len(b), out))
    rhs = b + Gy @ m.d
    ran_fm = r < n
    if ran_fm:
        Geta = A @ Vt[r:].T
        rows = [np.concatenate([Gy[i], Geta[i], [rhs[i]]]) for i in range(len(b))]
        rows, provs = _fourier_motzkin(rows, provs, out, backend, max_constraints)
    else:
        rows = [np.append(Gy[i], rhs[i]) for i in range(len(b))]

    cs = []
    for row, pv in zip(rows, provs):
        c = normalize_constraint(row[:-1], row[-1], pv)
        if not c.always_satisfied:
            cs.append(c)
    # affine hull of a rank-deficient image: U_0^T (y - d) = 0
    for k in range(r, out):
        u = U[:, k]
        cs.append(normalize_constraint(u, float(u @ m.d)))
        cs.append(normalize_constraint(-u, -float(u @ m.d)))
    poly = HPolyhedron(tuple(remove_duplicates(cs)), out)
    if ran_fm and poly.constraints:
        poly = essential_constraints(poly, backend)
    return poly
