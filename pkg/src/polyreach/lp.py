"""Thin linear-programming layer: maximize c.x over {x | A x <= b}, free variables.

Core geometry never touches a solver API directly; everything goes through a
backend object so the solver can be swapped and LP calls can be counted per
run.  The default backend is GLPK (via cvxopt) for its low per-call overhead
and exact vertex solutions; scipy's HiGHS is the fallback.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Protocol

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

LP_TOL_ENV = "POLYREACH_LP_TOL"


class LpError(RuntimeError):
    """Solver failed to return a usable verdict (numerical trouble, iteration cap)."""


@dataclass
class LpResult:
    status: str
    objective: float | None
    x: np.ndarray | None


class LpBackend(Protocol):
    calls: int

    def maximize(self, c, A, b) -> LpResult: ...


def _env_tol() -> float | None:
    env = os.environ.get(LP_TOL_ENV)
    return float(env) if env else None


def _trivial(c) -> LpResult:
    # no constraints: the origin is optimal for a zero objective, else unbounded
    if not np.asarray(c, dtype=float).any():
        return LpResult(OPTIMAL, 0.0, np.zeros(np.asarray(c).size))
    return LpResult(UNBOUNDED, None, None)


class GlpkLpBackend:
    """GLPK simplex through cvxopt. Counts calls for run statistics."""

    def __init__(self, feasibility_tol: float | None = None):
        from cvxopt import glpk, matrix  # noqa: F401 (import check)

        self._glpk = glpk
        self._matrix = matrix
        self.calls = 0
        if feasibility_tol is None:
            feasibility_tol = _env_tol()
        self.options: dict = {"msg_lev": "GLP_MSG_OFF"}
        if feasibility_tol is not None:
            self.options["tol_bnd"] = feasibility_tol

    def maximize(self, c, A, b) -> LpResult:
        self.calls += 1
        c = np.asarray(c, dtype=float)
        b = np.asarray(b, dtype=float)
        if b.size == 0:
            return _trivial(c)
        A = np.asarray(A, dtype=float).reshape(b.size, c.size)
        out = self._glpk.lp(
            self._matrix(-c),
            self._matrix(A),
            self._matrix(b),
            options=self.options,
        )
        status, x = out[0], out[1]
        if status == "optimal":
            x = np.asarray(x, dtype=float).reshape(-1)
            return LpResult(OPTIMAL, float(c @ x), x)
        if status == "primal infeasible":
            return LpResult(INFEASIBLE, None, None)
        if status == "dual infeasible":
            # primal feasible problems with an infeasible dual are unbounded
            return LpResult(UNBOUNDED, None, None)
        raise LpError(f"GLPK returned status {status!r}")


class ScipyLpBackend:
    """HiGHS-backed fallback via scipy.optimize.linprog."""

    def __init__(self, feasibility_tol: float | None = None):
        self.calls = 0
        if feasibility_tol is None:
            feasibility_tol = _env_tol()
        self.feasibility_tol = feasibility_tol

    def maximize(self, c, A, b) -> LpResult:
        from scipy.optimize import linprog

        self.calls += 1
        c = np.asarray(c, dtype=float)
        A = np.asarray(A, dtype=float)
        b = np.asarray(b, dtype=float)
        if b.size == 0:
            return _trivial(c)
        options = {}
        if self.feasibility_tol is not None:
            options["primal_feasibility_tolerance"] = self.feasibility_tol
        res = linprog(
            -c,
            A_ub=A,
            b_ub=b,
            bounds=(None, None),
            method="highs",
            options=options or None,
        )
        if res.status == 0:
            return LpResult(OPTIMAL, -float(res.fun), np.asarray(res.x, dtype=float))
        if res.status == 2:
            return LpResult(INFEASIBLE, None, None)
        if res.status == 3:
            return LpResult(UNBOUNDED, None, None)
        raise LpError(f"LP solver failure (status {res.status}): {res.message}")


def default_backend() -> LpBackend:
    try:
        return GlpkLpBackend()
    except ImportError:
        return ScipyLpBackend()
