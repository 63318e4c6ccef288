"""Dense two-phase primal simplex with Bland's rule.

Solves ``min c @ x  s.t.  A x = b, x >= 0``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PIVOT_TOL = 1e-10
MAX_PIVOTS = 10**6


class SimplexError(RuntimeError):
    pass


@dataclass(frozen=True)
class SimplexResult:
    status: str                 # "optimal" | "infeasible"
    x: np.ndarray
    objective: float
    basis: tuple
    pivots: int
    reduced_costs: np.ndarray
    phase1_objective: float


def _pivot(T: np.ndarray, obj: np.ndarray, row: int, col: int) -> None:
    T[row] /= T[row, col]
    for i in range(T.shape[0]):
        if i != row and T[i, col] != 0.0:
            T[i] -= T[i, col] * T[row]
    if obj[col] != 0.0:
        obj -= obj[col] * T[row]
    T[row, col] = 1.0


def _iterate(T, obj, basis, n_cols, tol, budget):
    """Bland pivoting on columns ``< n_cols``; returns pivots used."""
    pivots = 0
    m = T.shape[0]
    while True:
        enter = -1
        for j in range(n_cols):
            if obj[j] < -tol:
                enter = j
                break
        if enter < 0:
            return pivots
        col = T[:, enter]
        best, leave = np.inf, -1
        for i in range(m):
            if col[i] > tol:
                ratio = T[i, -1] / col[i]
                if ratio < best - 1e-15 or (abs(ratio - best) <= 1e-15 and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave < 0:
            raise SimplexError(f"objective unbounded along column {enter}")
        _pivot(T, obj, leave, enter)
        basis[leave] = enter
        pivots += 1
        if pivots > budget:
            raise SimplexError(f"pivot cap {budget} exceeded")


def simplex(A, b, c, tol: float = PIVOT_TOL, max_pivots: int = MAX_PIVOTS,
            feas_tol: float = 1e-9) -> SimplexResult:
    A = np.array(A, dtype=float, ndmin=2)
    b = np.array(b, dtype=float).reshape(-1)
    c = np.array(c, dtype=float).reshape(-1)
    m, n = A.shape if A.size else (b.size, c.size)
    A = A.reshape(m, n)
    if n == 0 or m == 0:
        if m and np.any(np.abs(b) > feas_tol):
            return SimplexResult("infeasible", np.zeros(n), np.inf, (), 0, np.zeros(n), float(np.abs(b).sum()))
        return SimplexResult("optimal", np.zeros(n), 0.0, (), 0, c.copy(), 0.0)

    sign = np.where(b < 0, -1.0, 1.0)
    T = np.zeros((m, n + m + 1))
    T[:, :n] = A * sign[:, None]
    T[:, n:n + m] = np.eye(m)
    T[:, -1] = b * sign
    basis = list(range(n, n + m))

    # phase 1: minimise the sum of artificials
    obj = np.zeros(n + m + 1)
    obj[n:n + m] = 1.0
    for i in range(m):
        obj -= T[i]
    pivots = _iterate(T, obj, basis, n + m, tol, max_pivots)
    phase1 = -obj[-1]
    if phase1 > feas_tol * (1.0 + np.abs(b).sum()):
        return SimplexResult("infeasible", np.zeros(n), np.inf, tuple(basis), pivots, np.zeros(n), float(phase1))

    # drive artificials out of the basis; drop redundant rows
    keep = []
    for i in range(m):
        if basis[i] >= n:
            cand = np.nonzero(np.abs(T[i, :n]) > tol)[0]
            if cand.size:
                _pivot(T, obj, i, int(cand[0]))
                basis[i] = int(cand[0])
                pivots += 1
            else:
                continue
        keep.append(i)
    T = np.hstack([T[keep, :n], T[keep, -1:]])
    basis = [basis[i] for i in keep]

    # phase 2
    obj = np.zeros(n + 1)
    obj[:n] = c
    for i, j in enumerate(basis):
        if obj[j] != 0.0:
            obj -= obj[j] * T[i]
    pivots += _iterate(T, obj, basis, n, tol, max_pivots - pivots)
    x = np.zeros(n)
    for i, j in enumerate(basis):
        x[j] = T[i, -1]
    x[x < 0] = 0.0
    return SimplexResult("optimal", x, float(c @ x), tuple(basis), pivots, obj[:n].copy(), float(phase1))
