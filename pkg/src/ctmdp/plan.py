"""Occupation-measure linear program for the constrained jump-chain problem.

Variables are ``mu(x, a)`` for ``x`` in zeta and non-forbidden ``a``.
States outside zeta are left to psi*, which keeps them cost-free.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .classify import Classification
from .model import StationaryPolicy
from .reduce import DtmdpModel
from .simplex import MAX_PIVOTS, PIVOT_TOL, simplex


@dataclass(frozen=True)
class OccupationLp:
    pairs: tuple            # (x, a) per variable
    flow_states: tuple      # x per flow row
    flow_matrix: np.ndarray
    flow_rhs: np.ndarray
    constraint_matrix: np.ndarray
    bounds: np.ndarray
    objective: np.ndarray
    n_states: int
    n_actions: int

    @property
    def n_variables(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True)
class OccupationSolution:
    status: str                     # optimal | infeasible | no-finite-value
    mu: np.ndarray                  # (S, A) table, zero off the LP support
    objective: float
    constraint_usage: np.ndarray
    slack: np.ndarray
    basis: tuple
    pivots: int
    min_reduced_cost: float
    flow_residual: float
    policy: Optional[StationaryPolicy] = field(default=None)

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def build_occupation_lp(d: DtmdpModel, cls: Classification, gamma=None, bounds=None) -> OccupationLp:
    if d.discount_alpha is not None:
        raise ValueError("the occupation LP is built on the undiscounted jump chain")
    ns, na = d.n_states, d.n_actions
    gamma = np.asarray(d.initial[:ns] if gamma is None else gamma, dtype=float)
    bounds = np.asarray(d.bounds if bounds is None else bounds, dtype=float)
    zeta = sorted(cls.zeta)
    pairs = tuple((x, a) for x in zeta for a in range(na) if not d.forbidden[x, a])
    row_of = {x: r for r, x in enumerate(zeta)}
    p = d.transient_kernel
    flow = np.zeros((len(zeta), len(pairs)))
    for k, (y, b) in enumerate(pairs):
        flow[row_of[y], k] += 1.0
        for x in zeta:
            flow[row_of[x], k] -= p[y, b, x]
    costs = np.array([[d.reduced_costs[i, x, a] for (x, a) in pairs]
                      for i in range(d.reduced_costs.shape[0])]).reshape(d.reduced_costs.shape[0], len(pairs))
    return OccupationLp(
        pairs=pairs,
        flow_states=tuple(zeta),
        flow_matrix=flow,
        flow_rhs=gamma[zeta] if zeta else np.zeros(0),
        constraint_matrix=costs[1:],
        bounds=bounds,
        objective=costs[0],
        n_states=ns,
        n_actions=na,
    )


def _standard_form(lp: OccupationLp, with_constraints: bool = True):
    nv = lp.n_variables
    nc = lp.constraint_matrix.shape[0] if with_constraints else 0
    nf = len(lp.flow_states)
    A = np.zeros((nf + nc, nv + nc))
    A[:nf, :nv] = lp.flow_matrix
    if nc:
        A[nf:, :nv] = lp.constraint_matrix
        A[nf:, nv:] = np.eye(nc)
    b = np.concatenate([lp.flow_rhs, lp.bounds[:nc]])
    c = np.concatenate([lp.objective, np.zeros(nc)])
    return A, b, c


def solve_simplex(lp: OccupationLp, tol: float = PIVOT_TOL, max_pivots: int = MAX_PIVOTS) -> OccupationSolution:
    A, b, c = _standard_form(lp)
    res = simplex(A, b, c, tol=tol, max_pivots=max_pivots)
    nv = lp.n_variables
    mu = np.zeros((lp.n_states, lp.n_actions))
    if res.status != "optimal":
        flow_only = simplex(*_standard_form(lp, with_constraints=False), tol=tol, max_pivots=max_pivots)
        status = "no-finite-value" if flow_only.status != "optimal" else "infeasible"
        nan = np.full(lp.bounds.size, np.nan)
        return OccupationSolution(status, mu, np.inf, nan, nan, res.basis, res.pivots, np.nan, np.nan)
    x = res.x[:nv]
    for k, (s, a) in enumerate(lp.pairs):
        mu[s, a] = x[k]
    usage = lp.constraint_matrix @ x if nv else np.zeros(lp.bounds.size)
    residual = float(np.max(np.abs(lp.flow_matrix @ x - lp.flow_rhs))) if lp.flow_states else 0.0
    names = []
    for j in res.basis:
        names.append(f"mu{lp.pairs[j]}" if j < nv else f"slack{j - nv + 1}")
    return OccupationSolution(
        status="optimal",
        mu=mu,
        objective=float(lp.objective @ x) if nv else 0.0,
        constraint_usage=np.asarray(usage, dtype=float),
        slack=lp.bounds - usage,
        basis=tuple(names),
        pivots=res.pivots,
        min_reduced_cost=float(res.reduced_costs.min()) if res.reduced_costs.size else 0.0,
        flow_residual=residual,
    )


def extract_policy(sol: OccupationSolution, cls: Classification, d: DtmdpModel) -> StationaryPolicy:
    ns, na = d.n_states, d.n_actions
    probs = np.zeros((ns, na))
    mass = sol.mu.sum(axis=1)
    for x in range(ns):
        if x in cls.s2:
            probs[x, cls.f_star[x]] = 1.0
        elif x in cls.zeta and mass[x] > 0:
            probs[x] = sol.mu[x] / mass[x]
        elif x not in cls.zeta:
            probs[x, cls.psi_star[x]] = 1.0
        else:
            choice = int(cls.psi_star[x])
            if d.forbidden[x, choice]:
                allowed = np.nonzero(~d.forbidden[x])[0]
                choice = int(allowed[0]) if allowed.size else 0
            probs[x, choice] = 1.0
    return StationaryPolicy(probs)


def solve_occupation(d: DtmdpModel, cls: Classification, **kw) -> OccupationSolution:
    """Build, solve, and attach the extracted policy when optimal."""
    sol = solve_simplex(build_occupation_lp(d, cls), **kw)
    if sol.optimal:
        sol = OccupationSolution(**{**sol.__dict__, "policy": extract_policy(sol, cls, d)})
    return sol
