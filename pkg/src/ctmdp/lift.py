"""Lifting jump-chain policies to continuous time, and exact evaluation of
stationary policies on either side."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._chains import DEFAULT_MAX_ITER, DEFAULT_TOL, minimal_total_cost
from .classify import Classification
from .model import CtmdpModel, StationaryPolicy, aggregate_under_policy, safe_div
from .reduce import DtmdpModel

FEAS_TOL = 1e-9


class LiftError(ValueError):
    pass


@dataclass(frozen=True)
class ValueReport:
    values: np.ndarray      # J_i(x), shape (N+1, S)
    aggregate: np.ndarray   # sum_x gamma(x) J_i(x), shape (N+1,)
    feasible: np.ndarray    # J_j(gamma) <= d_j + tol, shape (N,)
    converged: bool
    sweeps: int

    @property
    def objective(self) -> float:
        return float(self.aggregate[0])

    def to_dict(self, m: CtmdpModel) -> dict:
        def num(v):
            return "inf" if np.isinf(v) else float(v)
        return {
            "values": [{sx: num(self.values[i, x]) for x, sx in enumerate(m.states)}
                       for i in range(self.values.shape[0])],
            "aggregate": [num(v) for v in self.aggregate],
            "feasible": [bool(f) for f in self.feasible],
            "converged": self.converged,
        }


def _weighted(gamma: np.ndarray, values: np.ndarray) -> np.ndarray:
    with np.errstate(invalid="ignore"):
        return np.where(gamma[None, :] > 0, gamma[None, :] * values, 0.0).sum(axis=1)


def _report(values, gamma, bounds, converged, sweeps) -> ValueReport:
    agg = _weighted(np.asarray(gamma, dtype=float), values)
    feasible = agg[1:] <= np.asarray(bounds, dtype=float) + FEAS_TOL
    return ValueReport(values, agg, feasible, converged, sweeps)


def lift_policy(sigma: StationaryPolicy, m: CtmdpModel, cls: Classification) -> StationaryPolicy:
    q = m.total_rate
    probs = np.zeros((m.n_states, m.n_actions))
    for x in range(m.n_states):
        row = sigma.probs[x]
        if x in cls.s2:
            probs[x, cls.f_star[x]] = 1.0
        elif x in cls.s1_hat:
            probs[x, 0] = 1.0
        else:
            if np.any((row > 0) & (q[x] == 0.0)):
                raise LiftError(f"policy puts mass on a zero-rate action at state {m.states[x]}")
            w = safe_div(row, q[x])
            probs[x] = w / w.sum()
    return StationaryPolicy(probs)


def evaluate_dt_stationary(d: DtmdpModel, sigma: StationaryPolicy, tol: float = DEFAULT_TOL,
                           max_iter: int = DEFAULT_MAX_ITER) -> ValueReport:
    ns = d.n_states
    probs = np.vstack([sigma.probs, np.eye(1, d.n_actions)])
    P = np.einsum("xa,xay->xy", probs, d.kernel)
    values = np.zeros((d.reduced_costs.shape[0], ns))
    converged, sweeps = True, 0
    for i in range(d.reduced_costs.shape[0]):
        with np.errstate(invalid="ignore"):
            c = np.where(probs > 0, probs * d.reduced_costs[i], 0.0).sum(axis=1)
        J, ok, k = minimal_total_cost(P, c, tol, max_iter)
        values[i] = J[:ns]
        converged &= ok
        sweeps = max(sweeps, k)
    return _report(values, d.initial[:ns], d.bounds, converged, sweeps)


def evaluate_ct_stationary(m: CtmdpModel, phi: StationaryPolicy, tol: float = DEFAULT_TOL,
                           max_iter: int = DEFAULT_MAX_ITER) -> ValueReport:
    ns = m.n_states
    agg = aggregate_under_policy(m, phi)
    P = np.zeros((ns + 1, ns + 1))
    P[:ns, :ns] = agg.jump
    P[:ns, ns] = np.where(agg.rate == 0.0, 1.0, 0.0)
    P[ns, ns] = 1.0
    values = np.zeros((m.costs.shape[0], ns))
    converged, sweeps = True, 0
    for i in range(m.costs.shape[0]):
        c = np.append(safe_div(agg.costs[i], agg.rate), 0.0)
        J, ok, k = minimal_total_cost(P, c, tol, max_iter)
        values[i] = J[:ns]
        converged &= ok
        sweeps = max(sweeps, k)
    return _report(values, m.initial, m.bounds, converged, sweeps)


def check_feasibility(report: ValueReport, bounds) -> bool:
    bounds = np.asarray(bounds, dtype=float)
    return bool(np.all(report.aggregate[1:] <= bounds + FEAS_TOL))
