"""State classification: zero-rate actions, the S1/S1^/S2/S3 partition,
the W-sets, the positive-value set zeta, the selectors f* and psi*, and
value iteration for the aggregate-cost Bellman equation."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from ._chains import DEFAULT_MAX_ITER, DEFAULT_TOL, DIVERGENCE_CAP
from .model import INF, CtmdpModel, safe_div


class ClassificationError(RuntimeError):
    """A selector could not be built; indicates an internal inconsistency."""


@dataclass(frozen=True)
class Partition:
    s1: frozenset
    s1_hat: frozenset
    s2: frozenset
    s3: frozenset

    def label(self, x: int) -> str:
        if x in self.s1_hat:
            return "S1_hat"
        if x in self.s1:
            return "S1"
        if x in self.s2:
            return "S2"
        return "S3"


@dataclass(frozen=True)
class BellmanResult:
    value: np.ndarray
    converged: bool
    sweeps: int

    @property
    def finite(self) -> np.ndarray:
        return np.isfinite(self.value)


@dataclass(frozen=True)
class Classification:
    zero_rate_actions: tuple
    partition: Partition
    w_sets: tuple
    w: frozenset
    zeta: frozenset
    f_star: dict
    psi_star: np.ndarray
    bellman: BellmanResult

    @property
    def s1(self):
        return self.partition.s1

    @property
    def s1_hat(self):
        return self.partition.s1_hat

    @property
    def s2(self):
        return self.partition.s2

    @property
    def s3(self):
        return self.partition.s3

    @property
    def value(self) -> np.ndarray:
        return self.bellman.value

    def in_zeta(self, x: int) -> bool:
        return x in self.zeta

    def w_index(self, x: int) -> Optional[int]:
        for j, wj in enumerate(self.w_sets, start=1):
            if x in wj:
                return j
        return None


def compute_zero_rate_sets(m: CtmdpModel) -> tuple:
    q = m.total_rate
    return tuple(frozenset(np.nonzero(q[x] == 0.0)[0].tolist()) for x in range(m.n_states))


def partition_states(m: CtmdpModel) -> Partition:
    q = m.total_rate
    qc = q + m.aggregate_cost
    qmin, qmax, qcmin = q.min(axis=1), q.max(axis=1), qc.min(axis=1)
    s1 = {x for x in range(m.n_states) if qmin[x] == 0.0 and qcmin[x] > 0.0}
    s1_hat = {x for x in s1 if qmax[x] == 0.0}
    s2 = {x for x in range(m.n_states) if qcmin[x] == 0.0}
    s3 = {x for x in range(m.n_states) if qmin[x] > 0.0}
    return Partition(frozenset(s1), frozenset(s1_hat), frozenset(s2), frozenset(s3))


def select_fstar(m: CtmdpModel, partition: Partition) -> dict:
    qc = m.total_rate + m.aggregate_cost
    out = {}
    for x in sorted(partition.s2):
        hits = np.nonzero(qc[x] == 0.0)[0]
        if hits.size == 0:
            raise ClassificationError(f"state {m.states[x]} is in S2 but no action has zero cost and rate")
        out[x] = int(hits[0])
    return out


def compute_W(m: CtmdpModel):
    """Return ``(w_sets, W)``; ``w_sets[j-1]`` is W_j, listed until it stabilises."""
    agg = m.aggregate_cost
    w_sets = []
    current = agg.min(axis=1) > 0.0
    while True:
        w_sets.append(frozenset(np.nonzero(current)[0].tolist()))
        into = m.rates[:, :, current].sum(axis=2)
        nxt = (into + agg).min(axis=1) > 0.0
        if np.array_equal(nxt, current):
            break
        current = nxt
    return tuple(w_sets), w_sets[-1]


def _expected(p: np.ndarray, v: np.ndarray) -> np.ndarray:
    """sum_y p[..., y] v[y] with 0 * inf = 0."""
    with np.errstate(invalid="ignore"):
        return np.where(p > 0, p * v, 0.0).sum(axis=-1)


def _select_cost(m: CtmdpModel, cost_selector) -> np.ndarray:
    if isinstance(cost_selector, str):
        if cost_selector != "aggregate":
            raise ValueError(f"unknown cost selector {cost_selector!r}")
        return m.aggregate_cost
    return m.costs[int(cost_selector)]


def value_iterate_bellman(m: CtmdpModel, cost_selector: Union[str, int] = "aggregate",
                          tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
                          cap: float = DIVERGENCE_CAP) -> BellmanResult:
    """Minimal nonnegative solution of the jump-chain Bellman equation.

    Iterates ``V <- min_a { c(x,a)/q_x(a) + sum_y q(y|x,a)/q_x(a) V(y) }``
    from ``V = 0``.  States that cannot reach the zero-value set almost
    surely are set to ``inf`` up front, so that the remaining iteration
    is geometric instead of drifting linearly toward the divergence cap.
    """
    q = m.total_rate
    chat = safe_div(_select_cost(m, cost_selector), q)
    p = safe_div(m.rates, q[:, :, None])
    ns = m.n_states

    def sweep(v):
        return (chat + _expected(p, v)).min(axis=1)

    v = np.zeros(ns)
    for _ in range(ns + 1):
        nxt = sweep(v)
        if np.any(nxt < v):
            raise AssertionError("Bellman iterates must be nondecreasing")
        v = nxt
    zero = v == 0.0

    # almost-sure reachability of the zero set through finite-cost actions
    region = np.ones(ns, dtype=bool)
    finite_pair = np.isfinite(chat)
    while True:
        allowed = finite_pair & ~((p > 0) & ~region[None, None, :]).any(axis=2)
        reached = zero & region
        while True:
            step = allowed & ((p > 0) & reached[None, None, :]).any(axis=2)
            nxt = reached | step.any(axis=1)
            if np.array_equal(nxt, reached):
                break
            reached = nxt
        if np.array_equal(reached, region):
            break
        region = reached

    v = np.where(region, 0.0, INF)
    converged = False
    sweeps = ns + 1
    while sweeps < max_iter:
        nxt = sweep(v)
        sweeps += 1
        fin = np.isfinite(nxt)
        if np.any(nxt[fin] < v[fin]):
            raise AssertionError("Bellman iterates must be nondecreasing")
        change = np.max(np.abs(nxt[fin] - v[fin])) if fin.any() else 0.0
        v = nxt
        if np.any(v > cap):
            v = np.where(v > cap, INF, v)
        if change <= tol:
            converged = True
            break
    return BellmanResult(value=v, converged=converged, sweeps=sweeps)


def compute_zeta(m: CtmdpModel, partition: Optional[Partition] = None,
                 f_star: Optional[dict] = None, w: Optional[frozenset] = None):
    """Return ``(zeta, psi_star)``; zeta is taken to be W."""
    if partition is None:
        partition = partition_states(m)
    if f_star is None:
        f_star = select_fstar(m, partition)
    if w is None:
        _, w = compute_W(m)
    zeta = frozenset(w)
    outside = np.array([x not in zeta for x in range(m.n_states)])
    agg = m.aggregate_cost
    psi = np.zeros(m.n_states, dtype=int)
    for x in range(m.n_states):
        if x in partition.s2:
            psi[x] = f_star[x]
        elif not outside[x]:
            psi[x] = 0
        else:
            ok = (agg[x] == 0.0) & ~((m.rates[x] > 0) & ~outside[None, :]).any(axis=1)
            hits = np.nonzero(ok)[0]
            if hits.size == 0:
                raise ClassificationError(
                    f"state {m.states[x]} lies outside zeta but has no zero-cost action closed in zeta^c")
            psi[x] = int(hits[0])
    psi.setflags(write=False)
    return zeta, psi


def classify(m: CtmdpModel, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> Classification:
    partition = partition_states(m)
    f_star = select_fstar(m, partition)
    w_sets, w = compute_W(m)
    zeta, psi = compute_zeta(m, partition, f_star, w)
    return Classification(
        zero_rate_actions=compute_zero_rate_sets(m),
        partition=partition,
        w_sets=w_sets,
        w=w,
        zeta=zeta,
        f_star=f_star,
        psi_star=psi,
        bellman=value_iterate_bellman(m, "aggregate", tol, max_iter),
    )


def classification_to_dict(m: CtmdpModel, cls: Classification) -> dict:
    rows = {}
    for x, sx in enumerate(m.states):
        v = float(cls.value[x])
        rows[sx] = {
            "partition": cls.partition.label(x),
            "zero_rate_actions": [m.actions[a] for a in sorted(cls.zero_rate_actions[x])],
            "w_index": cls.w_index(x),
            "in_zeta": x in cls.zeta,
            "value": "inf" if np.isinf(v) else v,
            "f_star": m.actions[cls.f_star[x]] if x in cls.f_star else None,
            "psi_star": m.actions[int(cls.psi_star[x])],
        }
    return {"states": rows, "w_iterations": len(cls.w_sets),
            "value_converged": cls.bellman.converged, "value_sweeps": cls.bellman.sweeps}
