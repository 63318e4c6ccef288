"""Exact and statistical checks of the occupancy/occupation identities and
of the jump-chain reduction, on individual models or on a random corpus.

Quantities here are computed by direct linear algebra, independently of
the value-iteration evaluators in :mod:`ctmdp.lift` and of the simplex in
:mod:`ctmdp.plan`.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .classify import classify, value_iterate_bellman
from .corpus import generate_corpus, random_any_policy, random_ct_policy, random_dt_policy
from .lift import evaluate_ct_stationary, evaluate_dt_stationary, lift_policy
from .model import CtmdpModel, StationaryPolicy, aggregate_under_policy, safe_div
from .plan import build_occupation_lp, solve_simplex
from .reduce import DtmdpModel, build_discounted_chain, build_jump_chain
from .sim import Ex1Scenario, run_ex1

TOL = 1e-9
TRANSIENCE_MARGIN = 1e-9
ALPHA_SWEEP = (1e-1, 1e-2, 1e-3, 1e-4)
SWEEP_TOL = 1e-3


@dataclass
class IdentityReport:
    name: str
    tolerance: float
    residuals: list = field(default_factory=list)
    cases: list = field(default_factory=list)
    skipped: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def add(self, residual: float, case: dict, tolerance: Optional[float] = None) -> None:
        tol = self.tolerance if tolerance is None else tolerance
        residual = float(residual)
        self.residuals.append(residual)
        self.cases.append(case)
        if not residual <= tol:
            self.failures.append({**case, "residual": residual})

    def merge(self, other: "IdentityReport") -> "IdentityReport":
        self.residuals += other.residuals
        self.cases += other.cases
        self.skipped += other.skipped
        self.failures += other.failures
        return self

    @property
    def max_residual(self) -> float:
        return max(self.residuals) if self.residuals else 0.0

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "tolerance": self.tolerance,
            "tested": len(self.residuals),
            "max_residual": self.max_residual,
            "skipped": self.skipped,
            "failures": self.failures[:20],
            "details": self.details,
        }


# --------------------------------------------------------------------------
# direct linear-algebra evaluation

def _reach(adj: np.ndarray) -> np.ndarray:
    r = adj | np.eye(adj.shape[0], dtype=bool)
    for _ in range(int(np.ceil(np.log2(max(adj.shape[0], 2)))) + 1):
        r = (r.astype(np.int64) @ r.astype(np.int64)) > 0
    return r


def exact_total_cost(P: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Expected total cost ``sum_n P^n c`` by one linear solve.

    ``P`` is row-stochastic, ``c >= 0`` may hold ``inf``.  Recurrent states
    are those that can be reached back from everything they reach.
    """
    adj = P > 0
    R = _reach(adj)
    recurrent = np.all(~R | R.T, axis=1)
    c_pos = c > 0
    bad = np.isinf(c) | (recurrent & (R & c_pos[None, :]).any(axis=1))
    infinite = (R & bad[None, :]).any(axis=1)
    J = np.zeros(c.size)
    J[infinite] = np.inf
    trans = ~recurrent & ~infinite
    if trans.any():
        A = np.eye(int(trans.sum())) - P[np.ix_(trans, trans)]
        J[trans] = np.linalg.solve(A, c[trans])
    return J


def exact_dt_values(d: DtmdpModel, sigma: StationaryPolicy) -> np.ndarray:
    probs = np.vstack([sigma.probs, np.eye(1, d.n_actions)])
    P = np.einsum("xa,xay->xy", probs, d.kernel)
    out = np.zeros((d.reduced_costs.shape[0], d.n_states))
    for i in range(out.shape[0]):
        with np.errstate(invalid="ignore"):
            c = np.where(probs > 0, probs * d.reduced_costs[i], 0.0).sum(axis=1)
        out[i] = exact_total_cost(P, c)[: d.n_states]
    return out


def _gamma_value(gamma: np.ndarray, values: np.ndarray) -> np.ndarray:
    with np.errstate(invalid="ignore"):
        return np.where(gamma > 0, gamma * values, 0.0).sum(axis=-1)


# --------------------------------------------------------------------------
# balance equations

def _resolvent(m: CtmdpModel, phi: StationaryPolicy, alpha: float):
    agg = aggregate_under_policy(m, phi)
    A = np.diag(alpha + agg.rate) - agg.flow.T
    return np.linalg.solve(A, m.initial), agg


def _resolvent_series(m: CtmdpModel, phi: StationaryPolicy, alpha: float, eps: float = 1e-17):
    """Same vector by summing discounted arrival distributions over jumps."""
    agg = aggregate_under_policy(m, phi)
    step = agg.flow / (alpha + agg.rate)[:, None]
    nu = np.asarray(m.initial, dtype=float).copy()
    acc = np.zeros_like(nu)
    for _ in range(10**6):
        acc += nu
        nu = nu @ step
        if nu.sum() < eps:
            break
    return acc / (alpha + agg.rate)


def check_discounted_balance(m: CtmdpModel, phi: StationaryPolicy, alpha: float,
                             tol: float = TOL) -> IdentityReport:
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    rep = IdentityReport("discounted_balance", tol)
    rho, agg = _resolvent(m, phi, alpha)
    series = _resolvent_series(m, phi, alpha)
    for name, vec in (("solve", rho), ("series", series)):
        lhs = (m.total_rate + alpha) * (vec[:, None] * phi.probs)
        rhs = m.initial + vec @ agg.flow
        res = np.abs(lhs.sum(axis=1) - rhs)
        for x in range(m.n_states):
            rep.add(res[x], {"alpha": alpha, "route": name, "state": m.states[x]})
    rep.add(np.max(np.abs(rho - series)), {"alpha": alpha, "route": "solve-vs-series"})
    rep.details["rho"] = rho.tolist()
    return rep


def transience_certificate(m: CtmdpModel, phi: StationaryPolicy):
    """Spectral radius of the jump chain on non-resting states."""
    agg = aggregate_under_policy(m, phi)
    moving = agg.rate > 0
    if not moving.any():
        return 0.0, moving
    sub = agg.jump[np.ix_(moving, moving)]
    return float(np.max(np.abs(np.linalg.eigvals(sub)))), moving


def absorption_distribution(m: CtmdpModel, phi: StationaryPolicy) -> np.ndarray:
    """Probability of coming to rest in each state, for a transient chain."""
    agg = aggregate_under_policy(m, phi)
    moving = agg.rate > 0
    Z = np.where(moving, 0.0, m.initial)
    if moving.any() and (~moving).any():
        T, R = np.nonzero(moving)[0], np.nonzero(~moving)[0]
        B = np.linalg.solve(np.eye(T.size) - agg.jump[np.ix_(T, T)], agg.jump[np.ix_(T, R)])
        Z[R] += m.initial[T] @ B
    return Z


def check_undiscounted_balance(m: CtmdpModel, phi: StationaryPolicy, tol: float = TOL,
                               sweep_tol: float = SWEEP_TOL) -> IdentityReport:
    rep = IdentityReport("undiscounted_balance", tol)
    radius, moving = transience_certificate(m, phi)
    rep.details["spectral_radius"] = radius
    if radius >= 1.0 - TRANSIENCE_MARGIN:
        rep.skipped.append(f"chain on non-resting states is not transient (spectral radius {radius:.12g})")
        return rep
    agg = aggregate_under_policy(m, phi)
    T = np.nonzero(moving)[0]
    visits = np.zeros(m.n_states)
    if T.size:
        visits[T] = np.linalg.solve((np.eye(T.size) - agg.jump[np.ix_(T, T)]).T, m.initial[T])
    rho = safe_div(visits, agg.rate)            # expected time; resting states handled by Z
    Z = absorption_distribution(m, phi)
    eta = rho[:, None] * phi.probs
    with np.errstate(invalid="ignore"):
        lhs = np.where(eta > 0, m.total_rate * eta, 0.0).sum(axis=1) + Z
    rhs = m.initial + rho @ agg.flow
    for x in range(m.n_states):
        rep.add(abs(lhs[x] - rhs[x]), {"gamma": m.states[x]})
    rep.add(abs(lhs.sum() - rhs.sum()), {"gamma": "S"})
    rep.add(abs(Z.sum() - 1.0), {"total_rest_probability": True})
    # alpha * eta_alpha -> Z as alpha decreases
    devs = []
    for alpha in ALPHA_SWEEP:
        r_alpha, _ = _resolvent(m, phi, alpha)
        devs.append(float(np.max(np.abs(alpha * r_alpha - Z))))
    rep.details["alpha_sweep"] = dict(zip(map(str, ALPHA_SWEEP), devs))
    trend = all(b <= a + 1e-12 for a, b in zip(devs, devs[1:]))
    rep.add(0.0 if trend else max(devs), {"alpha_sweep": "monotone"})
    rep.add(devs[-1], {"alpha_sweep": ALPHA_SWEEP[-1]}, tolerance=sweep_tol)
    rep.details["Z"] = Z.tolist()
    return rep


# --------------------------------------------------------------------------
# occupancy measures vs jump-chain marginals

def ct_occupancy(m: CtmdpModel, phi: StationaryPolicy, n_max: int, alpha: float = 0.0) -> np.ndarray:
    """M^n(x, a) for n = 0..n_max under a stationary CTMDP policy."""
    agg = aggregate_under_policy(m, phi)
    q = m.total_rate
    out = np.zeros((n_max + 1, m.n_states, m.n_actions))
    nu = np.asarray(m.initial, dtype=float).copy()
    weight = safe_div((alpha + q) * phi.probs, (alpha + agg.rate)[:, None])
    step = safe_div(agg.flow, (alpha + agg.rate)[:, None])
    for n in range(n_max + 1):
        out[n] = nu[:, None] * weight
        nu = nu @ step
    return out


def dt_marginals(d: DtmdpModel, sigma: StationaryPolicy, n_max: int) -> np.ndarray:
    """P(X_n = x, A_{n+1} = a) on original states for n = 0..n_max."""
    probs = np.vstack([sigma.probs, np.eye(1, d.n_actions)])
    P = np.einsum("xa,xay->xy", probs, d.kernel)
    dist = np.asarray(d.initial, dtype=float).copy()
    out = np.zeros((n_max + 1, d.n_states, d.n_actions))
    for n in range(n_max + 1):
        out[n] = dist[: d.n_states, None] * sigma.probs
        dist = dist @ P
    return out


def induced_dt_policy(m: CtmdpModel, phi: StationaryPolicy, cls, alpha: float = 0.0) -> StationaryPolicy:
    """sigma(a|x) proportional to (alpha + q_x(a)) phi(a|x); f* on S2."""
    w = (alpha + m.total_rate) * phi.probs
    probs = np.zeros_like(w)
    for x in range(m.n_states):
        if x in cls.s2 and alpha == 0.0:
            probs[x, cls.f_star[x]] = 1.0
        elif w[x].sum() > 0:
            probs[x] = w[x] / w[x].sum()
        else:
            probs[x, 0] = 1.0
    return StationaryPolicy(probs)


def check_occupancy_equality(m: CtmdpModel, phi: StationaryPolicy, n_max: int = 10,
                             alpha: Optional[float] = None, cls=None, tol: float = 1e-10) -> IdentityReport:
    alpha = 0.0 if alpha is None else float(alpha)
    cls = classify(m) if cls is None else cls
    rep = IdentityReport("occupancy_equality", tol)
    for x in cls.s2:
        if phi.probs[x, cls.f_star[x]] != 1.0:
            rep.skipped.append(f"policy differs from f* at {m.states[x]} in S2")
            return rep
    for x in range(m.n_states):
        if x not in cls.zeta and x not in cls.s2 and phi.probs[x, cls.psi_star[x]] != 1.0:
            rep.skipped.append(f"policy differs from psi* at {m.states[x]} outside zeta")
            return rep
    ct = ct_occupancy(m, phi, n_max, alpha)
    sigma = induced_dt_policy(m, phi, cls, alpha)
    d = build_jump_chain(m) if alpha == 0.0 else build_discounted_chain(m, alpha)
    dt = dt_marginals(d, sigma, n_max)
    keep = np.array([x not in cls.s2 for x in range(m.n_states)])
    if alpha == 0.0:
        # the CT path rests where qbar = 0 and the jump chain is absorbed in
        # the cemetery; neither carries occupancy there
        resting = keep & (aggregate_under_policy(m, phi).rate == 0.0)
        keep &= ~resting
        rep.details["excluded_resting"] = [m.states[x] for x in np.nonzero(resting)[0]]
    dev = np.abs(ct - dt)[:, keep, :]
    for n in range(n_max + 1):
        rep.add(dev[n].max() if dev[n].size else 0.0, {"alpha": alpha, "n": n})
    return rep


# --------------------------------------------------------------------------
# lift round trip

def relative_deviation(a: np.ndarray, b: np.ndarray) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    both_inf = np.isinf(a) & np.isinf(b)
    if np.any(np.isinf(a) ^ np.isinf(b)):
        return np.inf
    fa, fb = a[~both_inf], b[~both_inf]
    scale = np.maximum(np.abs(fa), np.abs(fb))
    with np.errstate(invalid="ignore", divide="ignore"):
        rel = np.where(scale > 0, np.abs(fa - fb) / scale, 0.0)
    return float(rel.max()) if rel.size else 0.0


def check_roundtrip(m: CtmdpModel, n_policies: int = 20, seed: int = 0, tol: float = TOL) -> IdentityReport:
    rng = np.random.default_rng(seed)
    cls = classify(m)
    d = build_jump_chain(m)
    rep = IdentityReport("lift_roundtrip", tol)
    for k in range(n_policies):
        sigma = random_dt_policy(d, cls, rng, deterministic=(k % 4 == 0))
        dt = evaluate_dt_stationary(d, sigma)
        ct = evaluate_ct_stationary(m, lift_policy(sigma, m, cls))
        rep.add(relative_deviation(dt.values, ct.values), {"policy": k})
    return rep


# --------------------------------------------------------------------------
# structural claims

def check_structure(m: CtmdpModel, tol: float = 1e-10) -> IdentityReport:
    rep = IdentityReport("structure", 0.0)
    cls = classify(m)
    ns = m.n_states
    p = cls.partition
    parts = [p.s1, p.s2, p.s3]
    cover = set().union(*parts) == set(range(ns))
    disjoint = sum(len(s) for s in parts) == ns
    rep.add(0.0 if cover and disjoint and p.s1_hat <= p.s1 else 1.0, {"claim": "partition"})
    rep.add(0.0 if len(cls.w_sets) <= max(ns, 1) else 1.0, {"claim": "W stabilises within |S| steps"})
    rep.add(0.0 if cls.zeta <= cls.w else 1.0, {"claim": "zeta subset of W"})
    v = value_iterate_bellman(m, "aggregate").value
    on_w = np.array([x in cls.w for x in range(ns)])
    rep.add(0.0 if np.all(v[on_w] > 0) else 1.0, {"claim": "V > 0 on W"})
    rep.add(0.0 if np.all(v[~on_w] <= tol) else float(np.max(v[~on_w])), {"claim": "V = 0 off W"})
    agg = aggregate_under_policy(m, StationaryPolicy.deterministic(cls.psi_star, m.n_actions))
    off = ~on_w
    leak = float(agg.jump[np.ix_(off, on_w)].sum()) if off.any() and on_w.any() else 0.0
    cost_off = float(agg.costs[:, off].sum()) if off.any() else 0.0
    rep.add(leak + cost_off, {"claim": "psi* keeps zeta^c closed at zero cost"})
    d = build_jump_chain(m)
    sol = solve_simplex(build_occupation_lp(d, cls))
    hat_mass = float(sum(m.initial[x] for x in cls.s1_hat if x in cls.zeta))
    if hat_mass > 0:
        rep.add(0.0 if not sol.optimal else 1.0, {"claim": "gamma(S1^ in zeta) > 0 makes the LP infeasible"})
    if sol.optimal:
        rep.add(0.0 if hat_mass == 0 else 1.0, {"claim": "optimal LP implies gamma(S1^ in zeta) = 0"})
        rep.add(0.0 if np.all(np.isfinite(sol.mu)) else 1.0, {"claim": "occupation measure finite on zeta"})
    rep.details.update(status=sol.status, zeta=[m.states[x] for x in sorted(cls.zeta)])
    return rep


# --------------------------------------------------------------------------
# LP optimum vs a grid over randomised stationary policies

def _policy_from_params(theta: np.ndarray, n_actions: int) -> StationaryPolicy:
    if n_actions == 1:
        return StationaryPolicy(np.ones((theta.size, 1)))
    return StationaryPolicy(np.column_stack([1.0 - theta, theta]))


@dataclass(frozen=True)
class GridResult:
    value: float
    theta: Optional[np.ndarray]
    evaluated: int

    @property
    def feasible(self) -> bool:
        return np.isfinite(self.value)


def grid_search_optimum(d: DtmdpModel, points: int = 1000, refine: bool = True,
                        feas_tol: float = TOL, bisect_steps: int = 60) -> GridResult:
    """Minimise the jump-chain objective over randomised stationary policies.

    Policies are parameterised by ``theta[x] = sigma(second action | x)``.
    The grid has about ``points`` nodes.  With ``refine``, every sign change
    of a constraint between adjacent grid nodes is located by bisection
    along the grid line, and, with two constraints, points where both bind
    are located inside each coordinate plane whose remaining coordinates
    are deterministic.  Only models with at most two actions are supported.
    """
    if d.n_actions > 2:
        raise ValueError("grid search supports at most two actions")
    ns, nc = d.n_states, d.bounds.size
    gamma = d.initial[:ns]
    dims = ns if d.n_actions == 2 else 0
    k = max(2, int(round(points ** (1.0 / dims)))) if dims else 1
    axis = np.linspace(0.0, 1.0, k)
    count = [0]

    def perf(theta):
        count[0] += 1
        vals = exact_dt_values(d, _policy_from_params(np.asarray(theta, dtype=float), d.n_actions))
        return _gamma_value(gamma, vals)

    def feasible(v):
        return np.isfinite(v[0]) and np.all(v[1:] <= d.bounds + feas_tol)

    best = [np.inf, None]

    def consider(theta, v=None):
        v = perf(theta) if v is None else v
        if feasible(v) and v[0] < best[0]:
            best[0], best[1] = float(v[0]), np.array(theta, dtype=float)
        return v

    if dims == 0:
        consider(np.zeros(ns))
        return GridResult(best[0], best[1], count[0])

    nodes = list(itertools.product(range(k), repeat=dims))
    table = {}
    for node in nodes:
        table[node] = consider(axis[list(node)])
    if not refine:
        return GridResult(best[0], best[1], count[0])

    def root(theta_at, j, good, bad):
        # constraint j holds at good and fails at bad; returns the last point where it holds
        for _ in range(bisect_steps):
            mid = 0.5 * (good + bad)
            if perf(theta_at(mid))[j + 1] <= d.bounds[j] + feas_tol:
                good = mid
            else:
                bad = mid
        return good

    # along a grid line each constraint is monotone in the free coordinate, so
    # the feasible segment ends at grid nodes or at single-constraint roots
    for node in nodes:
        for ax in range(dims):
            if node[ax] + 1 >= k:
                continue
            nb = node[:ax] + (node[ax] + 1,) + node[ax + 1:]
            base = axis[list(node)].copy()

            def theta_at(s, base=base, ax=ax):
                t = base.copy()
                t[ax] = s
                return t
            lo, hi = axis[node[ax]], axis[nb[ax]]
            for j in range(nc):
                ok0 = table[node][j + 1] <= d.bounds[j] + feas_tol
                ok1 = table[nb][j + 1] <= d.bounds[j] + feas_tol
                if ok0 != ok1:
                    consider(theta_at(root(theta_at, j, lo, hi) if ok0 else root(theta_at, j, hi, lo)))

    if nc >= 2 and dims >= 2:
        for ax, ay in itertools.combinations(range(dims), 2):
            rest = [z for z in range(dims) if z not in (ax, ay)]
            for corner in itertools.product((0.0, 1.0), repeat=len(rest)):
                _plane_candidates(ax, ay, rest, corner, dims, perf, consider, d.bounds, bisect_steps)
    return GridResult(best[0], best[1], count[0])


def _plane_candidates(ax, ay, rest, corner, dims, perf, consider, bounds, steps, scan: int = 65):
    """Points of a coordinate plane where the first two constraints both bind."""

    def theta(sx, sy):
        t = np.zeros(dims)
        t[rest] = corner
        t[ax], t[ay] = sx, sy
        return t

    def g(sx, sy, j):
        v = perf(theta(sx, sy))
        return v[j + 1] - bounds[j]

    def boundary_y(sx):
        lo_v, hi_v = g(sx, 0.0, 0), g(sx, 1.0, 0)
        if not (np.isfinite(lo_v) and np.isfinite(hi_v)) or np.sign(lo_v) == np.sign(hi_v):
            return None
        lo, hi = 0.0, 1.0
        for _ in range(steps):
            mid = 0.5 * (lo + hi)
            if np.sign(g(sx, mid, 0)) == np.sign(lo_v):
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    xs = np.linspace(0.0, 1.0, scan)
    prev = None
    for sx in xs:
        sy = boundary_y(sx)
        h = g(sx, sy, 1) if sy is not None else None
        if prev is not None and h is not None and prev[2] is not None and np.sign(h) != np.sign(prev[2]):
            lo, hi, hlo = prev[0], sx, prev[2]
            for _ in range(steps):
                mid = 0.5 * (lo + hi)
                my = boundary_y(mid)
                if my is None:
                    break
                hm = g(mid, my, 1)
                if np.sign(hm) == np.sign(hlo):
                    lo = mid
                else:
                    hi = mid
            for cx in (lo, hi):
                cy = boundary_y(cx)
                if cy is not None:
                    consider(theta(cx, cy))
        prev = (sx, sy, h)


def check_lp_oracle(m: CtmdpModel, tol: float = 1e-6, points: int = 1000) -> IdentityReport:
    rep = IdentityReport("lp_oracle", tol)
    if m.n_states > 3 or m.n_actions > 2:
        rep.skipped.append("oracle limited to at most 3 states and 2 actions")
        return rep
    cls = classify(m)
    d = build_jump_chain(m)
    sol = solve_simplex(build_occupation_lp(d, cls))
    grid = grid_search_optimum(d, points=points)
    rep.details.update(lp_status=sol.status, lp_value=sol.objective, grid_value=grid.value,
                       grid_evaluations=grid.evaluated)
    if sol.optimal != grid.feasible:
        rep.add(np.inf, {"claim": "feasibility verdicts agree", "lp": sol.status, "grid": grid.feasible})
    elif sol.optimal:
        rep.add(abs(sol.objective - grid.value), {"claim": "optimal values agree"})
        if sol.objective > grid.value + tol:
            rep.failures.append({"claim": "LP above a feasible grid point"})
    else:
        rep.add(0.0, {"claim": "both infeasible", "lp": sol.status})
    return rep


# --------------------------------------------------------------------------

def check_ex1_gap(scenario: Ex1Scenario = Ex1Scenario()) -> IdentityReport:
    rep = IdentityReport("example_reduction_gap", 0.0)
    r = run_ex1(scenario)
    margin = r.ctmdp_cost_estimate + 3 * r.ctmdp_cost_stderr - r.dtmdp_value
    rep.add(max(0.0, margin) if margin < 0 else margin + 1.0, {"n_traj": scenario.n_traj, "seed": scenario.seed})
    rep.details.update(r.to_dict())
    return rep


def verify_model(m: CtmdpModel, seed: int = 0, n_policies: int = 3) -> list:
    """Every identity check on one model; returns a list of reports."""
    rng = np.random.default_rng(seed)
    cls = classify(m)
    reports = {name: IdentityReport(name, tol) for name, tol in
               (("discounted_balance", TOL), ("undiscounted_balance", TOL), ("occupancy_equality", 1e-10))}
    for _ in range(n_policies):
        phi = random_any_policy(m, rng)
        for alpha in (1.0, 0.1):
            reports["discounted_balance"].merge(check_discounted_balance(m, phi, alpha))
        reports["undiscounted_balance"].merge(check_undiscounted_balance(m, phi))
        psi = random_ct_policy(m, cls, rng)
        for alpha in (0.0, 0.5):
            reports["occupancy_equality"].merge(check_occupancy_equality(m, psi, 10, alpha, cls))
    out = list(reports.values())
    out.append(check_roundtrip(m, seed=seed))
    out.append(check_structure(m))
    if m.n_states <= 3 and m.n_actions <= 2:
        out.append(check_lp_oracle(m))
    return out


def verify_corpus(seed: int = 20240601, size: int = 100) -> list:
    """Aggregate reports over the seeded random corpus plus the gap check."""
    merged = {}
    for k, m in enumerate(generate_corpus(seed, size)):
        for rep in verify_model(m, seed=seed + k):
            for case in rep.cases:
                case["model"] = k
            for f in rep.failures:
                f["model"] = k
            if rep.name in merged:
                merged[rep.name].merge(rep)
            else:
                rep.details = {}
                merged[rep.name] = rep
    out = list(merged.values())
    out.append(check_ex1_gap())
    return out
