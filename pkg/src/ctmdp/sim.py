"""Monte Carlo simulation of CTMDP trajectories under stationary or
piecewise-constant time-dependent Markov policies.

Sojourns are sampled by inverting the cumulative hazard against a unit
exponential draw.  When the draw exceeds the total hazard the path comes to
rest in its current state for good.  All per-sojourn integrals (costs,
occupation times, occupancy weights) are computed in closed form.

Trajectories are simulated in fixed-size blocks; block ``k`` draws from a
generator seeded by ``SeedSequence(seed, spawn_key=(k,))``, so a batch is
bit-identical whatever the number of worker threads.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
from scipy import integrate, optimize

from .model import CtmdpModel, MarkovTimePolicy, StationaryPolicy, Trajectory

DEFAULT_HORIZON = 1e4
DEFAULT_JUMP_CAP = 10**6
DEFAULT_RECORD = 16
BLOCK_SIZE = 8192


class SojournLaw:
    """Piecewise-constant description of the sojourn in each state.

    Every table is indexed ``[x, k]`` by state and piece; piece ``k`` of
    state ``x`` covers elapsed times ``[start[x, k], start[x, k+1])``.
    Unused pieces are padded with ``start = inf``.
    """

    def __init__(self, m: CtmdpModel, policy: Union[StationaryPolicy, MarkovTimePolicy]):
        if isinstance(policy, StationaryPolicy):
            policy = MarkovTimePolicy.from_stationary(policy)
        if not isinstance(policy, MarkovTimePolicy):
            raise TypeError(f"unsupported policy type {type(policy).__name__}")
        if policy.shape != (m.n_states, m.n_actions):
            raise ValueError(f"policy shape {policy.shape} does not match model {(m.n_states, m.n_actions)}")
        ns, na, nc = m.n_states, m.n_actions, m.costs.shape[0]
        K = max(len(b) for b in policy.breakpoints) + 1
        q = m.total_rate
        self.n_pieces = K
        self.start = np.full((ns, K), np.inf)
        self.rows = np.zeros((ns, K, na))
        for x in range(ns):
            k = len(policy.breakpoints[x]) + 1
            self.start[x, 0] = 0.0
            self.start[x, 1:k] = policy.breakpoints[x]
            self.rows[x, :k] = policy.rows[x]
        self.valid = np.isfinite(self.start)
        self.last = self.valid.sum(axis=1) - 1
        self.hazard = np.einsum("xka,xa->xk", self.rows, q)
        self.cost_rate = np.einsum("xka,ixa->xki", self.rows, m.costs)
        flow = np.einsum("xka,xay->xky", self.rows, m.rates)
        with np.errstate(invalid="ignore", divide="ignore"):
            kern = np.where(self.hazard[..., None] > 0, flow / self.hazard[..., None], 0.0)
        self.next_cdf = np.cumsum(kern, axis=2)
        self.occupancy_rate = self.rows * q[:, None, :]
        self.cum_hazard = self._cumulate(self.hazard[..., None])[..., 0]
        self.cum_cost = self._cumulate(self.cost_rate)
        self.cum_rows = self._cumulate(self.rows)
        self.cum_occupancy = self._cumulate(self.occupancy_rate)
        self.total_hazard = np.array([self.cum_hazard[x, self.last[x]] if self.hazard[x, self.last[x]] == 0
                                      else np.inf for x in range(ns)])
        self.n_states, self.n_actions, self.n_costs = ns, na, nc
        self.q = q

    def _lengths(self):
        nxt = np.concatenate([self.start[:, 1:], np.full((self.start.shape[0], 1), np.inf)], axis=1)
        with np.errstate(invalid="ignore"):
            return np.where(self.valid, nxt - self.start, 0.0)

    def _cumulate(self, rate):
        lengths = self._lengths()[..., None]
        with np.errstate(invalid="ignore"):
            inc = np.where(rate > 0, rate * lengths, 0.0)
        out = np.zeros_like(rate)
        out[:, 1:] = np.cumsum(inc[:, :-1], axis=1)
        return out

    def piece_at(self, xs, s):
        return (self.start[xs] <= np.asarray(s)[:, None]).sum(axis=1) - 1

    def integral(self, rate, cum, xs, s):
        """int_0^s rate[x](u) du per row; rate/cum shaped (S, K, m)."""
        s = np.asarray(s, dtype=float)
        k = self.piece_at(xs, s)
        r = rate[xs, k]
        with np.errstate(invalid="ignore"):
            tail = np.where(r > 0, r * (s - self.start[xs, k])[:, None], 0.0)
        return cum[xs, k] + tail

    def discounted_integral(self, rate, alpha, xs, s):
        """int_0^s e^{-alpha u} rate[x](u) du per row."""
        s = np.asarray(s, dtype=float)
        start = self.start[xs]                                  # (n, K)
        nxt = np.concatenate([start[:, 1:], np.full((start.shape[0], 1), np.inf)], axis=1)
        lo = np.minimum(start, s[:, None])
        hi = np.minimum(nxt, s[:, None])
        w = np.where(self.valid[xs] & (hi > lo), (np.exp(-alpha * lo) - np.exp(-alpha * hi)) / alpha, 0.0)
        return np.einsum("nk,nkm->nm", w, rate[xs])

    def invert(self, xs, draws):
        """Sojourn lengths for unit-exponential ``draws``; also the piece index."""
        H = np.where(self.valid[xs], self.cum_hazard[xs], np.inf)
        k = (H <= draws[:, None]).sum(axis=1) - 1
        h = self.hazard[xs, k]
        with np.errstate(divide="ignore", invalid="ignore"):
            theta = np.where(h > 0, self.start[xs, k] + (draws - H[np.arange(len(xs)), k]) / h, np.inf)
        return theta, k


@dataclass(frozen=True, eq=False)
class SimulationBatch:
    model: CtmdpModel
    law: SojournLaw
    n_traj: int
    horizon: float
    jump_cap: int
    seed: int
    alpha: Optional[float]
    costs: np.ndarray               # (n, N+1), integrated up to the horizon
    cost_infinite: np.ndarray       # (n, N+1), path rests with positive cost rate
    occupation: np.ndarray          # (n, S, A), time-in-(x, a) up to the horizon
    occupation_discounted: Optional[np.ndarray]
    n_jumps: np.ndarray
    truncated: np.ndarray           # horizon or jump cap hit before resting
    resting_state: np.ndarray       # -1 unless the path came to rest
    rec_states: np.ndarray          # (n, R), -1 padded
    rec_times: np.ndarray           # jump-in times t_n
    rec_sojourns: np.ndarray        # full (untruncated) sojourn lengths

    def trajectory(self, k: int) -> Trajectory:
        valid = self.rec_states[k] >= 0
        n = int(valid.sum())
        states = self.rec_states[k, :n].copy()
        soj = self.rec_sojourns[k, :n].copy()
        times = self.rec_times[k, :n].copy()
        ends = np.minimum(soj, self.horizon - times)
        costs = self.law.integral(self.law.cost_rate, self.law.cum_cost, states, ends) if n else np.zeros((0, 1))
        rest = int(self.resting_state[k])
        return Trajectory(jump_times=times, states=states, sojourns=soj, costs=costs,
                          resting_state=None if rest < 0 else rest,
                          truncated=bool(self.truncated[k]),
                          complete=bool(self.n_jumps[k] < self.rec_states.shape[1]))


def _sample_index(cdf, u):
    # scale by the row total so rounding in the cdf never selects a null entry
    return (cdf <= (u * cdf[:, -1])[:, None]).sum(axis=1)


def _simulate_block(m, law, n, horizon, jump_cap, alpha, record, initial, rng):
    ns, na, nc = m.n_states, m.n_actions, m.costs.shape[0]
    cdf0 = np.cumsum(initial)
    x = _sample_index(np.broadcast_to(cdf0, (n, ns)), rng.random(n))
    t = np.zeros(n)
    active = np.ones(n, dtype=bool)
    costs = np.zeros((n, nc))
    cost_inf = np.zeros((n, nc), dtype=bool)
    occ = np.zeros((n, ns, na))
    occ_d = np.zeros((n, ns, na)) if alpha is not None else None
    n_jumps = np.zeros(n, dtype=np.int64)
    truncated = np.zeros(n, dtype=bool)
    rest = np.full(n, -1, dtype=np.int64)
    rec_x = np.full((n, record), -1, dtype=np.int64)
    rec_t = np.full((n, record), np.nan)
    rec_s = np.full((n, record), np.nan)
    step = 0
    while active.any():
        if step >= jump_cap:
            truncated[active] = True
            break
        idx = np.nonzero(active)[0]
        xs = x[idx]
        theta, _ = law.invert(xs, rng.exponential(size=idx.size))
        if step < record:
            rec_x[idx, step] = xs
            rec_t[idx, step] = t[idx]
            rec_s[idx, step] = theta
        end = np.minimum(theta, horizon - t[idx])
        costs[idx] += law.integral(law.cost_rate, law.cum_cost, xs, end)
        occ[idx, xs] += law.integral(law.rows, law.cum_rows, xs, end)
        if occ_d is not None:
            occ_d[idx, xs] += np.exp(-alpha * t[idx])[:, None] * law.discounted_integral(law.rows, alpha, xs, end)
        jumped = np.isfinite(theta) & (t[idx] + theta <= horizon)
        resting = ~np.isfinite(theta)
        ri = idx[resting]
        rest[ri] = xs[resting]
        cost_inf[ri] = law.cost_rate[xs[resting], law.last[xs[resting]]] > 0
        truncated[idx[~jumped & ~resting]] = True
        ji = idx[jumped]
        if ji.size:
            xj = xs[jumped]
            k = law.piece_at(xj, theta[jumped])
            y = _sample_index(law.next_cdf[xj, k], rng.random(ji.size))
            t[ji] += theta[jumped]
            x[ji] = y
            n_jumps[ji] += 1
        active[idx[~jumped]] = False
        step += 1
    return dict(costs=costs, cost_infinite=cost_inf, occupation=occ, occupation_discounted=occ_d,
                n_jumps=n_jumps, truncated=truncated, resting_state=rest,
                rec_states=rec_x, rec_times=rec_t, rec_sojourns=rec_s)


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(block,)))


def simulate(m: CtmdpModel, policy: Union[StationaryPolicy, MarkovTimePolicy], n_traj: int,
             horizon: float = DEFAULT_HORIZON, jump_cap: int = DEFAULT_JUMP_CAP, seed: int = 0,
             alpha: Optional[float] = None, initial=None, record: int = DEFAULT_RECORD,
             workers: int = 1, block_size: int = BLOCK_SIZE) -> SimulationBatch:
    if n_traj <= 0 or horizon <= 0 or jump_cap <= 0:
        raise ValueError("n_traj, horizon and jump_cap must be positive")
    if alpha is not None and not alpha > 0:
        raise ValueError("alpha must be positive")
    law = SojournLaw(m, policy)
    gamma = np.asarray(m.initial if initial is None else initial, dtype=float)
    if gamma.shape != (m.n_states,) or np.any(gamma < 0) or abs(gamma.sum() - 1) > 1e-12:
        raise ValueError("initial distribution must be a probability vector over the model states")
    sizes = [min(block_size, n_traj - s) for s in range(0, n_traj, block_size)]

    def run(k):
        return _simulate_block(m, law, sizes[k], horizon, jump_cap, alpha, record, gamma, block_rng(seed, k))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(len(sizes))))
    else:
        parts = [run(k) for k in range(len(sizes))]
    merged = {}
    for key in parts[0]:
        merged[key] = None if parts[0][key] is None else np.concatenate([p[key] for p in parts])
    return SimulationBatch(model=m, law=law, n_traj=n_traj, horizon=float(horizon), jump_cap=int(jump_cap),
                           seed=int(seed), alpha=alpha, **merged)


# --------------------------------------------------------------------------
# estimators

def _mean_stderr(samples: np.ndarray):
    n = samples.shape[0]
    mean = samples.mean(axis=0)
    if n < 2:
        return mean, np.zeros_like(mean)
    return mean, samples.std(axis=0, ddof=1) / math.sqrt(n)


@dataclass(frozen=True)
class CostEstimate:
    mean: np.ndarray
    stderr: np.ndarray
    unbounded: np.ndarray       # per cost index: some path rests with positive cost rate
    truncated: int
    n_traj: int


def estimate_costs(batch: SimulationBatch) -> CostEstimate:
    mean, se = _mean_stderr(batch.costs)
    return CostEstimate(mean, se, batch.cost_infinite.any(axis=0), int(batch.truncated.sum()), batch.n_traj)


@dataclass(frozen=True)
class OccupancyEstimate:
    mass: np.ndarray            # (n_max+1, S, A)
    stderr: np.ndarray
    total: np.ndarray           # mass over S x A per jump index
    total_stderr: np.ndarray
    n_traj: int
    alpha: Optional[float] = None

    def bound_holds(self, k: float = 3.0) -> bool:
        return bool(np.all(self.total <= 1.0 + k * self.total_stderr))


def estimate_occupancy(batch: SimulationBatch, n_max: int, alpha: Optional[float] = None) -> OccupancyEstimate:
    if n_max >= batch.rec_states.shape[1]:
        raise ValueError(f"only {batch.rec_states.shape[1]} jumps per path were recorded")
    law = batch.law
    n, ns, na = batch.n_traj, law.n_states, law.n_actions
    per = np.zeros((n, n_max + 1, ns, na))
    for step in range(n_max + 1):
        xs = batch.rec_states[:, step]
        have = np.nonzero(xs >= 0)[0]
        if not have.size:
            continue
        x = xs[have]
        theta = batch.rec_sojourns[have, step]
        if alpha is None:
            w = law.integral(law.occupancy_rate, law.cum_occupancy, x, theta)
        else:
            rate = law.rows * (alpha + law.q[:, None, :])
            w = np.exp(-alpha * batch.rec_times[have, step])[:, None] * law.discounted_integral(rate, alpha, x, theta)
        per[have, step, x] = w
    mass, se = _mean_stderr(per)
    total, total_se = _mean_stderr(per.sum(axis=(2, 3)))
    return OccupancyEstimate(mass, se, total, total_se, n, alpha)


@dataclass(frozen=True)
class OccupationEstimate:
    mean: np.ndarray            # (S, A)
    stderr: np.ndarray
    unbounded: np.ndarray       # (S, A): grows with the horizon
    horizon: float
    truncated_fraction: float
    rested_fraction: float
    alpha: Optional[float] = None


def estimate_occupation(batch: SimulationBatch, alpha: Optional[float] = None) -> OccupationEstimate:
    rested = batch.resting_state >= 0
    if alpha is None:
        mean, se = _mean_stderr(batch.occupation)
        law = batch.law
        unbounded = np.zeros((law.n_states, law.n_actions), dtype=bool)
        for x in np.unique(batch.resting_state[rested]):
            unbounded[x] = law.rows[x, law.last[x]] > 0
    else:
        if batch.alpha is None or batch.alpha != alpha:
            raise ValueError("discounted occupation needs a batch simulated with the same alpha")
        mean, se = _mean_stderr(batch.occupation_discounted)
        unbounded = np.zeros(mean.shape, dtype=bool)
    return OccupationEstimate(mean, se, unbounded, batch.horizon, float(batch.truncated.mean()),
                              float(rested.mean()), alpha)


# --------------------------------------------------------------------------
# closed-form time rules (continuous action sets)

@dataclass(frozen=True)
class TimeRule:
    """Sojourn law of a single state under a named time-dependent rule.

    ``rate(s)`` and ``cost_rate(s)`` are the policy-averaged jump rate and
    cost rate at elapsed time ``s``.  Closed forms for the cumulative
    integrals and the hazard inverse are used when given; otherwise they
    are obtained by adaptive quadrature and root finding.
    """

    name: str
    rate: Callable[[float], float]
    cost_rate: Callable[[float], float]
    cum_rate: Optional[Callable] = None
    cum_cost: Optional[Callable] = None
    inverse: Optional[Callable] = None
    total_rate: Optional[float] = None

    def cumulative_hazard(self, s: float) -> float:
        if self.cum_rate is not None:
            return float(self.cum_rate(s))
        return integrate.quad(self.rate, 0.0, s, epsabs=1e-10, limit=200)[0]

    def total_hazard(self) -> float:
        if self.total_rate is not None:
            return self.total_rate
        return integrate.quad(self.rate, 0.0, np.inf, epsabs=1e-10, limit=200)[0]

    def cost_integral(self, s: float) -> float:
        if self.cum_cost is not None:
            return float(self.cum_cost(s))
        return integrate.quad(self.cost_rate, 0.0, s, epsabs=1e-10, limit=200)[0]

    def sojourn(self, draw: float) -> float:
        if draw >= self.total_hazard():
            return np.inf
        if self.inverse is not None:
            return float(self.inverse(draw))
        hi = 1.0
        while self.cumulative_hazard(hi) < draw:
            hi *= 2.0
        return optimize.brentq(lambda s: self.cumulative_hazard(s) - draw, 0.0, hi, xtol=1e-13)


def elapsed_time_rule(closed_form: bool = True) -> TimeRule:
    """Action equal to elapsed time with rate and cost rate ``e^{-a}``.

    Closed forms accept arrays.
    """
    def f(s):
        return math.exp(-s)

    if not closed_form:
        return TimeRule("a(t)=t", f, f)
    return TimeRule("a(t)=t", f, f,
                    cum_rate=lambda s: -np.expm1(-np.asarray(s, dtype=float)),
                    cum_cost=lambda s: -np.expm1(-np.asarray(s, dtype=float)),
                    inverse=lambda e: -np.log1p(-np.asarray(e, dtype=float)),
                    total_rate=1.0)


@dataclass(frozen=True)
class Ex1Scenario:
    seed: int = 0
    n_traj: int = 100_000
    horizon: float = DEFAULT_HORIZON


@dataclass(frozen=True)
class Ex1Report:
    ctmdp_cost_estimate: float
    ctmdp_cost_stderr: float
    p_no_jump_estimate: float
    p_no_jump_stderr: float
    dtmdp_value: float
    n_traj: int

    @property
    def gap_holds(self) -> bool:
        return self.ctmdp_cost_estimate + 3 * self.ctmdp_cost_stderr < self.dtmdp_value

    def to_dict(self) -> dict:
        return {
            "ctmdp_cost_estimate": self.ctmdp_cost_estimate,
            "ctmdp_cost_stderr": self.ctmdp_cost_stderr,
            "p_no_jump_estimate": self.p_no_jump_estimate,
            "p_no_jump_stderr": self.p_no_jump_stderr,
            "dtmdp_value": self.dtmdp_value,
            "gap": self.dtmdp_value - self.ctmdp_cost_estimate,
            "gap_holds": self.gap_holds,
            "n_traj": self.n_traj,
        }


def simulate_time_rule(rule: TimeRule, n_traj: int, seed: int, horizon: float = DEFAULT_HORIZON,
                       block_size: int = BLOCK_SIZE):
    """First-sojourn costs and no-jump indicators for a single-state rule."""
    costs = np.empty(n_traj)
    stays = np.empty(n_traj, dtype=bool)
    closed = rule.inverse is not None and rule.cum_cost is not None and rule.total_rate is not None
    for k, lo in enumerate(range(0, n_traj, block_size)):
        n = min(block_size, n_traj - lo)
        draws = block_rng(seed, k).exponential(size=n)
        if closed:
            stay = draws >= rule.total_rate
            theta = np.full(n, np.inf)
            theta[~stay] = rule.inverse(draws[~stay])
            c = rule.cum_cost(np.minimum(theta, horizon))
        else:
            theta = np.array([rule.sojourn(e) for e in draws])
            stay = ~np.isfinite(theta)
            c = np.array([rule.cost_integral(min(s, horizon)) for s in theta])
        costs[lo:lo + n] = c
        stays[lo:lo + n] = stay
    return costs, stays


def run_ex1(scenario: Ex1Scenario = Ex1Scenario()) -> Ex1Report:
    if scenario.n_traj < 1:
        raise ValueError("n_traj must be at least 1")
    costs, stays = simulate_time_rule(elapsed_time_rule(), scenario.n_traj, scenario.seed, scenario.horizon)
    cost, cost_se = _mean_stderr(costs)
    p, p_se = _mean_stderr(stays.astype(float))
    # every jump-chain policy pays c/q = 1 at the transient state, then absorbs
    return Ex1Report(float(cost), float(cost_se), float(p), float(p_se), 1.0, scenario.n_traj)
