"""Seeded random finite CTMDPs and policies for property checks."""
from __future__ import annotations

import numpy as np

from .classify import Classification, classify
from .model import CtmdpModel, StationaryPolicy
from .plan import build_occupation_lp, solve_simplex
from .reduce import DtmdpModel, build_jump_chain

CORPUS_SEED = 20240601
CORPUS_SIZE = 100


def random_model(rng: np.random.Generator, max_states: int = 8, max_actions: int = 4,
                 rate_high: float = 5.0, zero_rate: float = 0.2, sparse_rate: float = 0.2,
                 cost_high: float = 2.0, zero_cost: float = 0.3, free_exit: float = 0.5,
                 n_states=None, n_actions=None, n_constraints=None) -> CtmdpModel:
    """Random model; ``zero_rate`` and ``zero_cost`` are per (state, action) pair.

    A pair is zero-rate (an absorbing action) with probability ``zero_rate``;
    a fraction ``free_exit`` of those is also zero-cost in every index, and
    the remaining pairs are made zero-cost so that the overall zero-cost
    fraction is ``zero_cost``.  Other rate entries vanish independently with
    probability ``sparse_rate``.
    """
    ns = int(n_states or rng.integers(1, max_states + 1))
    na = int(n_actions or rng.integers(1, max_actions + 1))
    nc = int(n_constraints or rng.integers(1, 3))
    rates = rng.uniform(0.0, rate_high, size=(ns, na, ns))
    rates[rng.random(rates.shape) < sparse_rate] = 0.0
    absorbing = rng.random((ns, na)) < zero_rate
    rates[absorbing] = 0.0
    rates[np.arange(ns), :, np.arange(ns)] = 0.0
    costs = rng.uniform(0.0, cost_high, size=(nc + 1, ns, na))
    other = max(0.0, (zero_cost - zero_rate * free_exit) / (1.0 - zero_rate * free_exit))
    draw = rng.random((ns, na))
    free = np.where(absorbing, draw < free_exit, draw < other)
    costs[:, free] = 0.0
    support = rng.random(ns) < 0.6
    support[rng.integers(ns)] = True
    gamma = np.where(support, rng.dirichlet(np.ones(ns)), 0.0)
    gamma /= gamma.sum()
    bounds = rng.uniform(0.0, 2.0, size=nc)
    return CtmdpModel(tuple(f"x{k}" for k in range(ns)), tuple(f"b{k}" for k in range(na)),
                      rates, costs, bounds, gamma)


def generate_corpus(seed: int = CORPUS_SEED, size: int = CORPUS_SIZE) -> list:
    """``size`` models; the first fifth have at most 3 states and exactly 2 actions."""
    rng = np.random.default_rng(seed)
    small = size // 5
    out = []
    for k in range(size):
        if k < small:
            out.append(random_model(rng, n_states=int(rng.integers(1, 4)), n_actions=2))
        else:
            out.append(random_model(rng))
    return out


def binding_models(seed: int, count: int, max_tries: int = 100_000) -> list:
    """Small two-action models whose constrained optimum is positive and has
    a binding constraint, found by rejection sampling."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(max_tries):
        if len(out) == count:
            break
        m = random_model(rng, n_states=int(rng.integers(2, 4)), n_actions=2)
        sol = solve_simplex(build_occupation_lp(build_jump_chain(m), classify(m)))
        if sol.optimal and sol.objective > 1e-6 and np.any(sol.slack < 1e-9):
            out.append(m)
    return out


def random_dt_policy(d: DtmdpModel, cls: Classification, rng: np.random.Generator,
                     deterministic: bool = False) -> StationaryPolicy:
    """Jump-chain policy avoiding forbidden pairs, f* on S2, first action on S1^."""
    probs = np.zeros((d.n_states, d.n_actions))
    for x in range(d.n_states):
        if x in cls.s2:
            probs[x, cls.f_star[x]] = 1.0
            continue
        allowed = np.nonzero(~d.forbidden[x])[0]
        if x in cls.s1_hat or allowed.size == 0:
            probs[x, 0] = 1.0
        elif deterministic:
            probs[x, rng.choice(allowed)] = 1.0
        else:
            probs[x, allowed] = rng.dirichlet(np.ones(allowed.size))
    return StationaryPolicy(probs)


def random_ct_policy(m: CtmdpModel, cls: Classification, rng: np.random.Generator,
                     moving: bool = True) -> StationaryPolicy:
    """CTMDP policy equal to f* on S2 and psi* off zeta, random on zeta.

    With ``moving`` the random rows use only positive-rate actions where
    such actions exist.
    """
    q = m.total_rate
    probs = np.zeros((m.n_states, m.n_actions))
    for x in range(m.n_states):
        if x in cls.s2:
            probs[x, cls.f_star[x]] = 1.0
        elif x not in cls.zeta:
            probs[x, cls.psi_star[x]] = 1.0
        else:
            support = np.nonzero(q[x] > 0)[0] if moving else np.arange(m.n_actions)
            if support.size == 0:
                support = np.arange(m.n_actions)
            probs[x, support] = rng.dirichlet(np.ones(support.size))
    return StationaryPolicy(probs)


def random_any_policy(m: CtmdpModel, rng: np.random.Generator) -> StationaryPolicy:
    return StationaryPolicy(rng.dirichlet(np.ones(m.n_actions), size=m.n_states))
