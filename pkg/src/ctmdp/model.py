"""Finite CTMDP primitives, policies, trajectories and the JSON model format.

Arrays are laid out as

* ``rates[x, a, y]``  off-diagonal transition rates (diagonal is always 0)
* ``costs[i, x, a]``  cost rates, ``i = 0`` is the objective
* ``bounds[j - 1]``   constraint constants for ``j = 1..N``
* ``initial[x]``      initial distribution
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

INF = math.inf
ROW_TOL = 1e-12


class ModelFormatError(ValueError):
    """Raised when a model file cannot be parsed into a model."""


class InvalidModelError(ValueError):
    """Raised when a parsed model violates a semantic invariant."""

    def __init__(self, report: "ValidationReport", model: "CtmdpModel"):
        super().__init__("invalid model:\n" + "\n".join(f"  - {p}" for p in report.problems))
        self.report = report
        self.model = model


def _frozen(arr, dtype=float) -> np.ndarray:
    out = np.array(arr, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


def safe_div(num, den):
    """Division on nonnegative extended reals with 0/0 = 0 and c/0 = inf.

    Works elementwise on arrays as well as on scalars.
    """
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(num == 0.0, 0.0, np.where(den == 0.0, INF, num / den))
        # inf/inf is never produced by model data; keep it out anyway
        out = np.where(np.isnan(out), 0.0, out)
    if out.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class ValidationReport:
    problems: tuple = ()

    @property
    def ok(self) -> bool:
        return not self.problems

    def __bool__(self) -> bool:
        return self.ok

    def to_dict(self) -> dict:
        return {"valid": self.ok, "problems": list(self.problems)}


@dataclass(frozen=True, eq=False)
class CtmdpModel:
    states: tuple
    actions: tuple
    rates: np.ndarray
    costs: np.ndarray
    bounds: np.ndarray
    initial: np.ndarray

    def __post_init__(self):
        states, actions = tuple(self.states), tuple(self.actions)
        ns, na = len(states), len(actions)
        if ns == 0:
            raise ModelFormatError("states must be nonempty")
        if na == 0:
            raise ModelFormatError("actions must be nonempty")
        if len(set(states)) != ns or len(set(actions)) != na:
            raise ModelFormatError("state and action identifiers must be unique")
        rates = np.array(self.rates, dtype=float)
        costs = np.array(self.costs, dtype=float)
        if costs.ndim == 2:
            costs = costs[None]
        bounds = np.atleast_1d(np.array(self.bounds, dtype=float)).reshape(-1)
        initial = np.array(self.initial, dtype=float)
        if rates.shape != (ns, na, ns):
            raise ModelFormatError(f"rates must have shape {(ns, na, ns)}, got {rates.shape}")
        if costs.ndim != 3 or costs.shape[1:] != (ns, na):
            raise ModelFormatError(f"costs must have shape (N+1, {ns}, {na}), got {costs.shape}")
        if bounds.shape != (costs.shape[0] - 1,):
            raise ModelFormatError(
                f"expected {costs.shape[0] - 1} bounds for {costs.shape[0]} cost tables, got {bounds.size}")
        if initial.shape != (ns,):
            raise ModelFormatError(f"initial must have length {ns}")
        if np.any(rates[np.arange(ns), :, np.arange(ns)] != 0.0):
            raise ModelFormatError("diagonal rates q(x|x,a) are implied and must be zero")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "actions", actions)
        object.__setattr__(self, "rates", _frozen(rates))
        object.__setattr__(self, "costs", _frozen(costs))
        object.__setattr__(self, "bounds", _frozen(bounds))
        object.__setattr__(self, "initial", _frozen(initial))

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def n_actions(self) -> int:
        return len(self.actions)

    @property
    def n_constraints(self) -> int:
        return self.costs.shape[0] - 1

    @property
    def total_rate(self) -> np.ndarray:
        """q_x(a), shape (S, A)."""
        return self.rates.sum(axis=2)

    @property
    def aggregate_cost(self) -> np.ndarray:
        """Sum over all cost indices, shape (S, A)."""
        return self.costs.sum(axis=0)

    def state_index(self, x) -> int:
        return self.states.index(x)

    def action_index(self, a) -> int:
        return self.actions.index(a)

    def replace(self, **changes) -> "CtmdpModel":
        kw = dict(states=self.states, actions=self.actions, rates=self.rates,
                  costs=self.costs, bounds=self.bounds, initial=self.initial)
        kw.update(changes)
        return CtmdpModel(**kw)

    def with_initial_state(self, x) -> "CtmdpModel":
        gamma = np.zeros(self.n_states)
        gamma[self.state_index(x) if not isinstance(x, (int, np.integer)) else x] = 1.0
        return self.replace(initial=gamma)

    def __eq__(self, other):
        if not isinstance(other, CtmdpModel):
            return NotImplemented
        return (self.states == other.states and self.actions == other.actions
                and all(np.array_equal(getattr(self, f), getattr(other, f), equal_nan=True)
                        for f in ("rates", "costs", "bounds", "initial")))

    __hash__ = object.__hash__


def validate_model(m: CtmdpModel) -> ValidationReport:
    problems = []
    for name in ("rates", "costs", "bounds", "initial"):
        arr = getattr(m, name)
        if not np.all(np.isfinite(arr)):
            problems.append(f"{name}: non-finite entries")
    with np.errstate(invalid="ignore"):
        for x, a, y in zip(*np.nonzero(m.rates < 0)):
            problems.append(f"negative rate q({m.states[y]}|{m.states[x]},{m.actions[a]}) = {m.rates[x, a, y]}")
        for i, x, a in zip(*np.nonzero(m.costs < 0)):
            problems.append(f"negative cost c_{i}({m.states[x]},{m.actions[a]}) = {m.costs[i, x, a]}")
        for j in np.nonzero(m.bounds < 0)[0]:
            problems.append(f"negative bound d_{j + 1} = {m.bounds[j]}")
        if np.any(m.initial < 0):
            problems.append("initial distribution has negative entries")
    total = float(np.sum(m.initial))
    if not abs(total - 1.0) <= ROW_TOL:
        problems.append(f"initial distribution sums to {total!r}, not 1")
    return ValidationReport(tuple(problems))


def _check_rows(probs: np.ndarray, what: str):
    if np.any(~np.isfinite(probs)) or np.any(probs < 0):
        raise ValueError(f"{what}: entries must be finite and nonnegative")
    sums = probs.sum(axis=-1)
    bad = np.abs(sums - 1.0) > ROW_TOL
    if np.any(bad):
        raise ValueError(f"{what}: rows must sum to 1, got {sums[bad][:3]}")


@dataclass(frozen=True, eq=False)
class StationaryPolicy:
    """Action distribution per state, ``probs[x, a]``."""

    probs: np.ndarray

    def __post_init__(self):
        probs = np.array(self.probs, dtype=float)
        if probs.ndim != 2:
            raise ValueError("policy must be a 2-d array (states x actions)")
        _check_rows(probs, "stationary policy")
        object.__setattr__(self, "probs", _frozen(probs))

    @classmethod
    def deterministic(cls, choice: Sequence[int], n_actions: int) -> "StationaryPolicy":
        choice = np.asarray(choice, dtype=int)
        probs = np.zeros((choice.size, n_actions))
        probs[np.arange(choice.size), choice] = 1.0
        return cls(probs)

    @classmethod
    def normalized(cls, weights) -> "StationaryPolicy":
        """Normalise nonnegative row weights; rows must have positive mass."""
        w = np.asarray(weights, dtype=float)
        return cls(w / w.sum(axis=1, keepdims=True))

    @property
    def shape(self):
        return self.probs.shape

    def row(self, x: int) -> np.ndarray:
        return self.probs[x]

    def is_deterministic(self) -> bool:
        return bool(np.all((self.probs == 0.0) | (self.probs == 1.0)))

    def __eq__(self, other):
        if not isinstance(other, StationaryPolicy):
            return NotImplemented
        return np.array_equal(self.probs, other.probs)

    __hash__ = object.__hash__


@dataclass(frozen=True, eq=False)
class MarkovTimePolicy:
    """Piecewise-constant time-dependent policy.

    For state ``x`` the elapsed-time axis ``[0, inf)`` is split at
    ``breakpoints[x]`` (strictly increasing, positive); ``rows[x][k]`` is the
    action distribution on the k-th piece, so ``rows[x]`` has one more row
    than there are breakpoints.
    """

    breakpoints: tuple
    rows: tuple

    def __post_init__(self):
        if len(self.breakpoints) != len(self.rows):
            raise ValueError("need one breakpoint list and one row block per state")
        bps, rws = [], []
        for x, (b, r) in enumerate(zip(self.breakpoints, self.rows)):
            b = np.atleast_1d(np.array(b, dtype=float))
            r = np.atleast_2d(np.array(r, dtype=float))
            if b.size and (np.any(b <= 0) or np.any(np.diff(b) <= 0) or not np.all(np.isfinite(b))):
                raise ValueError(f"state {x}: breakpoints must be finite, positive and strictly increasing")
            if r.shape[0] != b.size + 1:
                raise ValueError(f"state {x}: expected {b.size + 1} rows, got {r.shape[0]}")
            _check_rows(r, f"schedule rows of state {x}")
            bps.append(_frozen(b))
            rws.append(_frozen(r))
        if len({r.shape[1] for r in rws}) > 1:
            raise ValueError("all schedule rows must share one action set")
        object.__setattr__(self, "breakpoints", tuple(bps))
        object.__setattr__(self, "rows", tuple(rws))

    @classmethod
    def from_stationary(cls, policy: StationaryPolicy) -> "MarkovTimePolicy":
        return cls(tuple(np.empty(0) for _ in range(policy.shape[0])),
                   tuple(policy.probs[x][None] for x in range(policy.shape[0])))

    @property
    def shape(self):
        return (len(self.rows), self.rows[0].shape[1])

    def distribution(self, x: int, s: float) -> np.ndarray:
        k = int(np.searchsorted(self.breakpoints[x], s, side="right"))
        return self.rows[x][k]


@dataclass(frozen=True)
class Trajectory:
    """One simulated path.

    ``sojourns[n]`` is the holding time in ``states[n]`` (``inf`` when the
    path comes to rest there); ``costs[n, i]`` is the realised cost of that
    sojourn, integrated up to the horizon.
    """

    jump_times: np.ndarray
    states: np.ndarray
    sojourns: np.ndarray
    costs: np.ndarray
    resting_state: Optional[int] = None
    truncated: bool = False
    complete: bool = True


@dataclass(frozen=True)
class AggregatedChain:
    """Model averaged under a stationary policy."""

    rate: np.ndarray        # q̄(x), shape (S,)
    costs: np.ndarray       # c̄_i(x), shape (N+1, S)
    jump: np.ndarray        # p̄(y|x), shape (S, S)
    flow: np.ndarray = field(repr=False, default=None)  # Σ_a φ(a|x) q̃(y|x,a)


def aggregate_under_policy(m: CtmdpModel, phi: StationaryPolicy) -> AggregatedChain:
    probs = phi.probs
    if probs.shape != (m.n_states, m.n_actions):
        raise ValueError(f"policy shape {probs.shape} does not match model {(m.n_states, m.n_actions)}")
    rate = np.einsum("xa,xa->x", probs, m.total_rate)
    costs = np.einsum("xa,ixa->ix", probs, m.costs)
    flow = np.einsum("xa,xay->xy", probs, m.rates)
    jump = safe_div(flow, rate[:, None])
    return AggregatedChain(rate=rate, costs=costs, jump=np.atleast_2d(jump), flow=flow)


# --------------------------------------------------------------------------
# JSON format

def _pair_key(x, a) -> str:
    return f"{x}/{a}"


def _split_pair(key: str, m_states, m_actions, where: str):
    if not isinstance(key, str) or "/" not in key:
        raise ModelFormatError(f"{where}: key {key!r} is not of the form 'state/action'")
    x, a = key.rsplit("/", 1)
    if x not in m_states:
        raise ModelFormatError(f"{where}: unknown state {x!r} in key {key!r}")
    if a not in m_actions:
        raise ModelFormatError(f"{where}: unknown action {a!r} in key {key!r}")
    return m_states[x], m_actions[a]


def _number(v, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ModelFormatError(f"{where}: expected a number, got {v!r}")
    return float(v)


def model_from_dict(doc: dict) -> CtmdpModel:
    if not isinstance(doc, dict):
        raise ModelFormatError("model file must contain a JSON object")
    for key in ("states", "actions", "rates", "costs", "bounds", "initial"):
        if key not in doc:
            raise ModelFormatError(f"missing key {key!r}")
    states, actions = doc["states"], doc["actions"]
    if not isinstance(states, list) or not states:
        raise ModelFormatError("states must be nonempty")
    if not isinstance(actions, list) or not actions:
        raise ModelFormatError("actions must be nonempty")
    for name, seq in (("states", states), ("actions", actions)):
        if not all(isinstance(s, str) for s in seq):
            raise ModelFormatError(f"{name} must be strings")
        if len(set(seq)) != len(seq):
            raise ModelFormatError(f"{name} contains duplicates")
    sidx = {s: k for k, s in enumerate(states)}
    aidx = {a: k for k, a in enumerate(actions)}
    ns, na = len(states), len(actions)

    rates = np.zeros((ns, na, ns))
    if not isinstance(doc["rates"], dict):
        raise ModelFormatError("rates must be an object")
    for key, row in doc["rates"].items():
        x, a = _split_pair(key, sidx, aidx, "rates")
        if not isinstance(row, dict):
            raise ModelFormatError(f"rates[{key!r}] must be an object")
        for y, v in row.items():
            if y not in sidx:
                raise ModelFormatError(f"rates[{key!r}]: unknown target state {y!r}")
            if sidx[y] == x:
                raise ModelFormatError(f"rates[{key!r}]: self-transition {y!r} not allowed")
            rates[x, a, sidx[y]] = _number(v, f"rates[{key!r}][{y!r}]")

    tables = doc["costs"]
    if not isinstance(tables, list) or not tables:
        raise ModelFormatError("costs must be a nonempty array of tables")
    costs = np.zeros((len(tables), ns, na))
    for i, table in enumerate(tables):
        if not isinstance(table, dict):
            raise ModelFormatError(f"costs[{i}] must be an object")
        for key, v in table.items():
            x, a = _split_pair(key, sidx, aidx, f"costs[{i}]")
            costs[i, x, a] = _number(v, f"costs[{i}][{key!r}]")

    if not isinstance(doc["bounds"], list):
        raise ModelFormatError("bounds must be an array")
    bounds = [_number(v, f"bounds[{j}]") for j, v in enumerate(doc["bounds"])]
    if len(bounds) != len(tables) - 1:
        raise ModelFormatError(f"bounds: expected {len(tables) - 1} entries, got {len(bounds)}")

    initial = np.zeros(ns)
    if not isinstance(doc["initial"], dict):
        raise ModelFormatError("initial must be an object")
    for x, v in doc["initial"].items():
        if x not in sidx:
            raise ModelFormatError(f"initial: unknown state {x!r}")
        initial[sidx[x]] = _number(v, f"initial[{x!r}]")
    return CtmdpModel(tuple(states), tuple(actions), rates, costs, np.array(bounds), initial)


def model_to_dict(m: CtmdpModel) -> dict:
    rates = {}
    for x, sx in enumerate(m.states):
        for a, sa in enumerate(m.actions):
            row = {m.states[y]: float(m.rates[x, a, y]) for y in range(m.n_states) if m.rates[x, a, y] != 0.0}
            if row:
                rates[_pair_key(sx, sa)] = row
    costs = [{_pair_key(sx, sa): float(m.costs[i, x, a])
              for x, sx in enumerate(m.states) for a, sa in enumerate(m.actions)}
             for i in range(m.costs.shape[0])]
    return {
        "states": list(m.states),
        "actions": list(m.actions),
        "rates": rates,
        "costs": costs,
        "bounds": [float(d) for d in m.bounds],
        "initial": {sx: float(m.initial[x]) for x, sx in enumerate(m.states)},
    }


def dumps_model(m: CtmdpModel) -> str:
    return json.dumps(model_to_dict(m), indent=2) + "\n"


def load_model(path, validate: bool = True) -> CtmdpModel:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    try:
        m = model_from_dict(doc)
    except ModelFormatError as exc:
        raise ModelFormatError(f"{path}: {exc}") from None
    if validate:
        report = validate_model(m)
        if not report.ok:
            raise InvalidModelError(report, m)
    return m


def save_model(m: CtmdpModel, path) -> None:
    Path(path).write_text(dumps_model(m))


# --------------------------------------------------------------------------
# policy files: {"policy": {"state": {"action": prob, ...}, ...}}

def policy_from_dict(doc: dict, m: CtmdpModel) -> StationaryPolicy:
    rows = doc.get("policy", doc) if isinstance(doc, dict) else None
    if not isinstance(rows, dict):
        raise ModelFormatError("policy file must map state -> {action: probability}")
    probs = np.zeros((m.n_states, m.n_actions))
    seen = set()
    for sx, row in rows.items():
        if sx not in m.states:
            raise ModelFormatError(f"policy: unknown state {sx!r}")
        if not isinstance(row, dict):
            raise ModelFormatError(f"policy[{sx!r}] must be an object")
        x = m.states.index(sx)
        seen.add(x)
        for sa, v in row.items():
            if sa not in m.actions:
                raise ModelFormatError(f"policy[{sx!r}]: unknown action {sa!r}")
            probs[x, m.actions.index(sa)] = _number(v, f"policy[{sx!r}][{sa!r}]")
    missing = [m.states[x] for x in range(m.n_states) if x not in seen]
    if missing:
        raise ModelFormatError(f"policy: no row for states {missing}")
    return StationaryPolicy(probs)


def policy_to_dict(policy: StationaryPolicy, m: CtmdpModel) -> dict:
    return {sx: {sa: float(policy.probs[x, a]) for a, sa in enumerate(m.actions)}
            for x, sx in enumerate(m.states)}


def load_policy(path, m: CtmdpModel) -> StationaryPolicy:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return policy_from_dict(doc, m)


# --------------------------------------------------------------------------
# reference models

def m3_model(bound: float = 0.4) -> CtmdpModel:
    """Three-state test model touching every partition class."""
    S, A = ("s0", "s1", "s2"), ("a0", "a1")
    rates = np.zeros((3, 2, 3))
    rates[0, 0, 1] = 1.0
    rates[0, 1, 2] = 2.0
    rates[1, 1, 2] = 1.0
    costs = np.zeros((2, 3, 2))
    costs[0, 0, 0] = 1.0
    costs[0, 1, 0] = 1.0
    costs[0, 1, 1] = 1.0
    costs[1, 0, 1] = 1.0
    return CtmdpModel(S, A, rates, costs, np.array([bound]), np.array([1.0, 0.0, 0.0]))


def zero_cost_model(base: CtmdpModel) -> CtmdpModel:
    return base.replace(costs=np.zeros_like(base.costs))

