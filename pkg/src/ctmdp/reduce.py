"""Embedded jump-chain reduction of a CTMDP to a DTMDP with a cemetery."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import CtmdpModel, safe_div

CEMETERY = "x_inf"


@dataclass(frozen=True, eq=False)
class DtmdpModel:
    """Jump-chain DTMDP on ``S + [cemetery]``.

    ``kernel[x, a, y]`` has shape (S+1, A, S+1); the last index is the
    cemetery, whose row is absorbing for every action.  Reduced costs
    ``reduced_costs[i, x, a]`` have shape (N+1, S+1, A) and may be ``inf``.
    """

    states: tuple
    actions: tuple
    kernel: np.ndarray
    reduced_costs: np.ndarray
    forbidden: np.ndarray
    initial: np.ndarray
    bounds: np.ndarray
    discount_alpha: Optional[float] = None

    @property
    def n_states(self) -> int:
        """Number of original states (cemetery excluded)."""
        return len(self.states)

    @property
    def n_actions(self) -> int:
        return len(self.actions)

    @property
    def cemetery(self) -> int:
        return len(self.states)

    @property
    def transient_kernel(self) -> np.ndarray:
        """p(y|x,a) restricted to original states, shape (S, A, S)."""
        n = self.n_states
        return self.kernel[:n, :, :n]

    @property
    def cemetery_mass(self) -> np.ndarray:
        return self.kernel[: self.n_states, :, self.cemetery]


def _freeze(*arrays):
    for arr in arrays:
        arr.setflags(write=False)


def _assemble(m: CtmdpModel, denom: np.ndarray, alpha: Optional[float]) -> DtmdpModel:
    ns, na = m.n_states, m.n_actions
    kernel = np.zeros((ns + 1, na, ns + 1))
    kernel[:ns, :, :ns] = safe_div(m.rates, denom[:, :, None])
    # the deficit is computed from the rates, not as 1 - row sum, so that
    # zero-rate rows carry exactly unit cemetery mass
    if alpha is None:
        kernel[:ns, :, ns] = np.where(denom == 0.0, 1.0, 0.0)
    else:
        kernel[:ns, :, ns] = alpha / denom
    kernel[ns, :, ns] = 1.0
    reduced = np.zeros((m.costs.shape[0], ns + 1, na))
    reduced[:, :ns, :] = safe_div(m.costs, denom[None])
    forbidden = np.isinf(reduced[:, :ns, :]).any(axis=0)
    initial = np.append(np.asarray(m.initial, dtype=float), 0.0)
    bounds = np.array(m.bounds, dtype=float)
    _freeze(kernel, reduced, forbidden, initial, bounds)
    return DtmdpModel(m.states, m.actions, kernel, reduced, forbidden, initial, bounds, alpha)


def build_jump_chain(m: CtmdpModel) -> DtmdpModel:
    return _assemble(m, m.total_rate, None)


def build_discounted_chain(m: CtmdpModel, alpha: float) -> DtmdpModel:
    if not alpha > 0:
        raise ValueError(f"discount rate must be positive, got {alpha}")
    return _assemble(m, alpha + m.total_rate, float(alpha))


def forbidden_pairs(d: DtmdpModel) -> set:
    xs, as_ = np.nonzero(d.forbidden)
    return {(int(x), int(a)) for x, a in zip(xs, as_)}


def dtmdp_to_dict(d: DtmdpModel) -> dict:
    names = list(d.states) + [CEMETERY]

    def num(v):
        return "inf" if np.isinf(v) else float(v)

    kernel = {}
    for x in range(d.n_states):
        for a, sa in enumerate(d.actions):
            row = {names[y]: float(d.kernel[x, a, y]) for y in range(d.n_states + 1) if d.kernel[x, a, y] != 0.0}
            kernel[f"{names[x]}/{sa}"] = row
    reduced = [{f"{names[x]}/{sa}": num(d.reduced_costs[i, x, a])
                for x in range(d.n_states) for a, sa in enumerate(d.actions)}
               for i in range(d.reduced_costs.shape[0])]
    return {
        "states": names,
        "actions": list(d.actions),
        "discount_alpha": d.discount_alpha,
        "kernel": kernel,
        "reduced_costs": reduced,
        "forbidden": [f"{names[x]}/{d.actions[a]}" for x, a in sorted(forbidden_pairs(d))],
    }
