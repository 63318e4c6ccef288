"""Graph and total-cost helpers for finite Markov chains."""
from __future__ import annotations

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

INF = np.inf
DIVERGENCE_CAP = 1e15
DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 100_000


def reachability(adj: np.ndarray) -> np.ndarray:
    """Reflexive-transitive closure of a boolean adjacency matrix."""
    n = adj.shape[0]
    reach = np.asarray(adj, dtype=bool) | np.eye(n, dtype=bool)
    while True:
        nxt = (reach.astype(np.int64) @ reach.astype(np.int64)) > 0
        if np.array_equal(nxt, reach):
            return reach
        reach = nxt


def closed_classes(adj: np.ndarray) -> list:
    """Strongly connected components with no edge leaving them."""
    adj = np.asarray(adj, dtype=bool)
    n_comp, labels = connected_components(csr_matrix(adj), directed=True, connection="strong")
    out = []
    for k in range(n_comp):
        members = np.nonzero(labels == k)[0]
        outside = ~np.isin(np.arange(adj.shape[0]), members)
        if not adj[np.ix_(members, outside)].any():
            out.append(members)
    return out


def minimal_total_cost(P: np.ndarray, c: np.ndarray, tol: float = DEFAULT_TOL,
                       max_iter: int = DEFAULT_MAX_ITER, cap: float = DIVERGENCE_CAP):
    """Minimal nonnegative solution of ``J = c + P J``.

    ``P`` must be row-stochastic (an explicit absorbing cemetery, if any, is
    just another state) and ``c >= 0`` may contain ``inf``.  States that can
    reach an infinite one-step cost, or a closed class carrying positive
    cost, get ``inf``.  The remaining values are the limit of the monotone
    iterates ``J_k = sum_{n<k} P^n c``; the iteration doubles ``k`` each
    round.  Returns ``(J, converged, sweeps)``.
    """
    P = np.asarray(P, dtype=float)
    c = np.asarray(c, dtype=float)
    n = c.size
    adj = P > 0
    reach = reachability(adj)
    bad = np.isinf(c)
    for cls in closed_classes(adj):
        if np.any(c[cls] > 0):
            bad[cls] = True
    infinite = reach[:, bad].any(axis=1) if bad.any() else np.zeros(n, dtype=bool)
    J = np.full(n, INF)
    fin = ~infinite
    if not fin.any():
        return J, True, 0
    Pf = P[np.ix_(fin, fin)]
    cf = c[fin]
    total = cf.copy()
    power = Pf.copy()
    sweeps = 1
    converged = False
    while sweeps < max_iter:
        nxt = total + power @ total
        if np.any(nxt < total - 1e-15 * np.maximum(1.0, np.abs(total))):
            raise AssertionError("value iterates decreased; kernel is not nonnegative")
        change = np.max(np.abs(nxt - total)) if nxt.size else 0.0
        total = nxt
        sweeps *= 2
        if change <= tol:
            converged = True
            break
        if np.any(total > cap):
            break
        power = power @ power
    over = total > cap
    total[over] = INF
    J[fin] = total
    return J, converged, sweeps
