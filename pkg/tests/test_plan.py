import numpy as np
import pytest
from hypothesis import given, settings
from scipy.optimize import linprog

from conftest import single_state
from oracles import small_model_strategy
from ctmdp.classify import classify
from ctmdp.lift import evaluate_dt_stationary
from ctmdp.model import CtmdpModel
from ctmdp.plan import build_occupation_lp, extract_policy, solve_occupation, solve_simplex
from ctmdp.reduce import build_jump_chain


def _solve(m):
    cls = classify(m)
    d = build_jump_chain(m)
    return cls, d, solve_occupation(d, cls)


def test_m3_lp_shape(m3):
    lp = build_occupation_lp(build_jump_chain(m3), classify(m3))
    assert lp.pairs == ((0, 0), (0, 1), (1, 1))
    assert lp.flow_matrix.shape == (2, 3)
    np.testing.assert_array_equal(lp.constraint_matrix, [[0.0, 0.5, 0.0]])
    np.testing.assert_array_equal(lp.objective, [1.0, 0.0, 1.0])


def test_m3_optimum(m3):
    _, _, sol = _solve(m3)
    assert sol.status == "optimal"
    assert sol.objective == pytest.approx(0.4, abs=1e-12)
    np.testing.assert_allclose([sol.mu[0, 0], sol.mu[0, 1], sol.mu[1, 1]], [0.2, 0.8, 0.2], atol=1e-12)
    assert sol.slack[0] == pytest.approx(0.0, abs=1e-12)


def test_m3_slack_constraint(m3):
    _, _, sol = _solve(m3.replace(bounds=np.array([10.0])))
    assert sol.objective == pytest.approx(0.0, abs=1e-12)
    assert sol.mu[0, 1] == pytest.approx(1.0)


def test_m3_negative_bound_infeasible(m3):
    _, _, sol = _solve(m3.replace(bounds=np.array([-1.0])))
    assert sol.status == "infeasible"


def test_start_outside_zeta(m3):
    _, _, sol = _solve(m3.with_initial_state("s2"))
    assert sol.optimal and sol.objective == 0.0


def test_start_on_fully_forbidden_state():
    _, _, sol = _solve(single_state(c0=1.0))
    assert not sol.optimal


def test_policy_extraction(m3):
    cls, d, sol = _solve(m3)
    sigma = sol.policy
    np.testing.assert_allclose(sigma.probs, [[0.2, 0.8], [0.0, 1.0], [1.0, 0.0]], atol=1e-12)


def test_zero_mass_state_tie_break():
    # x1 is costly (in zeta) but never reached from x0; b is forbidden at x1
    rates = np.zeros((3, 2, 3))
    rates[0, :, 2] = 1.0
    rates[1, 1, 2] = 1.0
    costs = np.zeros((2, 3, 2))
    costs[0, :2, :] = 1.0
    m = CtmdpModel(("x0", "x1", "x2"), ("a", "b"), rates, costs, np.array([1.0]), np.array([1.0, 0.0, 0.0]))
    cls, d, sol = _solve(m)
    assert 1 in cls.zeta and d.forbidden[1, 0]
    assert sol.optimal and sol.mu[1].sum() == 0
    assert sol.policy.probs[1].tolist() == [0.0, 1.0]


def _scipy_value(lp):
    A_ub = lp.constraint_matrix if lp.constraint_matrix.size else None
    b_ub = lp.bounds if lp.constraint_matrix.size else None
    if lp.n_variables == 0:
        return 0.0 if not lp.flow_rhs.any() else np.inf
    res = linprog(lp.objective, A_ub=A_ub, b_ub=b_ub, A_eq=lp.flow_matrix, b_eq=lp.flow_rhs,
                  bounds=(0, None), method="highs")
    return res.fun if res.status == 0 else np.inf


@settings(max_examples=80, deadline=None)
@given(small_model_strategy(max_states=6, max_actions=3))
def test_simplex_agrees_with_scipy(m):
    cls = classify(m)
    lp = build_occupation_lp(build_jump_chain(m), cls)
    sol = solve_simplex(lp)
    ref = _scipy_value(lp)
    if sol.optimal:
        assert ref == pytest.approx(sol.objective, abs=1e-8)
        assert sol.flow_residual < 1e-9
        assert np.all(sol.mu >= -1e-12)
    else:
        assert ref == np.inf


@settings(max_examples=80, deadline=None)
@given(small_model_strategy(max_states=6, max_actions=3))
def test_extracted_policy_attains_lp_value(m):
    cls, d, sol = _solve(m)
    if not sol.optimal:
        return
    rep = evaluate_dt_stationary(d, sol.policy)
    assert rep.aggregate[0] == pytest.approx(sol.objective, rel=1e-8, abs=1e-10)
    np.testing.assert_allclose(rep.aggregate[1:], sol.constraint_usage, rtol=1e-8, atol=1e-10)
    assert np.all(rep.aggregate[1:] <= m.bounds + 1e-9)
