import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import single_state, two_state
from oracles import reduced, small_model_strategy, total_cost
from ctmdp.classify import classify
from ctmdp.corpus import random_dt_policy
from ctmdp.lift import (LiftError, check_feasibility, evaluate_ct_stationary, evaluate_dt_stationary,
                        lift_policy)
from ctmdp.model import StationaryPolicy
from ctmdp.reduce import build_jump_chain


def test_m3_lift(m3, sigma_s):
    pi = lift_policy(sigma_s, m3, classify(m3))
    assert abs(pi.probs[0, 0] - 1 / 3) <= 1e-12
    assert abs(pi.probs[0, 1] - 2 / 3) <= 1e-12
    assert pi.probs[2].tolist() == [1.0, 0.0]


def test_deterministic_row_unchanged(m3):
    sigma = StationaryPolicy.deterministic([1, 1, 0], 2)
    assert lift_policy(sigma, m3, classify(m3)) == sigma


def test_zero_rate_mass_rejected(m3):
    sigma = StationaryPolicy(np.array([[1.0, 0.0], [0.5, 0.5], [1.0, 0.0]]))
    with pytest.raises(LiftError):
        lift_policy(sigma, m3, classify(m3))


def test_m3_values_both_sides(m3, sigma_s, pi_s):
    dt = evaluate_dt_stationary(build_jump_chain(m3), sigma_s)
    ct = evaluate_ct_stationary(m3, pi_s)
    for rep in (dt, ct):
        assert rep.values[0, 0] == pytest.approx(0.4, abs=1e-12)
        assert rep.values[1, 0] == pytest.approx(0.4, abs=1e-12)
        assert rep.converged


def test_zero_cost_model(m3_zero, sigma_s):
    rep = evaluate_dt_stationary(build_jump_chain(m3_zero), sigma_s)
    np.testing.assert_array_equal(rep.values, 0.0)


def test_forbidden_mass_is_infinite(m3):
    sigma = StationaryPolicy(np.array([[1.0, 0.0], [1.0, 0.0], [1.0, 0.0]]))
    assert evaluate_dt_stationary(build_jump_chain(m3), sigma).values[0, 1] == np.inf


def test_ct_resting_with_cost_is_infinite():
    rep = evaluate_ct_stationary(single_state(c0=1.0), StationaryPolicy(np.ones((1, 1))))
    assert rep.values[0, 0] == np.inf


def test_ct_psi_star_off_zeta(m3):
    cls = classify(m3)
    phi = StationaryPolicy.deterministic(cls.psi_star, 2)
    assert evaluate_ct_stationary(m3, phi).values[:, 2].tolist() == [0.0, 0.0]


def test_two_state_closed_form():
    rep = evaluate_ct_stationary(two_state(rate=4.0, c0=2.0), StationaryPolicy(np.ones((2, 1))))
    assert rep.values[0, 0] == pytest.approx(0.5)


def test_feasibility_check(m3, pi_s):
    rep = evaluate_ct_stationary(m3, pi_s)
    assert check_feasibility(rep, [0.4])
    assert not check_feasibility(rep, [0.3])
    assert check_feasibility(evaluate_ct_stationary(m3.replace(costs=0 * m3.costs), pi_s), [0.0])


@settings(max_examples=80, deadline=None)
@given(small_model_strategy(max_states=6, max_actions=3), st.integers(0, 2**32 - 1), st.booleans())
def test_roundtrip_equal(m, seed, deterministic):
    cls = classify(m)
    d = build_jump_chain(m)
    sigma = random_dt_policy(d, cls, np.random.default_rng(seed), deterministic)
    dt = evaluate_dt_stationary(d, sigma).values
    ct = evaluate_ct_stationary(m, lift_policy(sigma, m, cls)).values
    assert np.array_equal(np.isinf(dt), np.isinf(ct))
    fin = np.isfinite(dt)
    np.testing.assert_allclose(ct[fin], dt[fin], rtol=1e-9, atol=1e-300)


@settings(max_examples=80, deadline=None)
@given(small_model_strategy(max_states=6, max_actions=3), st.integers(0, 2**32 - 1))
def test_ct_evaluator_matches_linear_solve(m, seed):
    rng = np.random.default_rng(seed)
    phi = StationaryPolicy(rng.dirichlet(np.ones(m.n_actions), size=m.n_states))
    q = (phi.probs * m.total_rate).sum(axis=1)
    P = reduced((phi.probs[:, :, None] * m.rates).sum(axis=1), q[:, None])
    vals = evaluate_ct_stationary(m, phi).values
    for i in range(m.costs.shape[0]):
        ref = total_cost(P, reduced((phi.probs * m.costs[i]).sum(axis=1), q))
        assert np.array_equal(np.isinf(ref), np.isinf(vals[i]))
        fin = np.isfinite(ref)
        np.testing.assert_allclose(vals[i, fin], ref[fin], rtol=1e-9, atol=1e-12)
