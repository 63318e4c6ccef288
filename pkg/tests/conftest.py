from pathlib import Path

import numpy as np
import pytest

from ctmdp.model import CtmdpModel, StationaryPolicy, m3_model, zero_cost_model

DATA = Path(__file__).parent / "data"


@pytest.fixture
def m3():
    return m3_model()


@pytest.fixture
def m3_zero(m3):
    return zero_cost_model(m3)


@pytest.fixture
def pi_s():
    """Lifted optimal M3 policy."""
    return StationaryPolicy(np.array([[1 / 3, 2 / 3], [0.0, 1.0], [1.0, 0.0]]))


@pytest.fixture
def sigma_s():
    return StationaryPolicy(np.array([[0.2, 0.8], [0.0, 1.0], [1.0, 0.0]]))


def single_state(c0=1.0, n_actions=1):
    """One state; with no self-loops every action has zero rate."""
    rates = np.zeros((1, n_actions, 1))
    costs = np.full((2, 1, n_actions), c0)
    costs[1] = 0.0
    return CtmdpModel(("x",), tuple(f"a{k}" for k in range(n_actions)), rates, costs, np.array([1.0]),
                      np.array([1.0]))


def two_state(rate=1.0, c0=1.0, c_exit=0.0):
    """x0 --a0 (rate)--> x1 ; x1 zero-rate with cost c_exit."""
    rates = np.zeros((2, 1, 2))
    rates[0, 0, 1] = rate
    costs = np.zeros((2, 2, 1))
    costs[0, 0, 0] = c0
    costs[0, 1, 0] = c_exit
    return CtmdpModel(("x0", "x1"), ("a0",), rates, costs, np.array([1.0]), np.array([1.0, 0.0]))
