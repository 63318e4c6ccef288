import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from ctmdp.simplex import SimplexError, simplex


def test_small_lp():
    # min -x - y  s.t. x + y + s = 1
    res = simplex(np.array([[1.0, 1.0, 1.0]]), np.array([1.0]), np.array([-1.0, -1.0, 0.0]))
    assert res.status == "optimal" and res.objective == pytest.approx(-1.0)


def test_infeasible():
    res = simplex(np.array([[1.0, 1.0]]), np.array([-1.0]), np.array([1.0, 1.0]))
    assert res.status == "infeasible"


def test_unbounded_raises():
    with pytest.raises(SimplexError):
        simplex(np.array([[1.0, -1.0]]), np.array([1.0]), np.array([-1.0, 0.0]))


def test_redundant_rows():
    A = np.array([[1.0, 1.0, 0.0], [2.0, 2.0, 0.0], [0.0, 1.0, 1.0]])
    res = simplex(A, np.array([1.0, 2.0, 1.0]), np.array([1.0, 2.0, 0.0]))
    assert res.status == "optimal" and res.objective == pytest.approx(1.0)


def test_degenerate_cycling_example():
    # Beale's example, cycles under the textbook largest-coefficient rule
    A = np.array([[0.25, -8, -1, 9, 1, 0, 0], [0.5, -12, -0.5, 3, 0, 1, 0], [0, 0, 1, 0, 0, 0, 1]], dtype=float)
    b = np.array([0.0, 0.0, 1.0])
    c = np.array([-0.75, 20, -0.5, 6, 0, 0, 0])
    res = simplex(A, b, c)
    assert res.objective == pytest.approx(-1.25)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 5), st.integers(1, 8))
def test_matches_scipy(seed, m, n):
    rng = np.random.default_rng(seed)
    A = rng.uniform(-1, 2, size=(m, n)) * (rng.random((m, n)) < 0.7)
    A = np.hstack([A, np.eye(m)])
    b = rng.uniform(0, 3, size=m)
    c = np.concatenate([rng.uniform(0, 2, size=n), np.zeros(m)])
    ref = linprog(c, A_eq=A, b_eq=b, bounds=(0, None), method="highs")
    res = simplex(A, b, c)
    assert res.status == "optimal" and ref.status == 0
    assert res.objective == pytest.approx(ref.fun, abs=1e-9)
    np.testing.assert_allclose(A @ res.x, b, atol=1e-9)
    assert np.all(res.x >= -1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_feasibility_verdict_matches_scipy(seed):
    rng = np.random.default_rng(seed)
    m, n = rng.integers(1, 4), rng.integers(1, 5)
    A = rng.uniform(-1, 1, size=(m, n))
    b = rng.uniform(-1, 1, size=m)
    c = np.ones(n)
    ref = linprog(c, A_eq=A, b_eq=b, bounds=(0, None), method="highs")
    res = simplex(A, b, c)
    assert (res.status == "optimal") == (ref.status == 0)
