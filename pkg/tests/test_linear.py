import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import minimize

from pickpoint.errors import DimensionMismatch
from pickpoint.learners import LinearModel, elasticnet_objective, fit_elasticnet, fit_linear, predict


def normal_equations(x, y, w):
    a = np.column_stack([x, np.ones(len(x))])
    sol = np.linalg.solve(a.T @ (w[:, None] * a), a.T @ (w * y))
    return sol[:-1], sol[-1]


def test_line_through_origin():
    m = fit_linear([[0], [1], [2]], [0, 1, 2])
    assert m.coef[0] == pytest.approx(1, abs=1e-12) and m.intercept == pytest.approx(0, abs=1e-12)


def test_single_weighted_point_is_intercept_only():
    x = np.array([[1.0, 2], [5, 5], [3, 9], [7, 1]])
    m = fit_linear(x, [1, 7, 2, 4], w=[0, 1, 0, 0])
    np.testing.assert_allclose(m.predict(np.random.default_rng(0).normal(size=(5, 2)) * 100), 7, atol=1e-9)
    m = fit_linear([[5.0]], [7.0])
    assert m.predict([[123.0]])[0] == pytest.approx(7)


def test_weighted_normal_equation_oracle(rng):
    for _ in range(20):
        x = rng.normal(size=(40, 2)) * [300, 200] + [700, 0]
        y = x @ rng.normal(size=2) + rng.normal(size=40) * 5 + 11
        w = rng.uniform(0.01, 1, 40)
        w /= w.sum()
        coef, b = normal_equations(x, y, w)
        m = fit_linear(x, y, w)
        np.testing.assert_allclose(m.coef, coef, rtol=1e-8, atol=1e-10)
        assert m.intercept == pytest.approx(b, rel=1e-8, abs=1e-8)


def test_uniform_weights_equal_ols(rng):
    x = rng.normal(size=(30, 2))
    y = rng.normal(size=30)
    ref, *_ = np.linalg.lstsq(np.column_stack([x, np.ones(30)]), y, rcond=None)
    m = fit_linear(x, y)
    np.testing.assert_allclose(np.append(m.coef, m.intercept), ref, atol=1e-8)


@given(st.integers(0, 10_000), st.integers(0, 19))
def test_duplicate_equals_double_weight(seed, k):
    rng = np.random.default_rng(seed)
    x, y = rng.normal(size=(20, 2)), rng.normal(size=20)
    w = np.ones(20)
    w[k] = 2
    a = fit_linear(x, y, w)
    b = fit_linear(np.vstack([x, x[k]]), np.append(y, y[k]))
    np.testing.assert_allclose(a.predict(x), b.predict(x), atol=1e-8)


def test_predict_example_and_dimension_check():
    m = LinearModel(np.array([2.0, 3.0]), 1.0)
    assert predict(m, [[1, 1]])[0] == 6
    with pytest.raises(DimensionMismatch):
        m.predict([[1, 2, 3]])


def elasticnet_oracle(x, y, alpha, l1_ratio):
    # smooth split-sign reformulation b = p - q with p, q >= 0
    d = x.shape[1]

    def f(z):
        p, q, c = z[:d], z[d:2 * d], z[-1]
        coef = p - q
        r = y - x @ coef - c
        n = len(y)
        val = 0.5 / n * r @ r + alpha * l1_ratio * (p.sum() + q.sum()) + 0.5 * alpha * (1 - l1_ratio) * coef @ coef
        gc = -x.T @ r / n + alpha * (1 - l1_ratio) * coef
        grad = np.concatenate([gc + alpha * l1_ratio, -gc + alpha * l1_ratio, [-r.sum() / n]])
        return val, grad

    z0 = np.zeros(2 * d + 1)
    res = minimize(f, z0, jac=True, method="L-BFGS-B", bounds=[(0, None)] * (2 * d) + [(None, None)],
                   options={"ftol": 1e-15, "gtol": 1e-12, "maxiter": 10000})
    return res.x[:d] - res.x[d:2 * d], res.x[-1]


@pytest.mark.parametrize("seed", range(10))
def test_elasticnet_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(5, 2)) * 3
    y = x @ [1.5, -2.0] + rng.normal(size=5)
    alpha, l1 = rng.uniform(0.05, 1.5), rng.uniform(0, 1)
    coef, c = elasticnet_oracle(x, y, alpha, l1)
    m = fit_elasticnet(x, y, alpha, l1, tol=1e-10, max_iter=100000)
    np.testing.assert_allclose(m.coef, coef, atol=1e-4)
    assert m.intercept == pytest.approx(c, abs=1e-4)
    assert elasticnet_objective(x, y, m.coef, m.intercept, alpha, l1) <= \
        elasticnet_objective(x, y, coef, c, alpha, l1) + 1e-9


def test_elasticnet_strong_penalty_zeroes_coefficients(rng):
    x, y = rng.normal(size=(10, 2)), rng.normal(size=10)
    m = fit_elasticnet(x, y, alpha=1e3)
    assert np.all(m.coef == 0) and m.intercept == pytest.approx(y.mean())
