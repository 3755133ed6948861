import numpy as np
import pytest

from pickpoint.errors import DivergenceDetected
from pickpoint.learners import MLPModel, MLPParams, fit_mlp
from pickpoint.learners import mlp
from pickpoint.learners.mlp import init_params, loss_and_grad


def fd_gradient(theta, d, h, x, y, step=1e-5):
    g = np.empty_like(theta)
    for i in range(len(theta)):
        e = np.zeros_like(theta)
        e[i] = step
        lp, _ = loss_and_grad(MLPParams.unflat(theta + e, d, h), x, y)
        lm, _ = loss_and_grad(MLPParams.unflat(theta - e, d, h), x, y)
        g[i] = (lp - lm) / (2 * step)
    return g


@pytest.mark.parametrize("setting", range(20))
def test_gradient_matches_finite_differences(setting):
    rng = np.random.default_rng(setting)
    d, h, n = 2, int(rng.integers(1, 16)), int(rng.integers(1, 12))
    theta = rng.normal(size=d * h + 2 * h + 1)
    x, y = rng.normal(size=(n, d)), rng.normal(size=n)
    _, grad = loss_and_grad(MLPParams.unflat(theta, d, h), x, y)
    a, f = grad.flat(), fd_gradient(theta, d, h, x, y)
    rel = np.abs(a - f) / np.maximum(np.abs(a) + np.abs(f), 1e-6)
    assert rel.max() < 1e-4


def test_zero_targets_loss_decreases(rng):
    x = rng.normal(size=(20, 2))
    m = fit_mlp(x, np.zeros(20), seed=1)
    assert m.loss_history[-1] <= m.loss_history[0]


def test_loss_decreases_over_training(rng):
    x = rng.normal(size=(38, 2)) * 100 + 500
    y = x @ [0.5, 0.5] + rng.normal(size=38)
    m = fit_mlp(x, y, seed=0)
    assert len(m.loss_history) == 201
    assert m.loss_history[-1] <= m.loss_history[1]


def test_deterministic_per_seed(rng):
    x, y = rng.normal(size=(15, 2)), rng.normal(size=15)
    a, b = fit_mlp(x, y, seed=4), fit_mlp(x, y, seed=4)
    assert np.array_equal(a.params.flat(), b.params.flat())
    assert not np.array_equal(a.params.flat(), fit_mlp(x, y, seed=5).params.flat())


def test_init_bounds():
    p = init_params(2, 100, 0)
    assert np.max(np.abs(p.w1)) <= np.sqrt(6 / 102)
    assert np.max(np.abs(p.w2)) <= np.sqrt(6 / 101)


def test_zero_weights_bias_only():
    p = MLPParams(np.zeros((2, 3)), np.zeros(3), np.zeros(3), 0.25)
    m = MLPModel(p, np.zeros(2), np.ones(2), 10.0, 2.0, np.zeros(1))
    np.testing.assert_allclose(m.predict([[1, 2], [300, -4]]), [10.5, 10.5])


def test_divergence_flagged(monkeypatch, rng):
    real = mlp.loss_and_grad
    calls = []

    def blow_up(params, x, y):
        calls.append(1)
        loss, grad = real(params, x, y)
        return (np.nan if len(calls) > 3 else loss), grad

    monkeypatch.setattr(mlp, "loss_and_grad", blow_up)
    with pytest.warns(DivergenceDetected):
        m = fit_mlp(rng.normal(size=(6, 2)), rng.normal(size=6), hidden=4, max_epochs=10)
    assert m.diverged and len(m.loss_history) == 3
    assert np.all(np.isfinite(m.params.flat()))
