import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pickpoint import ensembles as en
from pickpoint.errors import DimensionMismatch, TooFewSamples
from pickpoint.learners import LinearModel, fit_linear, fit_tree
from pickpoint.rng import derive_seed


def noisy_linear(rng, n=38):
    x = rng.uniform(400, 1000, size=(n, 2))
    return x, x @ [0.6, 0.4] + rng.normal(size=n) * 5


# weighted median

def test_weighted_median_examples():
    assert en.weighted_median(np.array([[1.0, 2.0, 3.0]]), np.ones(3))[0] == 2.0
    assert en.weighted_median(np.array([[5.0, 9.0, 9.0]]), np.array([3.0, 1.0, 1.0]))[0] == 5.0
    assert en.weighted_median(np.array([[9.0, 5.0, 9.0]]), np.array([1.0, 3.0, 1.0]))[0] == 5.0


# AdaBoost.R2

def adaboost_trace(x, y, n, lr):
    """Scalar re-execution of the R2 recurrence with a 1-D weighted least-squares base."""
    m = len(y)
    w = [1.0 / m] * m
    fits, alphas, traces = [], [], [list(w)]
    for _ in range(n):
        xb = sum(wi * xi for wi, xi in zip(w, x))
        yb = sum(wi * yi for wi, yi in zip(w, y))
        sxy = sum(wi * (xi - xb) * (yi - yb) for wi, xi, yi in zip(w, x, y))
        sxx = sum(wi * (xi - xb) ** 2 for wi, xi in zip(w, x))
        slope = sxy / sxx
        icpt = yb - slope * xb
        err = [abs(slope * xi + icpt - yi) for xi, yi in zip(x, y)]
        emax = max(err)
        loss = [e / emax for e in err]
        lbar = sum(wi * li for wi, li in zip(w, loss))
        if lbar >= 0.5:
            break
        beta = lbar / (1 - lbar)
        fits.append((slope, icpt))
        alphas.append(lr * math.log(1 / beta))
        w = [wi * beta ** (lr * (1 - li)) for wi, li in zip(w, loss)]
        total = sum(w)
        w = [wi / total for wi in w]
        traces.append(list(w))
    return fits, alphas, traces


def scalar_weighted_median(values, weights):
    pairs = sorted(zip(values, weights), key=lambda p: p[0])
    half, acc = 0.5 * sum(weights), 0.0
    for v, wt in pairs:
        acc += wt
        if acc >= half:
            return v


def test_adaboost_matches_scalar_trace():
    rng = np.random.default_rng(3)
    x = np.sort(rng.uniform(0, 10, 30))
    y = np.where(x < 5, 2 * x, 10 + 0.3 * (x - 5)) + rng.normal(size=30) * 0.2
    fits, alphas, traces = adaboost_trace(x.tolist(), y.tolist(), 12, 0.1)
    m = en.fit_adaboost_r2(x[:, None], y, n=12, learning_rate=0.1, record_weights=True)
    assert len(m.members) == len(fits) > 1
    np.testing.assert_allclose(m.weights, alphas, rtol=1e-9)
    np.testing.assert_allclose(m.info["weight_trace"], traces, atol=1e-12)
    for member, (slope, icpt) in zip(m.members, fits):
        assert member.coef[0] == pytest.approx(slope, rel=1e-9)
        assert member.intercept == pytest.approx(icpt, rel=1e-9, abs=1e-9)
    probe = np.linspace(-1, 11, 25)
    ref = [scalar_weighted_median([s * p + c for s, c in fits], alphas) for p in probe]
    np.testing.assert_allclose(m.predict(probe[:, None]), ref, rtol=1e-12)


def test_adaboost_perfect_fit_single_member():
    x = np.random.default_rng(0).normal(size=(20, 2)) * 100
    y = x @ [2.0, -1.0] + 3
    m = en.fit_adaboost_r2(x, y)
    assert len(m.members) == 1 and m.info["stop"] == "perfect_fit"
    np.testing.assert_allclose(m.predict(x), y, atol=1e-9)


@given(st.integers(0, 10_000))
def test_adaboost_weights_stay_normalised(seed):
    rng = np.random.default_rng(seed)
    x, y = noisy_linear(rng, 25)
    m = en.fit_adaboost_r2(x, y, n=30, record_weights=True)
    tr = m.info["weight_trace"]
    assert np.all(tr >= 0)
    np.testing.assert_allclose(tr.sum(axis=1), 1.0, atol=1e-12)
    assert np.all(m.weights > 0) and len(m.members) <= 30


def test_adaboost_needs_two_samples():
    with pytest.raises(TooFewSamples):
        en.fit_adaboost_r2([[1.0, 2.0]], [3.0])


# bagging and forests

def test_bagging_single_sample():
    for base in ("linear", "tree"):
        m = en.fit_bagging([[3.0, 4.0]], [7.5], base=base, n=10, seed=2)
        assert m.predict([[0.0, 0.0], [100.0, -5.0]]).tolist() == [7.5, 7.5]


def test_bagging_zero_variance_matches_base(rng):
    x = rng.normal(size=(12, 2))
    m = en.fit_bagging(x, np.full(12, -2.0), base="tree", n=15)
    np.testing.assert_allclose(m.predict(x), fit_tree(x, np.full(12, -2.0)).predict(x), atol=1e-12)


def test_bagging_reduces_variance(rng):
    x, y = noisy_linear(rng, 30)
    probe = np.array([[300.0, 1100.0], [1200.0, 350.0]])
    bagged = np.array([en.fit_bagging(x, y, "linear", 20, s).predict(probe) for s in range(50)])
    single = np.array([en.fit_bagging(x, y, "linear", 1, s).predict(probe) for s in range(50)])
    assert np.all(bagged.var(axis=0) <= single.var(axis=0))


def test_forest_constant_and_deterministic(rng):
    x = rng.normal(size=(20, 2))
    assert np.all(en.fit_random_forest(x, np.full(20, 8.0), n=5).predict(x) == 8.0)
    y = rng.normal(size=20)
    a = en.fit_random_forest(x, y, n=10, seed=9).predict(x)
    b = en.fit_random_forest(x, y, n=10, seed=9).predict(x)
    assert np.array_equal(a, b)


def test_forest_of_one_is_bootstrap_cart(rng):
    x, y = noisy_linear(rng)
    m = en.fit_random_forest(x, y, n=1, seed=5)
    idx = en.bootstrap_index(len(y), 5, 0)
    ref = fit_tree(x[idx], y[idx], seed=derive_seed(5, 0, 1))
    probe = rng.uniform(300, 1100, size=(40, 2))
    np.testing.assert_allclose(m.predict(probe), ref.predict(probe), atol=1e-12)


@pytest.mark.parametrize("fit", [lambda x, y: en.fit_random_forest(x, y, n=12, seed=1),
                                 lambda x, y: en.fit_bagging(x, y, "linear", 12, seed=1)])
def test_member_order_invariance(rng, fit):
    x, y = noisy_linear(rng)
    m = fit(x, y)
    rev = dataclasses.replace(m, members=m.members[::-1])
    np.testing.assert_allclose(rev.predict(x), m.predict(x), atol=1e-9)


def test_bagging_unknown_base():
    with pytest.raises(ValueError):
        en.fit_bagging([[1.0]], [1.0], base="svr")


# gradient boosting

def test_boosting_constant_target(rng):
    x = rng.normal(size=(10, 2))
    m = en.fit_gradient_boosting(x, np.full(10, 3.0), n=5)
    assert m.init == 3.0
    assert all(np.all(t.predict(x) == 0) for t in m.members)


def test_boosting_single_sample():
    m = en.fit_gradient_boosting([[1.0, 1.0]], [42.0], n=3)
    assert m.predict([[1.0, 1.0]])[0] == 42.0 and m.info["train_mse"][0] == 0


@given(st.integers(0, 10_000))
def test_boosting_mse_monotone(seed):
    rng = np.random.default_rng(seed)
    x, y = rng.normal(size=(30, 2)), rng.normal(size=30)
    mse = en.fit_gradient_boosting(x, y, n=100).info["train_mse"]
    assert len(mse) == 101 and np.all(np.diff(mse) <= 1e-12)


def test_boosting_staged_sum(rng):
    x, y = noisy_linear(rng)
    m = en.fit_gradient_boosting(x, y, n=40, learning_rate=0.1)
    probe = rng.uniform(300, 1100, size=(20, 2))
    acc = np.full(20, np.mean(y))
    for t in m.members:
        acc = acc + 0.1 * t.predict(probe)
    np.testing.assert_allclose(m.predict(probe), acc, atol=1e-9)
    assert all(t.depth <= 3 for t in m.members)


# single-member ensembles

def test_single_member_equals_member(rng):
    x, y = noisy_linear(rng)
    for m in (en.fit_adaboost_r2(x, y, n=1), en.fit_bagging(x, y, "tree", 1), en.fit_random_forest(x, y, n=1),
              en.fit_voting(x, y, bases=[("LR", lambda a, b, s: fit_linear(a, b))], meta="average")):
        assert len(m.members) == 1
        np.testing.assert_array_equal(m.predict(x), m.members[0].predict(x))
    with pytest.raises(DimensionMismatch):
        m.predict(np.zeros((2, 3)))


# voting

def test_voting_constant_target(rng):
    x = rng.normal(size=(12, 2)) * 100
    m = en.fit_voting(x, np.full(12, 6.5), params=en.EnsembleParams(n_estimators=5))
    assert m.meta.intercept == pytest.approx(6.5) and np.all(m.meta.coef == 0)
    np.testing.assert_allclose(m.predict(rng.normal(size=(4, 2))), 6.5)


def test_voting_is_deterministic_and_named(rng):
    x, y = noisy_linear(rng)
    p = en.EnsembleParams(n_estimators=10)
    a, b = en.fit_voting(x, y, seed=4, params=p), en.fit_voting(x, y, seed=4, params=p)
    assert np.array_equal(a.predict(x), b.predict(x))
    assert a.member_names == en.VOTING_BASES


def test_voting_standardised_meta_shrinks(rng):
    x, y = noisy_linear(rng)
    p = en.EnsembleParams(n_estimators=10)
    raw = en.fit_voting(x, y, params=p)
    std = en.fit_voting(x, y, params=p, standardise=True)
    assert np.all(raw.meta_scale == 1) and not np.all(std.meta_scale == 1)
    spread = lambda m: np.std(m.predict(x))  # noqa: E731
    assert spread(std) < spread(raw)


def test_voting_needs_five_samples():
    with pytest.raises(TooFewSamples):
        en.fit_voting(np.zeros((4, 2)), np.zeros(4))


# stacking

def memoriser(x, y, seed):
    """Recalls the target of an exactly matching training row, 0 otherwise."""
    table = {tuple(r): v for r, v in zip(x.tolist(), y.tolist())}

    class Memo(LinearModel):
        def _predict(self, q):
            return np.array([table.get(tuple(r), 0.0) for r in q.tolist()])

    return Memo(np.zeros(x.shape[1]), 0.0)


def test_stacking_out_of_fold_discipline(rng):
    x = rng.normal(size=(50, 2))
    y = rng.normal(size=50)
    bases = [("memo", memoriser), ("LR", lambda a, b, s: fit_linear(a, b))]
    m = en.fit_stacking(x, y, bases=bases)
    assert abs(m.meta.coef[0]) < 0.5
    z = np.column_stack([b.predict(x) for b in m.members])
    leaky = fit_linear(z, y)
    assert leaky.coef[0] == pytest.approx(1.0, abs=1e-6)


def test_stacking_perfect_base_dominates(rng):
    x = rng.uniform(0, 10, size=(40, 2))
    y = np.sin(x[:, 0]) * 5 + x[:, 1]
    truth = lambda a, b, s: type("T", (LinearModel,), {"_predict": lambda self, q: np.sin(q[:, 0]) * 5 + q[:, 1]})(  # noqa: E731
        np.zeros(2), 0.0)
    const = lambda a, b, s: LinearModel(np.zeros(2), float(np.mean(b)))  # noqa: E731
    m = en.fit_stacking(x, y, bases=[("const", const), ("truth", truth), ("const2", const)])
    assert abs(m.meta.coef[1]) > 0.9
    assert np.mean((m.predict(x) - y) ** 2) < np.var(y)


def test_stacking_identical_bases_collapse(rng):
    x, y = noisy_linear(rng, 30)
    lr = lambda a, b, s: fit_linear(a, b)  # noqa: E731
    m = en.fit_stacking(x, y, bases=[("a", lr), ("b", lr), ("c", lr)])
    z = m.info["oof_predictions"]
    assert np.allclose(z[:, 0], z[:, 1]) and np.allclose(z[:, 0], z[:, 2])
    uni = fit_linear(z[:, :1], y)
    assert m.meta.coef.sum() == pytest.approx(uni.coef[0], rel=1e-6)
    np.testing.assert_allclose(m.meta.predict(z), uni.predict(z[:, :1]), atol=1e-6)


def test_fold_assignment_deterministic_partition():
    a, b = en.fold_assignment(38, 5, 7), en.fold_assignment(38, 5, 7)
    assert all(np.array_equal(p, q) for p, q in zip(a, b))
    assert sorted(np.concatenate(a).tolist()) == list(range(38))
    assert [len(f) for f in a] == [8, 8, 8, 7, 7]
    assert any(not np.array_equal(p, q) for p, q in zip(a, en.fold_assignment(38, 5, 8)))


def test_stacking_too_few_rows():
    with pytest.raises(TooFewSamples):
        en.fit_stacking(np.zeros((9, 2)), np.zeros(9))


def test_default_stacking_is_deterministic(rng):
    x, y = noisy_linear(rng)
    p = en.EnsembleParams(n_estimators=8)
    a, b = en.fit_stacking(x, y, seed=3, params=p), en.fit_stacking(x, y, seed=3, params=p)
    assert np.array_equal(a.predict(x), b.predict(x))
    assert a.member_names == en.STACKING_BASES
