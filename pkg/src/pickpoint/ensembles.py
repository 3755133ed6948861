"""Ensemble regressors built on the primary learners.

Every fit is a pure function of ``(data, hyperparameters, seed)``. Members
that need randomness get their own seed from :func:`pickpoint.rng.derive_seed`
keyed by member index, so fitting members in any order or in parallel yields
identical models.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import TooFewSamples
from .learners import Regressor, check_xy, fit_elasticnet, fit_linear, fit_tree
from .learners._base import as_design
from .rng import SplitMix64, derive_seed, numpy_rng

ADABOOST = "adaboost_r2"
BAGGING = "bagging"
RANDOM_FOREST = "random_forest"
GRADIENT_BOOSTING = "gradient_boosting"
VOTING = "voting"
STACKING = "stacking"

# AdaBoost.R2 treats a member as a perfect fit below this error, relative to max(1, max|y|)
PERFECT_FIT_RTOL = 1e-12

FitFn = Callable[[np.ndarray, np.ndarray, int], Regressor]


@dataclass(frozen=True, eq=False)
class EnsembleModel(Regressor):
    """A fitted ensemble.

    Attributes:
        kind: one of the module-level kind constants.
        members: fitted base models.
        weights: per-member weights; ``lr * log(1/beta)`` for AdaBoost.R2,
            uniform otherwise.
        meta: meta learner for voting/stacking (``None`` for plain averaging).
        meta_shift, meta_scale: standardisation applied to the member
            predictions before they reach ``meta``.
        init: initial constant of gradient boosting.
        learning_rate: shrinkage of the boosting stages.
        member_names: labels of heterogeneous members.
        info: diagnostics (loss traces, weight traces); not used by predict.
    """

    kind: str
    members: tuple
    weights: np.ndarray
    n_features: int
    seed: int = 0
    meta: Regressor | None = None
    meta_shift: np.ndarray | None = None
    meta_scale: np.ndarray | None = None
    init: float = 0.0
    learning_rate: float = 1.0
    member_names: tuple = ()
    info: dict = field(default_factory=dict, repr=False)

    def member_predictions(self, x) -> np.ndarray:
        x = as_design(x, self.n_features)
        return np.column_stack([m.predict(x) for m in self.members])

    def _predict(self, x):
        preds = self.member_predictions(x)
        if self.kind == ADABOOST:
            return weighted_median(preds, self.weights)
        if self.kind == GRADIENT_BOOSTING:
            return self.init + self.learning_rate * preds.sum(axis=1)
        if self.kind in (VOTING, STACKING) and self.meta is not None:
            return self.meta.predict((preds - self.meta_shift) / self.meta_scale)
        return preds.mean(axis=1)


def predict_ensemble(model: EnsembleModel, x) -> np.ndarray:
    return model.predict(x)


def weighted_median(preds: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Row-wise weighted median: the smallest value whose cumulative weight reaches half the total."""
    preds = np.atleast_2d(preds)
    order = np.argsort(preds, axis=1, kind="stable")
    cdf = np.cumsum(np.asarray(weights, float)[order], axis=1)
    hit = cdf >= 0.5 * cdf[:, -1:]
    pick = np.argmax(hit, axis=1)
    rows = np.arange(preds.shape[0])
    return preds[rows, order[rows, pick]]


def fit_adaboost_r2(x, y, n: int = 100, learning_rate: float = 0.1, seed: int = 0,
                    base: Callable = fit_linear, record_weights: bool = False) -> EnsembleModel:
    """Drucker's AdaBoost.R2 with the linear loss, fitting the base on sample weights.

    Per round: fit; ``L_i = |err_i| / max|err|``; ``Lbar = sum w_i L_i``; stop
    if ``Lbar >= 0.5`` (the round's member is dropped unless it would be the
    only one); ``beta = Lbar / (1 - Lbar)``; member weight
    ``lr * log(1/beta)``; ``w_i *= beta ** (lr * (1 - L_i))`` and renormalise.
    A member that fits the training data exactly ends boosting and is kept
    alone.
    """
    x, y, w = check_xy(x, y)
    if x.shape[0] < 2:
        raise TooFewSamples("AdaBoost.R2 needs at least 2 samples")
    tol = PERFECT_FIT_RTOL * max(1.0, float(np.max(np.abs(y))))
    members: list[Regressor] = []
    alphas: list[float] = []
    trace = [w.copy()] if record_weights else None
    stop = "n_estimators"
    for _ in range(n):
        m = base(x, y, w)
        err = np.abs(m.predict(x) - y)
        emax = float(err.max())
        if emax <= tol:
            members, alphas, stop = [m], [1.0], "perfect_fit"
            break
        loss = err / emax
        lbar = float(w @ loss)
        if lbar >= 0.5:
            if not members:
                members, alphas = [m], [1.0]
            stop = "loss>=0.5"
            break
        beta = lbar / (1.0 - lbar)
        members.append(m)
        alphas.append(learning_rate * math.log(1.0 / beta))
        w = w * np.power(beta, learning_rate * (1.0 - loss))
        w = w / w.sum()
        if trace is not None:
            trace.append(w.copy())
    info = {"stop": stop}
    if trace is not None:
        info["weight_trace"] = np.array(trace)
    return EnsembleModel(ADABOOST, tuple(members), np.array(alphas), x.shape[1], seed,
                         learning_rate=learning_rate, info=info)


def bootstrap_index(n_rows: int, seed: int, member: int) -> np.ndarray:
    return numpy_rng(seed, member).integers(0, n_rows, n_rows)


def _tree_fn(max_depth=None, max_features=None):
    def fit(x, y, seed):
        return fit_tree(x, y, max_depth=max_depth, max_features=max_features, seed=seed)
    return fit


def _linear_fn(x, y, seed):
    return fit_linear(x, y)


def _bag(kind, x, y, n, seed, fit: FitFn, info=None) -> EnsembleModel:
    x, y, _ = check_xy(x, y)
    members = []
    for i in range(n):
        idx = bootstrap_index(len(y), seed, i)
        members.append(fit(x[idx], y[idx], derive_seed(seed, i, 1)))
    return EnsembleModel(kind, tuple(members), np.full(n, 1.0 / n), x.shape[1], seed, info=info or {})


def fit_bagging(x, y, base: str = "tree", n: int = 100, seed: int = 0) -> EnsembleModel:
    """Mean of ``n`` base models fitted on bootstrap resamples (``base`` is ``"linear"`` or ``"tree"``)."""
    if base not in ("linear", "tree"):
        raise ValueError(f"unknown bagging base {base!r}")
    fit = _linear_fn if base == "linear" else _tree_fn()
    return _bag(BAGGING, x, y, n, seed, fit, info={"base": base})


def fit_random_forest(x, y, n: int = 100, seed: int = 0, max_features: int | None = None) -> EnsembleModel:
    """Bootstrap CART trees with per-node feature subsampling (all features by default)."""
    return _bag(RANDOM_FOREST, x, y, n, seed, _tree_fn(max_features=max_features))


def fit_gradient_boosting(x, y, n: int = 100, learning_rate: float = 0.1, seed: int = 0,
                          max_depth: int = 3) -> EnsembleModel:
    """Least-squares boosting of depth-limited trees.

    ``info["train_mse"]`` holds the training MSE after the constant stage and
    after each tree (``n + 1`` values).
    """
    x, y, _ = check_xy(x, y)
    f0 = float(y.mean())
    f = np.full(len(y), f0)
    trees = []
    mse = [float(np.mean((y - f) ** 2))]
    for i in range(n):
        t = fit_tree(x, y - f, max_depth=max_depth, seed=derive_seed(seed, i))
        f = f + learning_rate * t.predict(x)
        trees.append(t)
        mse.append(float(np.mean((y - f) ** 2)))
    return EnsembleModel(GRADIENT_BOOSTING, tuple(trees), np.ones(n), x.shape[1], seed, init=f0,
                         learning_rate=learning_rate, info={"train_mse": np.array(mse)})


@dataclass(frozen=True)
class EnsembleParams:
    """Hyperparameters shared by the composite ensembles."""

    n_estimators: int = 100
    learning_rate: float = 0.1
    gb_max_depth: int = 3
    rf_max_features: int | None = None
    bagging_base: str = "tree"


def named_bases(names: Sequence[str], params: EnsembleParams = EnsembleParams()) -> list[tuple[str, FitFn]]:
    """Factories for the base learners a voting/stacking ensemble combines."""
    p = params
    table: dict[str, FitFn] = {
        "LR": _linear_fn,
        "DT": _tree_fn(),
        "GradientBoosting": lambda x, y, s: fit_gradient_boosting(x, y, p.n_estimators, p.learning_rate, s,
                                                                  p.gb_max_depth),
        "AdaBoost": lambda x, y, s: fit_adaboost_r2(x, y, p.n_estimators, p.learning_rate, s),
        "Bagging": lambda x, y, s: fit_bagging(x, y, p.bagging_base, p.n_estimators, s),
        "RF": lambda x, y, s: fit_random_forest(x, y, p.n_estimators, s, p.rf_max_features),
    }
    return [(name, table[name]) for name in names]


VOTING_BASES = ("LR", "DT", "GradientBoosting", "AdaBoost", "Bagging", "RF")
STACKING_BASES = ("DT", "GradientBoosting", "AdaBoost", "Bagging", "RF")


def _standardiser(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    s = z.std(axis=0)
    return z.mean(axis=0), np.where(s > 0, s, 1.0)


def fit_voting(x, y, seed: int = 0, bases: Sequence[tuple[str, FitFn]] | None = None,
               meta: str = "elasticnet", alpha: float = 1.0, l1_ratio: float = 0.5,
               params: EnsembleParams = EnsembleParams(), standardise: bool = False) -> EnsembleModel:
    """Six bases fitted on the full training set, combined by an elastic-net meta learner.

    The meta learner sees the bases' in-sample predictions in target units.
    With ``standardise=True`` each column is z-scored first; the ridge part of
    the penalty then shrinks every coefficient by ``1 / (1 + alpha * (1 - l1_ratio))``,
    which at ``alpha=1`` pulls predictions a third of the way to the mean.
    ``meta="average"`` switches to a plain mean of the bases.
    """
    x, y, _ = check_xy(x, y)
    if x.shape[0] < 5:
        raise TooFewSamples("voting needs at least 5 samples")
    bases = list(bases) if bases is not None else named_bases(VOTING_BASES, params)
    members = tuple(fit(x, y, derive_seed(seed, k)) for k, (_, fit) in enumerate(bases))
    names = tuple(name for name, _ in bases)
    nb = len(members)
    if meta == "average":
        return EnsembleModel(VOTING, members, np.full(nb, 1.0 / nb), x.shape[1], seed, member_names=names)
    if meta != "elasticnet":
        raise ValueError(f"unknown voting meta learner {meta!r}")
    z = np.column_stack([m.predict(x) for m in members])
    if standardise:
        shift, scale = _standardiser(z)
    else:
        shift, scale = np.zeros(nb), np.ones(nb)
    en = fit_elasticnet((z - shift) / scale, y, alpha=alpha, l1_ratio=l1_ratio)
    return EnsembleModel(VOTING, members, np.full(nb, 1.0 / nb), x.shape[1], seed, meta=en,
                         meta_shift=shift, meta_scale=scale, member_names=names)


def fold_assignment(n_rows: int, n_folds: int, seed: int) -> list[np.ndarray]:
    """Seeded shuffle of row indices cut into ``n_folds`` near-equal contiguous folds."""
    perm = SplitMix64(derive_seed(seed, 0xF01D)).shuffle(list(range(n_rows)))
    return [np.sort(f) for f in np.array_split(np.array(perm, dtype=np.int64), n_folds)]


def fit_stacking(x, y, seed: int = 0, bases: Sequence[tuple[str, FitFn]] | None = None,
                 n_folds: int = 5, params: EnsembleParams = EnsembleParams()) -> EnsembleModel:
    """Linear meta learner over out-of-fold base predictions.

    Each base is fitted ``n_folds`` times on the other folds to produce the
    meta design matrix, then refitted on all rows for inference.
    """
    x, y, _ = check_xy(x, y)
    n = x.shape[0]
    if n < 2 * n_folds:
        raise TooFewSamples(f"stacking with {n_folds} folds needs at least {2 * n_folds} samples, got {n}")
    bases = list(bases) if bases is not None else named_bases(STACKING_BASES, params)
    folds = fold_assignment(n, n_folds, seed)
    z = np.empty((n, len(bases)))
    for b, (_, fit) in enumerate(bases):
        for k, held in enumerate(folds):
            keep = np.setdiff1d(np.arange(n), held, assume_unique=True)
            m = fit(x[keep], y[keep], derive_seed(seed, b, k + 1))
            z[held, b] = m.predict(x[held])
    meta = fit_linear(z, y)
    members = tuple(fit(x, y, derive_seed(seed, b)) for b, (_, fit) in enumerate(bases))
    nb = len(members)
    return EnsembleModel(STACKING, members, np.full(nb, 1.0 / nb), x.shape[1], seed, meta=meta,
                         meta_shift=np.zeros(nb), meta_scale=np.ones(nb),
                         member_names=tuple(name for name, _ in bases),
                         info={"oof_predictions": z, "folds": folds})
