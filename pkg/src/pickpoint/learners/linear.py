"""Weighted least squares and the elastic-net solver used as a meta learner."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._base import Regressor, as_design, check_xy


@dataclass(frozen=True, eq=False)
class LinearModel(Regressor):
    coef: np.ndarray
    intercept: float

    kind = "linear"

    @property
    def n_features(self) -> int:
        return len(self.coef)

    def _predict(self, x):
        return x @ self.coef + self.intercept


def fit_linear(x, y, w=None) -> LinearModel:
    """Minimise ``sum_i w_i (y_i - x_i . b - c)^2``.

    The problem is centred on the weighted means and solved by SVD least
    squares on the sqrt-weight scaled design. For a rank-deficient design this
    gives the minimum-norm slope, i.e. the zero-ridge limit; a single
    effective sample therefore yields an intercept-only model.
    """
    x, y, w = check_xy(x, y, w)
    xm = w @ x
    ym = float(w @ y)
    sw = np.sqrt(w)
    a = (x - xm) * sw[:, None]
    b = (y - ym) * sw
    coef, *_ = np.linalg.lstsq(a, b, rcond=None)
    return LinearModel(coef, ym - float(xm @ coef))


@dataclass(frozen=True, eq=False)
class ElasticNetModel(LinearModel):
    alpha: float = 1.0
    l1_ratio: float = 0.5
    n_iter: int = 0

    kind = "elasticnet"


def elasticnet_objective(x, y, coef, intercept, alpha, l1_ratio) -> float:
    x = as_design(x)
    r = np.asarray(y, float) - x @ coef - intercept
    n = len(r)
    return float(
        0.5 / n * (r @ r)
        + alpha * l1_ratio * np.abs(coef).sum()
        + 0.5 * alpha * (1.0 - l1_ratio) * (coef @ coef)
    )


def fit_elasticnet(x, y, alpha: float = 1.0, l1_ratio: float = 0.5, tol: float = 1e-4,
                   max_iter: int = 1000) -> ElasticNetModel:
    """Cyclic coordinate descent on the elastic-net objective with intercept.

    Objective::

        1/(2n) ||y - X b - c||^2 + alpha * l1_ratio * ||b||_1
            + alpha * (1 - l1_ratio) / 2 * ||b||^2

    Stops when the largest coordinate change in a full pass is at most
    ``tol * max(1, max|b|)``, or after ``max_iter`` passes.
    """
    x, y, _ = check_xy(x, y)
    n, d = x.shape
    xm, ym = x.mean(axis=0), y.mean()
    xc, yc = x - xm, y - ym
    col_sq = np.einsum("ij,ij->j", xc, xc)
    l1 = alpha * l1_ratio * n
    l2 = alpha * (1.0 - l1_ratio) * n
    coef = np.zeros(d)
    r = yc.copy()
    it = 0
    for it in range(1, max_iter + 1):
        max_step = 0.0
        for j in range(d):
            if col_sq[j] == 0.0:
                continue
            old = coef[j]
            rho = xc[:, j] @ r + col_sq[j] * old
            new = np.sign(rho) * max(abs(rho) - l1, 0.0) / (col_sq[j] + l2)
            if new != old:
                r -= xc[:, j] * (new - old)
                coef[j] = new
                max_step = max(max_step, abs(new - old))
        scale = max(np.max(np.abs(coef)), 1.0) if d else 1.0
        if max_step <= tol * scale:
            break
    return ElasticNetModel(coef, float(ym - xm @ coef), alpha, l1_ratio, it)
