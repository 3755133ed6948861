"""Single-hidden-layer ReLU regressor trained by full-batch Adam."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from ..errors import DivergenceDetected
from ..rng import numpy_rng
from ._base import Regressor, check_xy

ADAM_STEP = 1e-3
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass(frozen=True, eq=False)
class MLPParams:
    w1: np.ndarray  # (d, h)
    b1: np.ndarray  # (h,)
    w2: np.ndarray  # (h,)
    b2: float

    def flat(self) -> np.ndarray:
        return np.concatenate([self.w1.ravel(), self.b1, self.w2, [self.b2]])

    @classmethod
    def unflat(cls, v: np.ndarray, d: int, h: int) -> MLPParams:
        v = np.asarray(v, float)
        i = d * h
        return cls(v[:i].reshape(d, h), v[i:i + h], v[i + h:i + 2 * h], float(v[i + 2 * h]))


def init_params(d: int, h: int, seed: int) -> MLPParams:
    """Glorot-uniform weights and biases, bound ``sqrt(6 / (fan_in + fan_out))`` per layer."""
    rng = numpy_rng(seed, 0x31)
    b_in = np.sqrt(6.0 / (d + h))
    b_out = np.sqrt(6.0 / (h + 1))
    return MLPParams(
        rng.uniform(-b_in, b_in, (d, h)),
        rng.uniform(-b_in, b_in, h),
        rng.uniform(-b_out, b_out, h),
        float(rng.uniform(-b_out, b_out)),
    )


def forward(params: MLPParams, x: np.ndarray) -> np.ndarray:
    return np.maximum(x @ params.w1 + params.b1, 0.0) @ params.w2 + params.b2


def loss_and_grad(params: MLPParams, x: np.ndarray, y: np.ndarray) -> tuple[float, MLPParams]:
    """Half mean squared error and its exact gradient."""
    n = x.shape[0]
    z = x @ params.w1 + params.b1
    h = np.maximum(z, 0.0)
    r = h @ params.w2 + params.b2 - y
    loss = 0.5 * float(r @ r) / n
    dr = r / n
    gw2 = h.T @ dr
    gb2 = float(dr.sum())
    dz = np.outer(dr, params.w2) * (z > 0.0)
    return loss, MLPParams(x.T @ dz, dz.sum(axis=0), gw2, gb2)


@dataclass(frozen=True, eq=False)
class MLPModel(Regressor):
    """Network on standardised inputs; outputs are mapped back to target units."""

    params: MLPParams
    x_mean: np.ndarray
    x_scale: np.ndarray
    y_mean: float
    y_scale: float
    loss_history: np.ndarray = field(repr=False)
    diverged: bool = False

    kind = "mlp"

    @property
    def n_features(self) -> int:
        return len(self.x_mean)

    def _predict(self, x):
        return forward(self.params, (x - self.x_mean) / self.x_scale) * self.y_scale + self.y_mean


def _scale(a: np.ndarray) -> np.ndarray:
    s = a.std(axis=0)
    return np.where(s > 0, s, 1.0)


def fit_mlp(x, y, hidden: int = 100, max_epochs: int = 200, seed: int = 0) -> MLPModel:
    """Train a ``d -> hidden -> 1`` ReLU network with full-batch Adam.

    Inputs and targets are standardised internally. ``loss_history[k]`` is
    the training loss (standardised units) before update ``k``, with the final
    loss appended, so it has ``max_epochs + 1`` entries.
    """
    x, y, _ = check_xy(x, y)
    xm, xs = x.mean(axis=0), _scale(x)
    ym, ys = float(y.mean()), float(_scale(y[:, None])[0])
    xz, yz = (x - xm) / xs, (y - ym) / ys
    d = x.shape[1]

    theta = init_params(d, hidden, seed).flat()
    m = np.zeros_like(theta)
    v = np.zeros_like(theta)
    history = []
    last_good = theta.copy()
    diverged = False
    for t in range(1, max_epochs + 1):
        loss, grad = loss_and_grad(MLPParams.unflat(theta, d, hidden), xz, yz)
        g = grad.flat()
        if not (np.isfinite(loss) and np.all(np.isfinite(g))):
            diverged = True
            break
        history.append(loss)
        last_good = theta.copy()
        m = ADAM_BETA1 * m + (1 - ADAM_BETA1) * g
        v = ADAM_BETA2 * v + (1 - ADAM_BETA2) * g * g
        mhat = m / (1 - ADAM_BETA1**t)
        vhat = v / (1 - ADAM_BETA2**t)
        theta = theta - ADAM_STEP * mhat / (np.sqrt(vhat) + ADAM_EPS)
    if not diverged:
        final, _ = loss_and_grad(MLPParams.unflat(theta, d, hidden), xz, yz)
        if np.isfinite(final):
            history.append(final)
            last_good = theta
        else:
            diverged = True
    if diverged:
        warnings.warn(DivergenceDetected("MLP training loss became non-finite; returning last finite iterate"),
                      stacklevel=2)
    return MLPModel(MLPParams.unflat(last_good, d, hidden), xm, xs, ym, ys, np.array(history), diverged)
