from __future__ import annotations

from typing import ClassVar

import numpy as np

from ..errors import DimensionMismatch, TooFewSamples


def as_design(x, n_features: int | None = None) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise DimensionMismatch(f"design matrix must be 2-D, got shape {x.shape}")
    if n_features is not None and x.shape[1] != n_features:
        raise DimensionMismatch(f"model was trained on {n_features} columns, got {x.shape[1]}")
    return x


def check_xy(x, y, w=None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Validate a training problem and return ``(x, y, w)`` with ``w`` summing to 1."""
    x = as_design(x)
    y = np.asarray(y, dtype=float).reshape(-1)
    n = x.shape[0]
    if n < 1:
        raise TooFewSamples("need at least one sample")
    if y.shape[0] != n:
        raise DimensionMismatch(f"{n} rows in x but {y.shape[0]} targets")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("training data must be finite")
    if w is None:
        w = np.full(n, 1.0 / n)
    else:
        w = np.asarray(w, dtype=float).reshape(-1)
        if w.shape[0] != n or np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("sample weights must be n finite non-negative values")
        total = w.sum()
        if total <= 0:
            raise ValueError("sample weights sum to zero")
        w = w / total
    return x, y, w


class Regressor:
    """Common surface of every fitted model: ``predict`` with a column check."""

    kind: ClassVar[str]
    n_features: int

    def predict(self, x) -> np.ndarray:
        return self._predict(as_design(x, self.n_features))

    def _predict(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError
