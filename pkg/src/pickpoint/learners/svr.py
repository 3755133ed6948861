"""Linear epsilon-insensitive support vector regression.

The dual is solved in the 2N-variable form used by LIBSVM::

    min_a  1/2 a^T Q a + p^T a   s.t.  s^T a = 0,  0 <= a_t <= C_t

with ``a = [alpha; alpha*]``, ``s = [+1; -1]``, ``Q_tu = s_t s_u K(x_t, x_u)``
and ``p = [eps - y; eps + y]``. Each iteration picks a working pair by
LIBSVM's second-order rule and solves the two-variable subproblem
analytically (SMO). Features are standardised first (zero mean, unit
variance); ``C`` and ``epsilon`` stay in target units. On raw millimetre
coordinates the kernel entries dwarf ``C`` and SMO crawls.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numba
import numpy as np

from ..errors import NonConvergence
from ._base import Regressor, check_xy

_TAU = 1e-12


@numba.njit(cache=True, nogil=True)
def _smo(k, y, eps, cbox, tol, max_iter):
    n = y.shape[0]
    m = 2 * n
    s = np.empty(m)
    p = np.empty(m)
    cb = np.empty(m)
    for t in range(n):
        s[t] = 1.0
        s[t + n] = -1.0
        p[t] = eps - y[t]
        p[t + n] = eps + y[t]
        cb[t] = cbox[t]
        cb[t + n] = cbox[t]
    a = np.zeros(m)
    g = p.copy()
    gap = np.inf
    it = 0
    while it < max_iter:
        # i: maximal violator in I_up; j: second-order choice in I_low
        gmax = -np.inf
        i = -1
        for t in range(m):
            up = (s[t] > 0 and a[t] < cb[t]) or (s[t] < 0 and a[t] > 0)
            if up and -s[t] * g[t] > gmax:
                gmax = -s[t] * g[t]
                i = t
        if i < 0:
            gap = 0.0
            break
        ii = i % n
        gmax2 = -np.inf
        best = np.inf
        j = -1
        for t in range(m):
            low = (s[t] > 0 and a[t] > 0) or (s[t] < 0 and a[t] < cb[t])
            if not low:
                continue
            sg = s[t] * g[t]
            if sg > gmax2:
                gmax2 = sg
            b = gmax + sg
            if b > 0.0:
                tt = t % n
                quad = k[ii, ii] + k[tt, tt] - 2.0 * k[ii, tt]
                if quad <= 0.0:
                    quad = _TAU
                score = -(b * b) / quad
                if score <= best:
                    best = score
                    j = t
        gap = gmax + gmax2
        if j < 0 or gap < tol:
            break
        it += 1
        jj = j % n
        qii = k[ii, ii]
        qjj = k[jj, jj]
        qij = s[i] * s[j] * k[ii, jj]
        ci = cb[i]
        cj = cb[j]
        ai_old = a[i]
        aj_old = a[j]
        if s[i] != s[j]:
            quad = qii + qjj + 2.0 * qij
            if quad <= 0.0:
                quad = _TAU
            delta = (-g[i] - g[j]) / quad
            diff = a[i] - a[j]
            a[i] += delta
            a[j] += delta
            if diff > 0:
                if a[j] < 0:
                    a[j] = 0.0
                    a[i] = diff
            else:
                if a[i] < 0:
                    a[i] = 0.0
                    a[j] = -diff
            if diff > ci - cj:
                if a[i] > ci:
                    a[i] = ci
                    a[j] = ci - diff
            else:
                if a[j] > cj:
                    a[j] = cj
                    a[i] = cj + diff
        else:
            quad = qii + qjj - 2.0 * qij
            if quad <= 0.0:
                quad = _TAU
            delta = (g[i] - g[j]) / quad
            total = a[i] + a[j]
            a[i] -= delta
            a[j] += delta
            if total > ci:
                if a[i] > ci:
                    a[i] = ci
                    a[j] = total - ci
            else:
                if a[j] < 0:
                    a[j] = 0.0
                    a[i] = total
            if total > cj:
                if a[j] > cj:
                    a[j] = cj
                    a[i] = total - cj
            else:
                if a[i] < 0:
                    a[i] = 0.0
                    a[j] = total
        dai = a[i] - ai_old
        daj = a[j] - aj_old
        for t in range(m):
            tt = t % n
            g[t] += s[t] * (s[i] * k[tt, ii] * dai + s[j] * k[tt, jj] * daj)

    # bias from free variables, else midpoint of the feasible interval
    nfree = 0
    sfree = 0.0
    ub = np.inf
    lb = -np.inf
    for t in range(m):
        yg = s[t] * g[t]
        if a[t] >= cb[t]:
            if s[t] < 0:
                ub = min(ub, yg)
            else:
                lb = max(lb, yg)
        elif a[t] <= 0.0:
            if s[t] > 0:
                ub = min(ub, yg)
            else:
                lb = max(lb, yg)
        else:
            nfree += 1
            sfree += yg
    rho = sfree / nfree if nfree > 0 else 0.5 * (ub + lb)
    return a[:n] - a[n:], -rho, gap, it


def dual_objective(k, y, eps, beta) -> float:
    """Minimisation form ``1/2 b^T K b - y^T b + eps * |b|_1`` for ``b = alpha - alpha*``.

    Equal to the 2N-variable objective whenever ``alpha_t * alpha*_t = 0``,
    which holds at every optimum and for every SMO iterate reported here.
    """
    beta = np.asarray(beta, float)
    return float(0.5 * beta @ k @ beta - np.asarray(y, float) @ beta + eps * np.abs(beta).sum())


@dataclass(frozen=True, eq=False)
class SVRModel(Regressor):
    coef: np.ndarray
    intercept: float
    dual_coef: np.ndarray
    c: float
    epsilon: float
    kkt_gap: float
    n_iter: int
    converged: bool

    kind = "svr"

    @property
    def n_features(self) -> int:
        return len(self.coef)

    @property
    def n_support(self) -> int:
        return int(np.count_nonzero(self.dual_coef))

    def _predict(self, x):
        return x @ self.coef + self.intercept


def fit_svr(x, y, c: float = 10.0, epsilon: float = 0.1, w=None, tol: float = 1e-3,
            max_passes: int = 10_000) -> SVRModel:
    """Fit a linear-kernel epsilon-SVR by SMO.

    Sample weights scale the box per sample: ``C_i = C * N * w_i``. The
    margin term is ``|w|^2`` measured on standardised features.
    Iterations stop once the maximal KKT violation falls below ``tol`` or
    after ``max_passes * N`` pair updates; in the latter case a
    :class:`NonConvergence` warning carries the final violation and the best
    iterate is still returned.
    """
    if c <= 0 or epsilon < 0:
        raise ValueError("need c > 0 and epsilon >= 0")
    x, y, w = check_xy(x, y, w)
    n = x.shape[0]
    xm = x.mean(axis=0)
    xs = x.std(axis=0)
    xs = np.where(xs > 0, xs, 1.0)
    xc = (x - xm) / xs
    k = xc @ xc.T
    cbox = c * n * w
    beta, b, gap, it = _smo(k, y, float(epsilon), cbox, float(tol), int(max_passes) * n)
    converged = gap < tol
    if not converged:
        warnings.warn(NonConvergence(f"SVR stopped after {it} updates with KKT violation {gap:.3g}"), stacklevel=2)
    coef = (xc.T @ beta) / xs
    return SVRModel(coef, float(b - xm @ coef), beta, float(c), float(epsilon), float(gap), int(it), bool(converged))
