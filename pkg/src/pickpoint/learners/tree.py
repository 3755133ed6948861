"""CART regression tree with sample weights.

The grower is compiled with numba: ensembles fit thousands of small trees and
the benchmark budget does not allow a Python-level split search.

Split rule: at every node, every feature and every midpoint between
consecutive distinct sorted values is a candidate; the winner maximises the
weighted squared-error reduction. Scanning is feature-major, thresholds
ascending, and a candidate replaces the incumbent only if its gain is larger
by a relative 1e-10, so ties (including ties blurred by rounding) go to the
lower feature index and then the lower threshold. Samples with
``x <= threshold`` go left. Leaves predict the weighted mean target.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from ._base import Regressor, check_xy

LEAF = -1


@numba.njit(cache=True)
def _splitmix(state):
    state = (state + np.uint64(0x9E3779B97F4A7C15)) & np.uint64(0xFFFFFFFFFFFFFFFF)
    z = state
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return state, z ^ (z >> np.uint64(31))


@numba.njit(cache=True, nogil=True)
def _grow(x, y, w, max_depth, min_split, min_leaf, max_features, seed):
    n, d = x.shape
    cap = 2 * n + 1
    feature = np.full(cap, -1, dtype=np.int64)
    threshold = np.zeros(cap)
    left = np.full(cap, -1, dtype=np.int64)
    right = np.full(cap, -1, dtype=np.int64)
    value = np.zeros(cap)
    idx = np.arange(n)
    tmp = np.empty(n, dtype=np.int64)
    feats = np.arange(d)
    state = np.uint64(seed)

    # stack of (node, start, end, depth)
    stack = np.empty((cap, 4), dtype=np.int64)
    top = 0
    stack[0, 0] = 0
    stack[0, 1] = 0
    stack[0, 2] = n
    stack[0, 3] = 0
    top = 1
    n_nodes = 1
    while top > 0:
        top -= 1
        node = stack[top, 0]
        start = stack[top, 1]
        end = stack[top, 2]
        depth = stack[top, 3]
        cnt = end - start

        sw = 0.0
        swy = 0.0
        ymin = np.inf
        ymax = -np.inf
        for k in range(start, end):
            i = idx[k]
            sw += w[i]
            swy += w[i] * y[i]
            if y[i] < ymin:
                ymin = y[i]
            if y[i] > ymax:
                ymax = y[i]
        mean = swy / sw if sw > 0 else 0.0
        value[node] = mean

        if cnt < min_split or cnt < 2 * min_leaf or (max_depth >= 0 and depth >= max_depth) or ymin == ymax:
            continue

        # candidate features: all of them, or a seeded partial shuffle
        n_try = d
        if max_features < d:
            n_try = max_features
            for a in range(d):
                feats[a] = a
            for a in range(n_try):
                state, r = _splitmix(state)
                b = a + np.int64(r % np.uint64(d - a))
                t = feats[a]
                feats[a] = feats[b]
                feats[b] = t
            # keep feature-index order among the chosen ones for tie-breaking
            feats[:n_try] = np.sort(feats[:n_try])

        best_gain = 0.0
        best_f = -1
        best_thr = 0.0
        for a in range(n_try):
            f = feats[a]
            xs = np.empty(cnt)
            for k in range(cnt):
                xs[k] = x[idx[start + k], f]
            order = np.argsort(xs, kind="mergesort")
            wl = 0.0
            sl = 0.0
            for k in range(cnt - 1):
                i = idx[start + order[k]]
                wl += w[i]
                sl += w[i] * (y[i] - mean)
                x_lo = xs[order[k]]
                x_hi = xs[order[k + 1]]
                if not x_lo < x_hi:
                    continue
                if k + 1 < min_leaf or cnt - k - 1 < min_leaf:
                    continue
                wr = sw - wl
                if wl <= 0.0 or wr <= 0.0:
                    continue
                # left and right centred sums are negatives of each other
                gain = sl * sl / wl + sl * sl / wr
                # relative margin: gains equal up to rounding count as ties
                if gain > best_gain * (1.0 + 1e-10):
                    best_gain = gain
                    best_f = f
                    thr = 0.5 * (x_lo + x_hi)
                    if thr >= x_hi:
                        thr = x_lo
                    best_thr = thr
        if best_f < 0:
            continue

        # stable partition of idx[start:end]
        nl = 0
        for k in range(start, end):
            if x[idx[k], best_f] <= best_thr:
                nl += 1
        pl = start
        pr = start + nl
        for k in range(start, end):
            i = idx[k]
            if x[i, best_f] <= best_thr:
                tmp[pl] = i
                pl += 1
            else:
                tmp[pr] = i
                pr += 1
        for k in range(start, end):
            idx[k] = tmp[k]

        feature[node] = best_f
        threshold[node] = best_thr
        lch = n_nodes
        rch = n_nodes + 1
        n_nodes += 2
        left[node] = lch
        right[node] = rch
        # push right first so the left subtree is grown first
        stack[top, 0] = rch
        stack[top, 1] = start + nl
        stack[top, 2] = end
        stack[top, 3] = depth + 1
        top += 1
        stack[top, 0] = lch
        stack[top, 1] = start
        stack[top, 2] = start + nl
        stack[top, 3] = depth + 1
        top += 1
    return feature[:n_nodes], threshold[:n_nodes], left[:n_nodes], right[:n_nodes], value[:n_nodes]


@numba.njit(cache=True, nogil=True)
def _apply(x, feature, threshold, left, right, value):
    n = x.shape[0]
    out = np.empty(n)
    for i in range(n):
        node = 0
        while feature[node] >= 0:
            if x[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = value[node]
    return out


@dataclass(frozen=True, eq=False)
class TreeModel(Regressor):
    """Flat node arrays; ``feature == -1`` marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    n_features: int

    kind = "tree"

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def depth(self) -> int:
        best, stack = 0, [(0, 0)]
        while stack:
            node, dep = stack.pop()
            best = max(best, dep)
            if self.feature[node] != LEAF:
                stack += [(int(self.left[node]), dep + 1), (int(self.right[node]), dep + 1)]
        return best

    def _predict(self, x):
        return _apply(np.ascontiguousarray(x), self.feature, self.threshold, self.left, self.right, self.value)


def fit_tree(x, y, w=None, min_samples_split: int = 2, min_samples_leaf: int = 1,
             max_depth: int | None = None, max_features: int | None = None, seed: int = 0) -> TreeModel:
    """Grow a CART regression tree.

    ``max_features`` below the column count draws that many candidate features
    per node from a SplitMix64 stream seeded by ``seed``.
    """
    x, y, w = check_xy(x, y, w)
    d = x.shape[1]
    mf = d if max_features is None else int(min(max(1, max_features), d))
    arrays = _grow(
        np.ascontiguousarray(x),
        y,
        w,
        -1 if max_depth is None else int(max_depth),
        int(min_samples_split),
        int(min_samples_leaf),
        mf,
        np.uint64(int(seed) & 0xFFFFFFFFFFFFFFFF),
    )
    return TreeModel(*(a.copy() for a in arrays), n_features=d)
