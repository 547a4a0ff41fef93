"""Gain-ratio feature ranking."""

from __future__ import annotations

import numpy as np

from .features import FEATURE_NAMES
from .forest import _entropy_rows, to_matrix


def _entropy(counts) -> float:
    return float(_entropy_rows(np.asarray(counts, dtype=float)[None, :])[0])


def gain_ratio(x: np.ndarray, y: np.ndarray) -> float:
    """Gain ratio of the best binary split of ``x``.

    The threshold is the midpoint that maximizes information gain (earliest
    on ties); the ratio divides that gain by the split's intrinsic information.
    Missing values are left out. A constant column scores 0.
    """
    known = ~np.isnan(x)
    xs, ys = x[known], y[known]
    if len(xs) < 2:
        return 0.0
    order = np.argsort(xs, kind="stable")
    xs, ys = xs[order], ys[order]
    cut = np.nonzero(xs[:-1] < xs[1:])[0]
    if len(cut) == 0:
        return 0.0
    n = len(xs)
    ones = np.cumsum(ys)
    n_left = cut + 1
    left = np.column_stack([n_left - ones[cut], ones[cut]])
    total = np.array([n - ones[-1], ones[-1]], dtype=float)
    right = total - left
    info = (n_left * _entropy_rows(left) + (n - n_left) * _entropy_rows(right)) / n
    gains = _entropy(total) - info
    b = int(np.argmax(gains))
    split_info = _entropy([n_left[b], n - n_left[b]])
    if split_info <= 0:
        return 0.0
    return float(max(gains[b], 0.0) / split_info)


def gain_ratio_rank(data, names=FEATURE_NAMES) -> list[tuple[str, float]]:
    """Rank features by gain ratio, highest first (ties keep schema order).

    ``data`` is either ``(FeatureVector, Relevancy)`` pairs or an ``(X, y)``
    tuple of arrays with class indices in ``y``.
    """
    if isinstance(data, tuple) and len(data) == 2 and isinstance(data[0], np.ndarray):
        X, y = data
    else:
        X, y = to_matrix(data)
    if len(np.unique(y)) < 2:
        raise ValueError("gain-ratio ranking needs both classes present")
    scores = [(names[j], gain_ratio(X[:, j], y)) for j in range(X.shape[1])]
    return sorted(scores, key=lambda s: -s[1])
