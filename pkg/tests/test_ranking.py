import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tirm.core import Relevancy
from tirm.learn.features import FEATURE_NAMES, N_FEATURES, FeatureVector
from tirm.learn.ranking import gain_ratio, gain_ratio_rank


def H(counts):
    t = sum(counts)
    return -sum(c / t * math.log2(c / t) for c in counts if c)


def gr_oracle(x, y):
    """Exhaustive thresholds: choose the split of highest gain (earliest on ties),
    report gain / split information."""
    pairs = [(a, b) for a, b in zip(x, y) if not math.isnan(a)]
    vals = sorted({a for a, _ in pairs})
    n = len(pairs)
    best = None
    for lo, hi in zip(vals, vals[1:]):
        thr = (lo + hi) / 2
        left = [b for a, b in pairs if a <= thr]
        right = [b for a, b in pairs if a > thr]
        gain = H([sum(1 for _, b in pairs if b == c) for c in (0, 1)]) - (
            len(left) * H([left.count(0), left.count(1)]) + len(right) * H([right.count(0), right.count(1)])) / n
        if best is None or gain > best[0] + 1e-12:
            best = (gain, H([len(left), len(right)]))
    if best is None or best[1] == 0:
        return 0.0
    return max(best[0], 0.0) / best[1]


def test_label_copy_scores_one():
    y = np.array([0, 1] * 20)
    assert gain_ratio(y.astype(float), y) == pytest.approx(1.0, abs=1e-9)


def test_constant_scores_zero():
    assert gain_ratio(np.ones(10), np.array([0, 1] * 5)) == 0.0
    assert gain_ratio(np.full(4, np.nan), np.array([0, 1, 0, 1])) == 0.0


def test_label_copy_ranks_first():
    rng = np.random.default_rng(1)
    y = np.array([0, 1] * 30)
    X = rng.normal(size=(60, N_FEATURES))
    X[:, 5] = y
    X[:, 7] = 3.0
    ranking = gain_ratio_rank((X, y))
    assert ranking[0] == (FEATURE_NAMES[5], pytest.approx(1.0, abs=1e-9))
    assert dict(ranking)[FEATURE_NAMES[7]] == 0.0
    assert [g for _, g in ranking] == sorted((g for _, g in ranking), reverse=True)


def test_rank_accepts_labeled_vectors():
    data = [(FeatureVector(tuple([float(i % 2)] + [0.0] * 38)), Relevancy.NON_RELEVANT if i % 2 else Relevancy.RELEVANT)
            for i in range(10)]
    assert gain_ratio_rank(data)[0][0] == FEATURE_NAMES[0]


def test_single_class_rejected():
    with pytest.raises(ValueError):
        gain_ratio_rank((np.zeros((4, 39)), np.zeros(4, dtype=int)))


def test_three_feature_ranking_matches_oracle():
    rng = np.random.default_rng(12)
    for _ in range(30):
        y = rng.integers(0, 2, size=25)
        if len(set(y)) < 2:
            continue
        X = np.column_stack([
            y + rng.normal(scale=0.8, size=25),
            rng.integers(0, 4, size=25).astype(float),
            np.where(rng.random(25) < 0.2, np.nan, rng.normal(size=25)),
        ])
        names = ("a", "b", "c")
        got = gain_ratio_rank((X, y), names)
        ref = sorted(((nm, gr_oracle(X[:, j], y)) for j, nm in enumerate(names)), key=lambda t: -t[1])
        assert [g for _, g in got] == pytest.approx([g for _, g in ref], abs=1e-9)
        assert [nm for nm, _ in got] == [nm for nm, _ in ref]


@given(st.lists(st.tuples(st.integers(0, 5).map(float), st.integers(0, 1)), min_size=2, max_size=30))
def test_gain_ratio_matches_oracle(rows):
    x = np.array([r[0] for r in rows])
    y = np.array([r[1] for r in rows])
    assert gain_ratio(x, y) == pytest.approx(gr_oracle(x, y), abs=1e-9)
    assert 0.0 <= gain_ratio(x, y) <= 1.0 + 1e-9
