import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tirm.core import Relevancy
from tirm.learn.evaluate import compute_metrics, cross_validate, evaluate, stratified_folds
from tirm.learn.features import N_FEATURES, FeatureVector
from tirm.learn.forest import CostMatrix, ForestError, ForestParams, train_forest

REL, NON = Relevancy.RELEVANT, Relevancy.NON_RELEVANT


def separable(n, seed, informative=8):
    rng = np.random.default_rng(seed)
    data = []
    for i in range(n):
        x = rng.normal(size=N_FEATURES)
        sign = 1.0 if i % 2 == 0 else -1.0
        x[:informative] = sign * rng.uniform(0.5, 2.0, size=informative)
        data.append((FeatureVector(tuple(float(a) for a in x)), REL if sign > 0 else NON))
    return data


def test_compute_metrics_by_hand():
    y = np.array([0, 0, 0, 1])
    proba = np.array([[0.9, 0.1], [0.6, 0.4], [0.2, 0.8], [0.3, 0.7]])
    pred = np.array([0, 0, 1, 1])
    m = compute_metrics(y, proba, pred)
    assert m.confusion_matrix == [[2, 1], [0, 1]]
    assert m.accuracy == 0.75
    errs = [0.1, 0.1, 0.4, 0.4, 0.8, 0.8, 0.3, 0.3]
    assert m.mean_absolute_error == pytest.approx(sum(errs) / 8)
    assert m.root_mean_squared_error == pytest.approx(math.sqrt(sum(e * e for e in errs) / 8))
    assert m.per_class["Relevant"].precision == 1.0 and m.per_class["Relevant"].recall == pytest.approx(2 / 3)
    assert m.per_class["NonRelevant"].precision == 0.5 and m.per_class["NonRelevant"].recall == 1.0
    f_r, f_n = 0.8, 2 / 3
    assert m.weighted_f_measure == pytest.approx(0.75 * f_r + 0.25 * f_n)
    assert m.kappa_statistic == pytest.approx(0.5)


def test_as_dict_has_report_fields():
    m = compute_metrics(np.array([0, 1]), np.array([[1.0, 0.0], [0.0, 1.0]]), np.array([0, 1]))
    d = m.as_dict()
    for key in ("accuracy", "kappa_statistic", "mean_absolute_error", "root_mean_squared_error", "per_class",
                "weighted_precision", "weighted_recall", "weighted_f_measure", "confusion_matrix",
                "correctly_classified_pct", "incorrectly_classified_pct"):
        assert key in d


def test_constant_predictor_kappa_zero():
    y = np.array([0] * 9 + [1])
    m = compute_metrics(y, np.tile([1.0, 0.0], (10, 1)), np.zeros(10, dtype=int))
    assert m.kappa_statistic == pytest.approx(0.0)
    m = compute_metrics(np.zeros(5, dtype=int), np.tile([1.0, 0.0], (5, 1)), np.zeros(5, dtype=int))
    assert m.kappa_statistic is None  # chance agreement is 1


@given(st.lists(st.tuples(st.floats(0, 1), st.integers(0, 1), st.integers(0, 1)), min_size=1, max_size=40))
def test_metric_invariants(rows):
    p = np.array([[r[0], 1 - r[0]] for r in rows])
    y = np.array([r[1] for r in rows])
    pred = np.array([r[2] for r in rows])
    m = compute_metrics(y, p, pred)
    assert m.mean_absolute_error <= m.root_mean_squared_error + 1e-12
    assert sum(map(sum, m.confusion_matrix)) == len(rows)
    assert 0.0 <= m.accuracy <= 1.0


def test_stratified_folds_balanced():
    y = np.array([0] * 37 + [1] * 13)
    a = stratified_folds(y, 5, seed=1)
    sizes = np.bincount(a, minlength=5)
    assert sizes.max() - sizes.min() <= 1
    for k in range(5):
        assert set(y[a == k]) == {0, 1}
    assert (stratified_folds(y, 5, seed=1) == a).all()


def test_stratified_folds_too_few():
    with pytest.raises(ForestError, match="fewer folds"):
        stratified_folds(np.array([0] * 20 + [1] * 3), 5, seed=0)
    with pytest.raises(ForestError):
        stratified_folds(np.array([0, 1] * 5), 1, seed=0)


def test_cross_validate_separable():
    m = cross_validate(separable(120, 0), folds=5, params=ForestParams(n_trees=30), seed=7)
    assert m.accuracy >= 0.95 and m.kappa_statistic >= 0.9
    assert m.n_instances == 120


def test_cross_validate_deterministic():
    data = separable(60, 1)
    a = cross_validate(data, folds=3, params=ForestParams(n_trees=10), seed=5)
    b = cross_validate(data, folds=3, params=ForestParams(n_trees=10), seed=5)
    assert a == b


def test_random_labels_near_majority_rate():
    rng = np.random.default_rng(0)
    accs, rates = [], []
    for seed in range(10):
        X = rng.normal(size=(100, N_FEATURES))
        y = rng.random(100) < 0.7
        data = [(FeatureVector(tuple(map(float, x))), REL if r else NON) for x, r in zip(X, y)]
        m = cross_validate(data, folds=5, params=ForestParams(n_trees=15), seed=seed)
        accs.append(m.accuracy)
        rates.append(max(y.mean(), 1 - y.mean()))
    assert abs(np.mean(accs) - np.mean(rates)) <= 0.1


def test_evaluate_model():
    data = separable(40, 3)
    model = train_forest(data, ForestParams(n_trees=10), CostMatrix.unit(), seed=2)
    m = evaluate(model, data)
    assert m.accuracy == 1.0
