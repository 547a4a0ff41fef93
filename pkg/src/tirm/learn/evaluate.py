"""Stratified k-fold cross-validation and evaluation metrics."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ..labeling import UndefinedKappaError, cohen_kappa
from .forest import CLASSES, CostMatrix, ForestError, ForestParams, min_cost_decision, predict_proba, to_matrix, train_forest


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f_measure: float
    support: int


@dataclass(frozen=True)
class EvalMetrics:
    n_instances: int
    accuracy: float
    kappa_statistic: float | None
    mean_absolute_error: float
    root_mean_squared_error: float
    per_class: dict[str, ClassMetrics]
    weighted_precision: float
    weighted_recall: float
    weighted_f_measure: float
    confusion_matrix: list[list[int]]  # rows actual, columns predicted

    def as_dict(self) -> dict:
        d = asdict(self)
        d["correctly_classified_pct"] = 100.0 * self.accuracy
        d["incorrectly_classified_pct"] = 100.0 * (1.0 - self.accuracy)
        return d


def compute_metrics(y_true: np.ndarray, proba: np.ndarray, y_pred: np.ndarray) -> EvalMetrics:
    """Metrics over class indices (0 Relevant, 1 NonRelevant) and the
    predicted probability rows.

    MAE and RMSE average ``|p_c - 1{c = truth}|`` over instances and both classes.
    """
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    n = len(y_true)
    confusion = np.zeros((2, 2), dtype=np.int64)
    np.add.at(confusion, (y_true, y_pred), 1)
    onehot = np.eye(2)[y_true]
    err = np.abs(proba - onehot)
    mae = float(err.mean())
    rmse = float(np.sqrt((err ** 2).mean()))

    per_class = {}
    for c, label in enumerate(CLASSES):
        tp = int(confusion[c, c])
        pred_c = int(confusion[:, c].sum())
        true_c = int(confusion[c, :].sum())
        p = tp / pred_c if pred_c else 0.0
        r = tp / true_c if true_c else 0.0
        f = 2 * p * r / (p + r) if p + r else 0.0
        per_class[label.value] = ClassMetrics(p, r, f, true_c)
    support = np.array([per_class[c.value].support for c in CLASSES], dtype=float)
    w = support / support.sum()

    def weighted(attr):
        return float(sum(wi * getattr(per_class[c.value], attr) for wi, c in zip(w, CLASSES)))

    try:
        kappa = cohen_kappa(y_true.tolist(), y_pred.tolist())
    except UndefinedKappaError:
        kappa = None
    return EvalMetrics(
        n_instances=n,
        accuracy=float(np.trace(confusion) / n),
        kappa_statistic=kappa,
        mean_absolute_error=mae,
        root_mean_squared_error=rmse,
        per_class=per_class,
        weighted_precision=weighted("precision"),
        weighted_recall=weighted("recall"),
        weighted_f_measure=weighted("f_measure"),
        confusion_matrix=confusion.tolist(),
    )


def stratified_folds(y: np.ndarray, folds: int, seed: int) -> np.ndarray:
    """Fold index per instance. Each class is shuffled and dealt round-robin,
    continuing the deal across classes so fold sizes stay balanced."""
    if folds < 2:
        raise ForestError("cross-validation needs at least 2 folds")
    rng = np.random.default_rng(seed)
    assignment = np.empty(len(y), dtype=np.int64)
    offset = 0
    for c in range(2):
        idx = np.nonzero(y == c)[0]
        if len(idx) < folds:
            raise ForestError(
                f"class {CLASSES[c].value} has {len(idx)} instances, fewer than {folds} folds; "
                "use fewer folds"
            )
        idx = idx[rng.permutation(len(idx))]
        assignment[idx] = (np.arange(len(idx)) + offset) % folds
        offset = (offset + len(idx)) % folds
    return assignment


def cross_validate(data, folds: int = 10, params: ForestParams | None = None,
                   cost: CostMatrix | None = None, seed: int = 0, jobs: int = 1) -> EvalMetrics:
    """Pooled out-of-fold predictions from stratified ``folds``-fold CV."""
    data = list(data)
    cost = cost or CostMatrix()
    X, y = to_matrix(data)
    assignment = stratified_folds(y, folds, seed)
    proba = np.zeros((len(y), 2))
    fold_seeds = np.random.SeedSequence(seed).generate_state(folds)
    for k in range(folds):
        test = assignment == k
        train = [data[i] for i in np.nonzero(~test)[0]]
        model = train_forest(train, params, cost, int(fold_seeds[k]), jobs=jobs)
        proba[test] = predict_proba(model, X[test])
    y_pred = min_cost_decision(proba, cost)
    return compute_metrics(y, proba, y_pred)


def evaluate(model, data) -> EvalMetrics:
    """Metrics of ``model`` on labeled ``(FeatureVector, Relevancy)`` pairs."""
    X, y = to_matrix(data)
    proba = predict_proba(model, X)
    return compute_metrics(y, proba, min_cost_decision(proba, model.cost))
