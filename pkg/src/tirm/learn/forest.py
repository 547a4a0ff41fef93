"""Cost-sensitive random forest with entropy splits, written against numpy.

Class index 0 is Relevant, index 1 is NonRelevant throughout.
"""

from __future__ import annotations

import json
import math
import sys
from contextlib import contextmanager
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from ..core import Relevancy, TirmError, model_envelope, open_envelope
from .features import FEATURE_NAMES, N_FEATURES, SCHEMA_VERSION, FeatureVector

CLASSES = (Relevancy.RELEVANT, Relevancy.NON_RELEVANT)
CLASS_INDEX = {c: i for i, c in enumerate(CLASSES)}
LEAF = -1
_MIN_GAIN = 1e-12


class ForestError(TirmError):
    pass


class SchemaMismatchError(ForestError):
    pass


@contextmanager
def _deep_recursion(limit: int = 20000):
    # unlimited-depth trees are stored as nested records
    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, limit))
    try:
        yield
    finally:
        sys.setrecursionlimit(old)


@dataclass(frozen=True)
class CostMatrix:
    """``cost[actual][predicted]`` over (Relevant, NonRelevant)."""

    cost: tuple[tuple[float, float], tuple[float, float]] = ((0.0, 5.0), (1.0, 0.0))

    def __post_init__(self):
        c = self.cost
        if c[0][0] != 0 or c[1][1] != 0:
            raise ForestError("cost matrix diagonal must be zero")
        if min(c[0][1], c[1][0]) < 0 or max(c[0][1], c[1][0]) <= 0:
            raise ForestError("off-diagonal costs must be >= 0 with at least one > 0")

    @classmethod
    def from_costs(cls, relevant_as_nonrelevant: float, nonrelevant_as_relevant: float) -> "CostMatrix":
        return cls(((0.0, float(relevant_as_nonrelevant)), (float(nonrelevant_as_relevant), 0.0)))

    @classmethod
    def unit(cls) -> "CostMatrix":
        return cls.from_costs(1.0, 1.0)

    def scaled(self, factor: float) -> "CostMatrix":
        return CostMatrix.from_costs(self.cost[0][1] * factor, self.cost[1][0] * factor)

    def as_array(self) -> np.ndarray:
        return np.array(self.cost, dtype=float)


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 100
    mtry: int = int(math.floor(math.sqrt(N_FEATURES)))
    max_depth: Optional[int] = None
    min_leaf: int = 1

    def __post_init__(self):
        if self.n_trees < 1 or self.mtry < 1 or self.min_leaf < 1:
            raise ForestError(f"invalid forest parameters {self}")


@dataclass
class Tree:
    """Flat array form. Internal nodes have ``feature >= 0``; every node keeps
    its training class histogram."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    missing_left: np.ndarray
    counts: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def leaf_distributions(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(len(X), dtype=np.int64)
        rows = np.arange(len(X))
        active = self.feature[node] != LEAF
        while active.any():
            idx = rows[active]
            n = node[idx]
            f = self.feature[n]
            x = X[idx, f]
            go_left = np.where(np.isnan(x), self.missing_left[n], x <= self.threshold[n])
            node[idx] = np.where(go_left, self.left[n], self.right[n])
            active = self.feature[node] != LEAF
        c = self.counts[node]
        return c / c.sum(axis=1, keepdims=True)

    def to_dict(self, i: int = 0) -> dict:
        counts = [int(x) for x in self.counts[i]]
        if self.feature[i] == LEAF:
            return {"counts": counts}
        return {
            "feature": int(self.feature[i]),
            "threshold": float(self.threshold[i]),
            "missing_left": bool(self.missing_left[i]),
            "counts": counts,
            "left": self.to_dict(int(self.left[i])),
            "right": self.to_dict(int(self.right[i])),
        }

    @classmethod
    def from_dict(cls, root: dict) -> "Tree":
        feature, threshold, left, right, miss, counts = [], [], [], [], [], []

        def add(node: dict) -> int:
            i = len(feature)
            feature.append(node.get("feature", LEAF))
            threshold.append(node.get("threshold", 0.0))
            left.append(-1)
            right.append(-1)
            miss.append(node.get("missing_left", False))
            counts.append(node["counts"])
            if feature[i] != LEAF:
                if not 0 <= feature[i] < N_FEATURES:
                    raise ForestError(f"node references invalid feature {feature[i]}")
                left[i] = add(node["left"])
                right[i] = add(node["right"])
            elif sum(node["counts"]) <= 0:
                raise ForestError("leaf with empty class histogram")
            return i

        add(root)
        return cls(
            np.array(feature, dtype=np.int64), np.array(threshold, dtype=float),
            np.array(left, dtype=np.int64), np.array(right, dtype=np.int64),
            np.array(miss, dtype=bool), np.array(counts, dtype=float),
        )


@dataclass
class ForestModel:
    trees: list[Tree]
    params: ForestParams
    seed: int
    cost: CostMatrix
    schema: str = SCHEMA_VERSION
    feature_names: Sequence[str] = field(default_factory=tuple)
    # free-form training context (input file digest, instance count); no timestamps
    provenance: dict = field(default_factory=dict)

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    def to_dict(self) -> dict:
        return model_envelope("forest", 1, {
            "schema": self.schema,
            "feature_names": list(self.feature_names),
            "params": {"n_trees": self.params.n_trees, "mtry": self.params.mtry,
                       "max_depth": self.params.max_depth, "min_leaf": self.params.min_leaf},
            "seed": self.seed,
            "cost": [list(r) for r in self.cost.cost],
            "classes": [c.value for c in CLASSES],
            "trees": [t.to_dict() for t in self.trees],
            "provenance": dict(self.provenance),
        })

    @classmethod
    def from_dict(cls, doc: dict) -> "ForestModel":
        body = open_envelope(doc, "forest", 1)
        c = body["cost"]
        return cls(
            trees=[Tree.from_dict(t) for t in body["trees"]],
            params=ForestParams(**body["params"]),
            seed=int(body["seed"]),
            cost=CostMatrix(((float(c[0][0]), float(c[0][1])), (float(c[1][0]), float(c[1][1])))),
            schema=body["schema"],
            feature_names=tuple(body.get("feature_names", ())),
            provenance=dict(body.get("provenance", {})),
        )

    def dumps(self) -> str:
        with _deep_recursion():
            return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":")) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "ForestModel":
        text = Path(path).read_text(encoding="utf-8")
        with _deep_recursion():
            return cls.from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# training


def _entropy_rows(counts: np.ndarray) -> np.ndarray:
    """Entropy in bits of each row of a (k, 2) count array."""
    total = counts.sum(axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(total > 0, counts / total, 0.0)
        logs = np.where(p > 0, np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return -(p * logs).sum(axis=1)


def _entropy2(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Elementwise entropy in bits of two-class counts ``a``, ``b``."""
    t = a + b
    out = np.zeros(np.broadcast(a, b).shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        for c in (a, b):
            p = np.where(t > 0, c / np.where(t > 0, t, 1), 0.0)
            out -= np.where(p > 0, p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return out


def column_splits(Xs: np.ndarray, y: np.ndarray, min_leaf: int = 1):
    """Best midpoint split of every column of ``Xs`` by information gain.

    Missing values (NaN) are left out and each gain is scaled by the
    column's fraction of known values. Returns per-column arrays
    ``(gain, threshold, n_left, n_right)``; columns without a valid split get
    gain ``-inf``.
    """
    n, m = Xs.shape
    order = np.argsort(Xs, axis=0, kind="stable")  # NaN sorts last
    xs = np.take_along_axis(Xs, order, axis=0)
    known = ~np.isnan(xs)
    n_known = known.sum(axis=0)
    ones = np.cumsum(np.where(known, y[order], 0), axis=0)
    total1 = ones[-1]
    n_left = np.arange(1, n)[:, None]
    n_right = n_known - n_left
    with np.errstate(invalid="ignore"):
        valid = (xs[:-1] < xs[1:]) & (n_left >= min_leaf) & (n_right >= min_leaf)
    l1 = ones[:-1]
    r1 = total1 - l1
    parent = _entropy2(n_known - total1, total1)
    safe_known = np.maximum(n_known, 1)
    child = (n_left * _entropy2(n_left - l1, l1) + n_right * _entropy2(n_right - r1, r1)) / safe_known
    gain = np.where(valid, (parent - child) * (n_known / n), -np.inf)
    b = np.argmax(gain, axis=0)
    cols = np.arange(m)
    lo, hi = xs[b, cols], xs[np.minimum(b + 1, n - 1), cols]
    thr = (lo + hi) / 2.0
    thr = np.where(thr >= hi, lo, thr)  # adjacent floats
    nl = b + 1
    return gain[b, cols], thr, nl, n_known - nl


def best_threshold(x: np.ndarray, y: np.ndarray):
    """Single-column form of :func:`column_splits`; ``None`` if no split exists."""
    g, t, nl, nr = column_splits(np.asarray(x, dtype=float)[:, None], np.asarray(y))
    if not np.isfinite(g[0]):
        return None
    return float(g[0]), float(t[0]), int(nl[0]), int(nr[0])


def _grow_tree(X: np.ndarray, y: np.ndarray, params: ForestParams, rng: np.random.Generator) -> Tree:
    feature, threshold, left, right, miss, counts = [], [], [], [], [], []

    def new_node(idx: np.ndarray) -> int:
        ny = y[idx]
        n_nr = int(ny.sum())
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        miss.append(False)
        counts.append((len(ny) - n_nr, n_nr))
        return len(feature) - 1

    root = new_node(np.arange(len(y)))
    stack = [(root, np.arange(len(y)), 0)]
    while stack:
        node, idx, depth = stack.pop()
        c = counts[node]
        if c[0] == 0 or c[1] == 0 or len(idx) < 2 * params.min_leaf:
            continue
        if params.max_depth is not None and depth >= params.max_depth:
            continue
        perm = rng.permutation(X.shape[1])
        best = None
        # the random subset first; the remaining features only if it offers no gain
        for group in (perm[:params.mtry], perm[params.mtry:]):
            if len(group) == 0:
                continue
            gain, thr, nl, nr = column_splits(X[np.ix_(idx, group)], y[idx], params.min_leaf)
            j = int(np.argmax(gain))
            if gain[j] > _MIN_GAIN:
                best = (int(group[j]), float(thr[j]), bool(nl[j] >= nr[j]))
                break
        if best is None:
            continue
        f, thr, missing_left = best
        x = X[idx, f]
        go_left = np.where(np.isnan(x), missing_left, x <= thr)
        li, ri = idx[go_left], idx[~go_left]
        if len(li) == 0 or len(ri) == 0:
            continue
        feature[node], threshold[node], miss[node] = f, thr, missing_left
        left[node] = new_node(li)
        right[node] = new_node(ri)
        stack.append((right[node], ri, depth + 1))
        stack.append((left[node], li, depth + 1))

    return Tree(
        np.array(feature, dtype=np.int64), np.array(threshold, dtype=float),
        np.array(left, dtype=np.int64), np.array(right, dtype=np.int64),
        np.array(miss, dtype=bool), np.array(counts, dtype=float),
    )


def _train_one(args) -> Tree:
    X, y, params, seed_seq = args
    rng = np.random.default_rng(seed_seq)
    boot = rng.integers(0, len(y), size=len(y))
    return _grow_tree(X[boot], y[boot], params, rng)


def to_matrix(data) -> tuple[np.ndarray, np.ndarray]:
    """Stack ``(FeatureVector, Relevancy)`` pairs into ``X`` (NaN = missing) and ``y``."""
    data = list(data)
    if not data:
        return np.empty((0, N_FEATURES)), np.empty(0, dtype=np.int64)
    X = np.vstack([fv.as_array() for fv, _ in data])
    y = np.array([CLASS_INDEX[Relevancy(lab)] for _, lab in data], dtype=np.int64)
    return X, y


def train_forest(data, params: ForestParams | None = None, cost: CostMatrix | None = None,
                 seed: int = 0, jobs: int = 1) -> ForestModel:
    """Bagged entropy trees over ``(FeatureVector, Relevancy)`` pairs.

    Each tree gets its own child seed, so the model does not depend on ``jobs``.
    """
    params = params or ForestParams()
    cost = cost or CostMatrix()
    data = list(data)
    for fv, _ in data:
        if fv.schema != SCHEMA_VERSION:
            raise SchemaMismatchError(f"feature schema {fv.schema!r} != {SCHEMA_VERSION!r}")
    X, y = to_matrix(data)
    per_class = np.bincount(y, minlength=2)
    if per_class.min() < 2:
        raise ForestError(
            f"training needs >= 2 instances of each class, got Relevant={per_class[0]}, "
            f"NonRelevant={per_class[1]}"
        )
    seeds = np.random.SeedSequence(seed).spawn(params.n_trees)
    tasks = [(X, y, params, s) for s in seeds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            trees = list(pool.map(_train_one, tasks))
    else:
        trees = [_train_one(t) for t in tasks]
    return ForestModel(trees, params, seed, cost, SCHEMA_VERSION, FEATURE_NAMES)


# ---------------------------------------------------------------------------
# prediction


def predict_proba(model: ForestModel, X: np.ndarray) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != N_FEATURES:
        raise SchemaMismatchError(f"expected {N_FEATURES} features, got {X.shape[1]}")
    total = np.zeros((len(X), 2))
    for tree in model.trees:
        total += tree.leaf_distributions(X)
    return total / len(model.trees)


def min_cost_decision(proba: np.ndarray, cost: CostMatrix) -> np.ndarray:
    """Class index minimizing expected cost; ties resolve to Relevant."""
    expected = np.atleast_2d(proba) @ cost.as_array()
    return np.argmin(expected, axis=1)


def predict(model: ForestModel, fv: FeatureVector) -> tuple[Relevancy, tuple[float, float]]:
    if fv.schema != model.schema:
        raise SchemaMismatchError(f"feature schema {fv.schema!r} does not match model schema {model.schema!r}")
    proba = predict_proba(model, fv.as_array()[None, :])[0]
    label = CLASSES[int(min_cost_decision(proba, model.cost)[0])]
    return label, (float(proba[0]), float(proba[1]))


def predict_many(model: ForestModel, vectors) -> list[tuple[Relevancy, tuple[float, float]]]:
    vectors = list(vectors)
    if not vectors:
        return []
    for fv in vectors:
        if fv.schema != model.schema:
            raise SchemaMismatchError(f"feature schema {fv.schema!r} does not match model schema {model.schema!r}")
    proba = predict_proba(model, np.vstack([fv.as_array() for fv in vectors]))
    labels = min_cost_decision(proba, model.cost)
    return [(CLASSES[int(k)], (float(p[0]), float(p[1]))) for k, p in zip(labels, proba)]
