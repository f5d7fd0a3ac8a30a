"""Bagged decision-tree classifier over the package feature vectors.

Trees split on Gini impurity among a random subset of features; growth
stops when a node is pure or smaller than min_samples_split. Per-tree
randomness is derived from (master seed, tree index) so training is
reproducible and order-independent.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .kernels import best_split

FORMAT_NAME = "depvet-forest"
FORMAT_VERSION = 1


class ModelError(ValueError):
    pass


@dataclass
class ForestParams:
    n_trees: int = 1000
    min_samples_split: int = 8
    max_features: int | None = None  # None -> ceil(sqrt(p))

    def resolve_max_features(self, p: int) -> int:
        if self.max_features is not None:
            return max(1, min(self.max_features, p))
        return max(1, min(int(math.ceil(math.sqrt(p))), p))

    def to_dict(self) -> dict:
        return {
            "n_trees": self.n_trees,
            "min_samples_split": self.min_samples_split,
            "max_features": self.max_features,
        }


@dataclass
class Tree:
    """Flat array representation; children == -1 marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    prob_fast: np.ndarray  # class-1 probability at each node

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        n = X.shape[0]
        node = np.zeros(n, dtype=np.int64)
        active = self.feature[node] >= 0
        while active.any():
            idx = np.nonzero(active)[0]
            cur = node[idx]
            go_left = X[idx, self.feature[cur]] <= self.threshold[cur]
            node[idx] = np.where(go_left, self.left[cur], self.right[cur])
            active = self.feature[node] >= 0
        return self.prob_fast[node]


@dataclass
class Forest:
    params: ForestParams
    seed: int
    n_features: int
    feature_names: tuple
    trees: list = field(default_factory=list)

    def predict_proba(self, X) -> np.ndarray:
        """Probability of the fast class: mean of per-tree leaf probabilities."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        if X.shape[1] != self.n_features:
            raise ModelError(
                f"expected {self.n_features} features, got {X.shape[1]}")
        acc = np.zeros(X.shape[0], dtype=np.float64)
        for tree in self.trees:
            acc += tree.predict_proba(X)
        return acc / len(self.trees)

    def predict(self, X, threshold: float = 0.5) -> np.ndarray:
        return (self.predict_proba(X) >= threshold).astype(np.int64)


class _TreeBuilder:
    def __init__(self, X, y, max_features, min_samples_split, rng):
        self.X = X
        self.y = y
        self.max_features = max_features
        self.min_samples_split = min_samples_split
        self.rng = rng
        self.feature: list = []
        self.threshold: list = []
        self.left: list = []
        self.right: list = []
        self.prob: list = []

    def _new_node(self) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.prob.append(0.0)
        return len(self.feature) - 1

    def build(self, idx) -> int:
        node = self._new_node()
        y_node = self.y[idx]
        p1 = float(y_node.mean())
        self.prob[node] = p1
        if len(idx) < self.min_samples_split or p1 == 0.0 or p1 == 1.0:
            return node
        n_feat = self.X.shape[1]
        cand = self.rng.choice(n_feat, size=self.max_features, replace=False)
        cand = np.sort(cand)
        feat, thr, score = best_split(
            np.ascontiguousarray(self.X[idx]), y_node, cand)
        if feat < 0 or not np.isfinite(score):
            return node
        go_left = self.X[idx, feat] <= thr
        left_idx = idx[go_left]
        right_idx = idx[~go_left]
        if len(left_idx) == 0 or len(right_idx) == 0:
            return node
        self.feature[node] = int(feat)
        self.threshold[node] = float(thr)
        self.left[node] = self.build(left_idx)
        self.right[node] = self.build(right_idx)
        return node

    def finish(self) -> Tree:
        return Tree(
            feature=np.asarray(self.feature, dtype=np.int64),
            threshold=np.asarray(self.threshold, dtype=np.float64),
            left=np.asarray(self.left, dtype=np.int64),
            right=np.asarray(self.right, dtype=np.int64),
            prob_fast=np.asarray(self.prob, dtype=np.float64),
        )


def _tree_rng(master_seed: int, tree_index: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(entropy=master_seed, spawn_key=(tree_index,)))


def train_forest(X, y, params: ForestParams | None = None, seed: int = 0,
                 feature_names=()) -> Forest:
    """Fit a bagged Gini forest. y must contain both classes."""
    X = np.ascontiguousarray(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or len(X) != len(y):
        raise ModelError("X must be 2-d and aligned with y")
    if len(y) < 2:
        raise ModelError("need at least two samples")
    classes = np.unique(y)
    if not np.array_equal(classes, np.array([0.0, 1.0])):
        if len(classes) == 1:
            raise ModelError("training data holds a single class")
        raise ModelError("labels must be binary 0/1")
    params = params or ForestParams()
    n, p = X.shape
    max_features = params.resolve_max_features(p)
    forest = Forest(params=params, seed=seed, n_features=p,
                    feature_names=tuple(feature_names) or
                    tuple(f"f{i}" for i in range(p)))
    import sys

    old_limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old_limit, n * 4 + 1000))
    try:
        for t in range(params.n_trees):
            rng = _tree_rng(seed, t)
            boot = rng.integers(0, n, size=n)
            builder = _TreeBuilder(X, y, max_features,
                                   params.min_samples_split, rng)
            builder.build(np.asarray(boot, dtype=np.int64))
            forest.trees.append(builder.finish())
    finally:
        sys.setrecursionlimit(old_limit)
    return forest


# --- serialization ----------------------------------------------------------


def save_forest(f: Forest, path) -> None:
    doc = {
        "format": FORMAT_NAME,
        "format_version": FORMAT_VERSION,
        "params": f.params.to_dict(),
        "seed": f.seed,
        "n_features": f.n_features,
        "feature_names": list(f.feature_names),
        "trees": [
            {
                "feature": t.feature.tolist(),
                "threshold": t.threshold.tolist(),
                "left": t.left.tolist(),
                "right": t.right.tolist(),
                "prob_fast": t.prob_fast.tolist(),
            }
            for t in f.trees
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def load_forest(path) -> Forest:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format") != FORMAT_NAME:
        raise ModelError(f"not a {FORMAT_NAME} file: {path}")
    if doc.get("format_version") != FORMAT_VERSION:
        raise ModelError(f"unsupported format version {doc.get('format_version')}")
    params = ForestParams(**doc["params"])
    forest = Forest(params=params, seed=doc["seed"],
                    n_features=doc["n_features"],
                    feature_names=tuple(doc["feature_names"]))
    for t in doc["trees"]:
        forest.trees.append(Tree(
            feature=np.asarray(t["feature"], dtype=np.int64),
            threshold=np.asarray(t["threshold"], dtype=np.float64),
            left=np.asarray(t["left"], dtype=np.int64),
            right=np.asarray(t["right"], dtype=np.int64),
            prob_fast=np.asarray(t["prob_fast"], dtype=np.float64),
        ))
    return forest
