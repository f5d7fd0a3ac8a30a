"""Labeling, ranking metrics and the stratified baseline."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .forest import ModelError

FAST = 1
SLOW = 0


@dataclass(frozen=True)
class LabelConfig:
    fast_below_days: float = 2.0
    slow_above_days: float = 14.0

    def __post_init__(self):
        if not self.fast_below_days < self.slow_above_days:
            raise ValueError("fast threshold must lie below the slow threshold")


def label(delay_days: float, cfg: LabelConfig | None = None):
    """fast / slow / None (dead zone); strict inequalities on both sides."""
    cfg = cfg or LabelConfig()
    if delay_days < 0:
        raise ValueError("delay must be non-negative")
    if delay_days < cfg.fast_below_days:
        return FAST
    if delay_days > cfg.slow_above_days:
        return SLOW
    return None


def roc_auc(scores, labels) -> float:
    """Rank AUC: P(random fast outranks random slow), ties count one half."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    pos = scores[labels == FAST]
    neg = scores[labels != FAST]
    if len(pos) == 0 or len(neg) == 0:
        raise ModelError("ROC-AUC needs both classes present")
    # average ranks of the combined sample
    combined = np.concatenate([pos, neg])
    order = np.argsort(combined, kind="mergesort")
    ranks = np.empty(len(combined), dtype=np.float64)
    sv = combined[order]
    i = 0
    while i < len(sv):
        j = i
        while j + 1 < len(sv) and sv[j + 1] == sv[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    r_pos = ranks[:len(pos)].sum()
    u = r_pos - len(pos) * (len(pos) + 1) / 2.0
    return float(u / (len(pos) * len(neg)))


def precision_recall_f1(pred, labels, positive=FAST):
    pred = np.asarray(pred)
    labels = np.asarray(labels)
    tp = int(np.sum((pred == positive) & (labels == positive)))
    fp = int(np.sum((pred == positive) & (labels != positive)))
    fn = int(np.sum((pred != positive) & (labels == positive)))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = (2 * precision * recall / (precision + recall)
          if precision + recall else 0.0)
    return precision, recall, f1


def stratified_baseline(labels, seed: int = 0) -> np.ndarray:
    """Random class draws with empirical class frequencies; seeded."""
    labels = np.asarray(labels)
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed,
                                                       spawn_key=(0xBA5E,)))
    p_fast = float(np.mean(labels == FAST)) if len(labels) else 0.0
    return (rng.random(len(labels)) < p_fast).astype(np.int64)


def train_test_split(X, y, test_fraction: float = 0.2, seed: int = 0):
    """Stratified, seeded shuffle split."""
    X = np.asarray(X)
    y = np.asarray(y)
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed,
                                                       spawn_key=(0x5917,)))
    test_idx = []
    train_idx = []
    for cls in np.unique(y):
        members = np.nonzero(y == cls)[0]
        members = members[rng.permutation(len(members))]
        n_test = int(round(len(members) * test_fraction))
        test_idx.extend(members[:n_test])
        train_idx.extend(members[n_test:])
    train_idx = np.sort(np.asarray(train_idx, dtype=np.int64))
    test_idx = np.sort(np.asarray(test_idx, dtype=np.int64))
    return X[train_idx], X[test_idx], y[train_idx], y[test_idx]


def kfold_indices(n: int, k: int, seed: int = 0):
    """Seeded k-fold partition; yields (train_idx, val_idx)."""
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed,
                                                       spawn_key=(0xF01D,)))
    perm = rng.permutation(n)
    folds = np.array_split(perm, k)
    for i in range(k):
        val = np.sort(folds[i])
        train = np.sort(np.concatenate([folds[j] for j in range(k) if j != i]))
        yield train, val
