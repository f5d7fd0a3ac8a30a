"""Permutation importance and partial-dependence / ICE curves."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .forest import Forest, ModelError
from .metrics import roc_auc


@dataclass(frozen=True)
class ImportanceResult:
    feature: str
    mean_drop: float
    std_drop: float


def permutation_importance(f: Forest, X, y, repeats: int = 10, seed: int = 0):
    """AUC drop when each feature column is shuffled, averaged over repeats."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if len(X) == 0:
        raise ModelError("empty evaluation set")
    base = roc_auc(f.predict_proba(X), y)
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed,
                                                       spawn_key=(0x1337,)))
    results = []
    for j in range(f.n_features):
        drops = []
        for _ in range(repeats):
            perm = rng.permutation(len(X))
            Xp = X.copy()
            Xp[:, j] = X[perm, j]
            drops.append(base - roc_auc(f.predict_proba(Xp), y))
        drops = np.asarray(drops)
        results.append(ImportanceResult(
            feature=f.feature_names[j],
            mean_drop=float(drops.mean()),
            std_drop=float(drops.std()),
        ))
    return base, results


@dataclass
class PdpCurve:
    feature: str
    feature_index: int
    grid: list
    mean_probability: list
    ice_traces: list = field(default_factory=list)  # optional per-instance rows


def decile_grid(values: np.ndarray) -> np.ndarray:
    """Strictly increasing grid at the deciles of the feature distribution."""
    qs = np.percentile(values, np.arange(0, 101, 10))
    return np.unique(qs)


def partial_dependence(f: Forest, X, feature: int, grid=None,
                       with_ice: bool = False, ice_samples: int = 20,
                       seed: int = 0) -> PdpCurve:
    """Mean predicted fast-probability with one feature overridden."""
    X = np.asarray(X, dtype=np.float64)
    if len(X) == 0:
        raise ModelError("empty data")
    if grid is None:
        grid = decile_grid(X[:, feature])
    grid = np.asarray(grid, dtype=np.float64)
    if np.any(np.diff(grid) <= 0):
        raise ModelError("grid must be strictly increasing")
    probs = np.empty((len(grid), len(X)), dtype=np.float64)
    for gi, value in enumerate(grid):
        Xg = X.copy()
        Xg[:, feature] = value
        probs[gi] = f.predict_proba(Xg)
    curve = PdpCurve(
        feature=f.feature_names[feature],
        feature_index=feature,
        grid=grid.tolist(),
        mean_probability=probs.mean(axis=1).tolist(),
    )
    if with_ice:
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed,
                                                           spawn_key=(0x1CE,)))
        count = min(ice_samples, len(X))
        chosen = np.sort(rng.choice(len(X), size=count, replace=False))
        curve.ice_traces = [probs[:, i].tolist() for i in chosen]
    return curve
