"""Responder-speed classifier: labeling, forest, metrics, explanations."""

from .explain import (
    ImportanceResult,
    PdpCurve,
    decile_grid,
    partial_dependence,
    permutation_importance,
)
from .forest import (
    Forest,
    ForestParams,
    ModelError,
    Tree,
    load_forest,
    save_forest,
    train_forest,
)
from .kernels import HAVE_NUMBA, kernel_name
from .metrics import (
    FAST,
    SLOW,
    LabelConfig,
    kfold_indices,
    label,
    precision_recall_f1,
    roc_auc,
    stratified_baseline,
    train_test_split,
)

__all__ = [
    "FAST", "SLOW", "LabelConfig", "label",
    "Forest", "ForestParams", "ModelError", "Tree",
    "train_forest", "save_forest", "load_forest",
    "roc_auc", "precision_recall_f1", "stratified_baseline",
    "train_test_split", "kfold_indices",
    "permutation_importance", "partial_dependence", "decile_grid",
    "ImportanceResult", "PdpCurve",
    "HAVE_NUMBA", "kernel_name",
]
