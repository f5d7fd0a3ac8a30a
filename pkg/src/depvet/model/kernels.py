"""Split-search kernels for decision tree growth.

Two interchangeable implementations of the Gini best-split search: a numba
@njit kernel and a pure-numpy fallback. Selection: the numpy path is forced
when the DEPVET_NO_NUMBA environment variable is set (any non-empty value)
or when numba is unavailable. Both paths evaluate the identical arithmetic
expression on integer class counts, so they agree bit-for-bit.
"""

from __future__ import annotations

import os

import numpy as np

_FORCE_NUMPY = bool(os.environ.get("DEPVET_NO_NUMBA"))

try:
    if _FORCE_NUMPY:
        raise ImportError("numba disabled via DEPVET_NO_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False


def _best_split_numpy(X, y, feat_ids):
    """Best (feature, threshold) by weighted Gini over candidate features.

    X: (n, p) float64; y: (n,) float64 in {0, 1}; feat_ids: candidate columns.
    Returns (feature, threshold, score); feature == -1 when no valid split.
    """
    n = len(y)
    total1 = float(y.sum())
    total0 = n - total1
    best_feat = -1
    best_thr = 0.0
    best_score = np.inf
    for f in feat_ids:
        col = X[:, f]
        order = np.argsort(col, kind="mergesort")
        sv = col[order]
        ys = y[order]
        cum1 = np.cumsum(ys)
        valid = sv[:-1] < sv[1:]
        if not valid.any():
            continue
        pos = np.nonzero(valid)[0]
        nl = (pos + 1).astype(np.float64)
        nr = n - nl
        al = cum1[pos]
        bl = nl - al
        ar = total1 - al
        br = total0 - bl
        score = (nl - (al * al + bl * bl) / nl) + (nr - (ar * ar + br * br) / nr)
        k = int(np.argmin(score))
        if score[k] < best_score:
            best_score = float(score[k])
            best_feat = int(f)
            best_thr = float((sv[pos[k]] + sv[pos[k] + 1]) / 2.0)
    return best_feat, best_thr, best_score


if HAVE_NUMBA:

    @njit(cache=True)
    def _best_split_numba(X, y, feat_ids):  # pragma: no cover - mirrored by numpy path
        n = len(y)
        total1 = 0.0
        for i in range(n):
            total1 += y[i]
        total0 = n - total1
        best_feat = -1
        best_thr = 0.0
        best_score = np.inf
        for fi in range(len(feat_ids)):
            f = feat_ids[fi]
            col = X[:, f]
            order = np.argsort(col, kind="mergesort")
            a1 = 0.0
            local_best = np.inf
            local_thr = 0.0
            for i in range(n - 1):
                a1 += y[order[i]]
                lo = col[order[i]]
                hi = col[order[i + 1]]
                if lo >= hi:
                    continue
                nl = float(i + 1)
                nr = float(n - i - 1)
                al = a1
                bl = nl - al
                ar = total1 - al
                br = total0 - bl
                score = (nl - (al * al + bl * bl) / nl) + \
                        (nr - (ar * ar + br * br) / nr)
                if score < local_best:
                    local_best = score
                    local_thr = (lo + hi) / 2.0
            if local_best < best_score:
                best_score = local_best
                best_feat = f
                best_thr = local_thr
        return best_feat, best_thr, best_score


def best_split(X, y, feat_ids):
    """Dispatch to the active kernel."""
    if HAVE_NUMBA:
        return _best_split_numba(X, y, np.asarray(feat_ids, dtype=np.int64))
    return _best_split_numpy(X, y, np.asarray(feat_ids, dtype=np.int64))


def kernel_name() -> str:
    return "numba" if HAVE_NUMBA else "numpy"
