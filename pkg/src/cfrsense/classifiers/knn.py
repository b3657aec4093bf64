"""Brute-force k-nearest-neighbour voting."""

import numpy as np
from scipy.spatial.distance import cdist

from ..errors import ModelError

_CHUNK = 256


def neighbours(train_X, query_X, k):
    """Indices of the ``k`` nearest training rows for each query row.

    Equal distances keep ascending training-row order.
    """
    out = np.empty((len(query_X), k), dtype=np.int64)
    for start in range(0, len(query_X), _CHUNK):
        d = cdist(query_X[start : start + _CHUNK], train_X, "sqeuclidean")
        out[start : start + _CHUNK] = np.argsort(d, axis=1, kind="stable")[:, :k]
    return out


def fit(X, y, k=1):
    if len(X) == 0:
        raise ModelError("k-NN needs at least one training example")
    if not 1 <= k <= len(X):
        raise ModelError(f"k={k} must lie in [1, {len(X)}]")
    return {"X": np.array(X, dtype=np.float64), "y": np.array(y, dtype=np.int64), "k": int(k)}


def predict(state, X):
    """Majority class index among neighbours; vote ties go to class 0."""
    X = np.asarray(X, dtype=np.float64)
    if len(X) == 0:
        return np.zeros(0, dtype=np.int64)
    idx = neighbours(state["X"], X, state["k"])
    votes_1 = state["y"][idx].sum(axis=1)
    return (2 * votes_1 > state["k"]).astype(np.int64)


def knn_predict(train_X, train_y, query, k, metric="euclidean"):
    """Single-query convenience wrapper; labels may be any two values.

    ``train_y`` order defines class order for vote ties: the label that
    appears first in sorted order wins.
    """
    if metric != "euclidean":
        raise ModelError(f"unsupported metric {metric!r}")
    train_y = np.asarray(train_y)
    if len(train_y) == 0:
        raise ModelError("k-NN needs at least one training example")
    classes = np.unique(train_y)
    codes = np.searchsorted(classes, train_y)
    X = np.asarray(train_X, dtype=np.float64).reshape(len(train_y), -1)
    q = np.asarray(query, dtype=np.float64).reshape(1, -1)
    state = fit(X, codes, k)
    idx = neighbours(state["X"], q, k)[0]
    counts = np.bincount(codes[idx], minlength=len(classes))
    return classes[int(np.argmax(counts))]
