"""Bagged trees, AdaBoost.M1 trees and random-subspace k-NN / discriminant."""

import math

import numpy as np

from .. import rng
from ..errors import BoostingError, DegenerateDataError
from . import knn, tree

KINDS = ("boosted-tree", "bagged-tree", "subspace-knn", "subspace-discriminant")
BOOST_MAX_SPLITS = 10
BOOST_RETRIES = 10
LDA_RIDGE = 1e-6
_EPS_FLOOR = 1e-10


def adaboost_alpha(eps):
    """Learner weight 0.5 * ln((1 - eps) / eps)."""
    eps = min(max(eps, _EPS_FLOOR), 1 - _EPS_FLOOR)
    return 0.5 * math.log((1.0 - eps) / eps)


def lda_fit(X, y, ridge=LDA_RIDGE):
    """Fisher discriminant with pooled covariance; class 1 where score > 0."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if len(np.unique(y)) < 2:
        raise DegenerateDataError("discriminant needs both classes")
    X0, X1 = X[y == 0], X[y == 1]
    mu0, mu1 = X0.mean(axis=0), X1.mean(axis=0)
    centered = np.vstack([X0 - mu0, X1 - mu1])
    dof = max(len(X) - 2, 1)
    cov = centered.T @ centered / dof + ridge * np.eye(X.shape[1])
    w = np.linalg.solve(cov, mu1 - mu0)
    b = -w @ (mu0 + mu1) / 2.0 + math.log(len(X1) / len(X0))
    return {"w": w, "b": float(b)}


def lda_predict(state, X):
    return (np.asarray(X, dtype=np.float64) @ state["w"] + state["b"] > 0).astype(np.int64)


def _vote(preds, weights=None):
    """Weighted majority over learners; ties go to class 0."""
    preds = np.asarray(preds)
    w = np.ones(len(preds)) if weights is None else np.asarray(weights, dtype=np.float64)
    score_1 = w @ preds
    score_0 = w @ (1 - preds)
    return (score_1 > score_0).astype(np.int64)


def fit(X, y, kind, n_learners=30, seed=0, subspace_size=None, max_splits=None):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if len(X) == 0:
        raise DegenerateDataError("ensemble needs training data")
    if kind == "bagged-tree":
        return _fit_bagged(X, y, n_learners, seed, max_splits)
    if kind == "boosted-tree":
        return _fit_boosted(X, y, n_learners, seed,
                            BOOST_MAX_SPLITS if max_splits is None else max_splits)
    if kind in ("subspace-knn", "subspace-discriminant"):
        return _fit_subspace(X, y, kind, n_learners, seed, subspace_size)
    raise ValueError(f"unknown ensemble kind {kind!r}; expected one of {KINDS}")


def _fit_bagged(X, y, n_learners, seed, max_splits):
    n = len(y)
    learners = []
    for m in range(n_learners):
        idx = rng.Stream(seed, 1, m).integers(n, n)
        learners.append(tree.fit(X[idx], y[idx], max_splits))
    return {"kind": "bagged-tree", "learners": learners}


def _fit_boosted(X, y, n_learners, seed, max_splits):
    """AdaBoost.M1 by weighted resampling."""
    n = len(y)
    w = np.full(n, 1.0 / n)
    learners, alphas = [], []
    for m in range(n_learners):
        for attempt in range(BOOST_RETRIES + 1):
            idx = rng.Stream(seed, 2, m, attempt).choice_weighted(w, n)
            learner = tree.fit(X[idx], y[idx], max_splits)
            wrong = tree.predict(learner, X) != y
            eps = float(w[wrong].sum())
            if eps < 0.5:
                break
        else:
            if not learners:
                raise BoostingError(
                    f"no learner reached weighted error < 0.5 after {BOOST_RETRIES} retries"
                )
            break
        alpha = adaboost_alpha(eps)
        learners.append(learner)
        alphas.append(alpha)
        if eps == 0:
            break
        w = np.where(wrong, w * math.exp(alpha), w * math.exp(-alpha))
        w /= w.sum()
    return {"kind": "boosted-tree", "learners": learners, "alphas": np.array(alphas)}


def _fit_subspace(X, y, kind, n_learners, seed, subspace_size):
    d = X.shape[1]
    size = math.ceil(d / 2) if subspace_size is None else int(subspace_size)
    size = min(max(size, 1), d)
    learners, subsets = [], []
    for m in range(n_learners):
        subset = np.sort(rng.Stream(seed, 3, m).permutation(d)[:size])
        Xs = X[:, subset]
        learners.append(knn.fit(Xs, y, 1) if kind == "subspace-knn" else lda_fit(Xs, y))
        subsets.append(subset)
    return {"kind": kind, "learners": learners, "subsets": subsets}


def predict(state, X):
    X = np.asarray(X, dtype=np.float64)
    kind = state["kind"]
    if kind == "bagged-tree":
        return _vote([tree.predict(t, X) for t in state["learners"]])
    if kind == "boosted-tree":
        return _vote([tree.predict(t, X) for t in state["learners"]], state["alphas"])
    base = knn.predict if kind == "subspace-knn" else lda_predict
    return _vote([base(st, X[:, s]) for st, s in zip(state["learners"], state["subsets"])])
