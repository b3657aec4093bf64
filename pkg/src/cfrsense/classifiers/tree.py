"""Binary CART with Gini impurity, grown best-first up to a split budget."""

import heapq

import numpy as np

_REL_TOL = 1e-12


def best_split(X, y):
    """Exhaustive Gini split search for one node.

    Candidate thresholds are midpoints between consecutive distinct sorted
    values.  Among splits within rounding of the best weighted impurity the
    lowest feature index wins, then the lowest threshold.

    Returns ``(gain, feature, threshold)`` or None when every feature is
    constant on the node.  ``gain`` is the drop in count-weighted impurity.
    """
    m = X.shape[0]
    if m < 2:
        return None
    order = np.argsort(X, axis=0, kind="stable")
    xs = np.take_along_axis(X, order, axis=0)
    ys = y[order].astype(np.float64)
    n_left = np.arange(1, m, dtype=np.float64)[:, None]
    n_right = m - n_left
    ones_left = np.cumsum(ys, axis=0)[:-1]
    ones_total = float(y.sum())
    ones_right = ones_total - ones_left
    # count-weighted Gini: n * g = 2 * n0 * n1 / n
    score = 2.0 * (ones_left * (n_left - ones_left) / n_left
                   + ones_right * (n_right - ones_right) / n_right)
    valid = xs[1:] > xs[:-1]
    if not valid.any():
        return None
    score = np.where(valid, score, np.inf)
    best = score.min()
    near = score <= best + _REL_TOL * max(m, 1.0)
    feature = int(np.argmax(near.any(axis=0)))
    pos = int(np.argmax(near[:, feature]))
    lo, hi = xs[pos, feature], xs[pos + 1, feature]
    threshold = 0.5 * (lo + hi)
    if threshold >= hi:  # adjacent floats
        threshold = lo
    parent = 2.0 * ones_total * (m - ones_total) / m
    return parent - score[pos, feature], feature, float(threshold)


def fit(X, y, max_splits=None):
    """Grow a tree on class indices ``y`` in {0, 1}.

    Leaves are expanded in order of largest impurity decrease (earliest
    created first on ties) until ``max_splits`` internal nodes exist or
    every leaf is pure or unsplittable.  ``max_splits=None`` means no limit.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if max_splits is None:
        max_splits = max(len(y) - 1, 0)
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node(idx):
        ones = int(y[idx].sum())
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        # majority label; ties go to class 0
        value.append(1 if 2 * ones > len(idx) else 0)
        return len(value) - 1

    heap = []
    counter = 0

    def push(node, idx):
        nonlocal counter
        ones = y[idx].sum()
        if ones == 0 or ones == len(idx):
            return
        split = best_split(X[idx], y[idx])
        if split is None:
            return
        gain, f, thr = split
        heapq.heappush(heap, (-gain, counter, node, idx, f, thr))
        counter += 1

    root_idx = np.arange(len(y))
    push(new_node(root_idx), root_idx)
    n_splits = 0
    while heap and n_splits < max_splits:
        _, _, node, idx, f, thr = heapq.heappop(heap)
        go_left = X[idx, f] <= thr
        li, ri = idx[go_left], idx[~go_left]
        feature[node], threshold[node] = f, thr
        left[node], right[node] = new_node(li), new_node(ri)
        n_splits += 1
        push(left[node], li)
        push(right[node], ri)
    return {
        "feature": np.array(feature, dtype=np.int64),
        "threshold": np.array(threshold, dtype=np.float64),
        "left": np.array(left, dtype=np.int64),
        "right": np.array(right, dtype=np.int64),
        "value": np.array(value, dtype=np.int64),
    }


def n_splits(state):
    return int((state["feature"] >= 0).sum())


def apply(state, X):
    """Leaf node index for every row."""
    X = np.asarray(X, dtype=np.float64)
    node = np.zeros(len(X), dtype=np.int64)
    feat, thr = state["feature"], state["threshold"]
    active = feat[node] >= 0
    while active.any():
        rows = np.nonzero(active)[0]
        nd = node[rows]
        go_left = X[rows, feat[nd]] <= thr[nd]
        node[rows] = np.where(go_left, state["left"][nd], state["right"][nd])
        active = feat[node] >= 0
    return node


def predict(state, X):
    return state["value"][apply(state, X)]
