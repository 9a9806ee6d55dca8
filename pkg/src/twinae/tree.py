"""CART-style decision tree with Gini impurity and axis-aligned splits.

Split thresholds are midpoints between consecutive sorted unique feature
values. Ties in impurity resolve to the lower feature index, then the lower
threshold, so fitting is fully deterministic. Zero-gain splits are allowed
while a node is impure (an XOR layout needs one), which matches the common
library behaviour the grid defaults come from.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class TreeNode:
    """Either an internal split (feature/threshold/left/right) or a leaf
    carrying a class probability distribution."""

    feature: int | None = None
    threshold: float | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    distribution: np.ndarray | None = None

    @property
    def is_leaf(self) -> bool:
        return self.distribution is not None


def _leaf(y: np.ndarray, n_classes: int) -> TreeNode:
    counts = np.bincount(y, minlength=n_classes).astype(np.float64)
    return TreeNode(distribution=counts / counts.sum())


def _best_split(X: np.ndarray, y: np.ndarray, n_classes: int, min_leaf: int):
    """Lowest weighted-child Gini split, or None when no valid cut exists."""
    n = y.size
    best_impurity = np.inf
    best = None
    for f in range(X.shape[1]):
        order = np.argsort(X[:, f], kind="stable")
        sv = X[order, f]
        sy = y[order]
        cut = np.flatnonzero(sv[:-1] < sv[1:])  # split between cut and cut+1
        if min_leaf > 1:
            cut = cut[(cut + 1 >= min_leaf) & (n - cut - 1 >= min_leaf)]
        if cut.size == 0:
            continue
        onehot = np.zeros((n, n_classes))
        onehot[np.arange(n), sy] = 1.0
        left_counts = np.cumsum(onehot, axis=0)[cut]
        n_left = (cut + 1).astype(np.float64)
        totals = np.bincount(sy, minlength=n_classes).astype(np.float64)
        right_counts = totals - left_counts
        n_right = n - n_left
        gini_left = 1.0 - ((left_counts / n_left[:, None]) ** 2).sum(axis=1)
        gini_right = 1.0 - ((right_counts / n_right[:, None]) ** 2).sum(axis=1)
        weighted = (n_left * gini_left + n_right * gini_right) / n
        j = int(np.argmin(weighted))  # first minimum -> lowest threshold
        if weighted[j] < best_impurity:
            best_impurity = weighted[j]
            best = (f, float((sv[cut[j]] + sv[cut[j] + 1]) / 2.0))
    return best


def _grow(X, y, n_classes, depth, max_depth, min_leaf) -> TreeNode:
    if depth >= max_depth or y.size < min_leaf or np.all(y == y[0]):
        return _leaf(y, n_classes)
    split = _best_split(X, y, n_classes, min_leaf)
    if split is None:
        return _leaf(y, n_classes)
    f, thr = split
    go_left = X[:, f] <= thr
    return TreeNode(
        feature=f,
        threshold=thr,
        left=_grow(X[go_left], y[go_left], n_classes, depth + 1, max_depth, min_leaf),
        right=_grow(X[~go_left], y[~go_left], n_classes, depth + 1, max_depth, min_leaf),
    )


def fit_tree(X, labels, max_depth: int, min_leaf: int = 1) -> TreeNode:
    """Grow a tree greedily until max_depth, purity, or sample exhaustion."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(labels, dtype=np.int64)
    if X.shape[0] == 0 or y.size == 0:
        raise ValueError("cannot fit a tree on empty data")
    if X.shape[0] != y.size:
        raise ValueError("sample and label counts differ")
    if max_depth < 0:
        raise ValueError("max_depth must be >= 0")
    if min_leaf < 1:
        raise ValueError("min_leaf must be >= 1")
    n_classes = int(y.max()) + 1
    return _grow(X, y, n_classes, 0, max_depth, min_leaf)


def tree_predict(tree: TreeNode, x):
    """Predict the majority class; ties resolve to the smaller class id.

    Accepts a single vector or a batch of rows.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        node = tree
        while not node.is_leaf:
            node = node.left if x[node.feature] <= node.threshold else node.right
        return int(np.argmax(node.distribution))
    return np.array([tree_predict(tree, row) for row in x], dtype=np.int64)
