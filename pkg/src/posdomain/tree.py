"""Fully grown, unpruned binary CART classifier with Gini splits.

Candidate thresholds are midpoints between consecutive distinct feature
values of the node's points; a point goes left iff ``x[f] <= threshold``.
The chosen split minimises the weighted Gini impurity, compared exactly on
integer counts, with ties going to the lowest feature and then the
smallest threshold. Training is therefore independent of point order.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

from .core import Label
from .grid import LabeledDataset


class ContradictoryData(ValueError):
    pass


@dataclass(frozen=True)
class Leaf:
    label: Label
    count: int


@dataclass(frozen=True)
class Internal:
    feature_index: int
    threshold: float
    left: "TreeNode"
    right: "TreeNode"


TreeNode = Union[Leaf, Internal]


def _midpoint(a: float, b: float) -> float:
    t = a + (b - a) / 2.0
    # keep a <= t < b even when a and b are adjacent doubles
    return t if a <= t < b else a


def _best_split(X: np.ndarray, y: np.ndarray) -> tuple[int, float] | None:
    n, m = X.shape
    total_in = int(y.sum())
    cands = []  # (float score, feature, position, threshold, nL, pL)
    for f in range(m):
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        cum_in = np.cumsum(y[order])
        pos = np.flatnonzero(xs[:-1] < xs[1:])
        if pos.size == 0:
            continue
        nL = (pos + 1).astype(np.int64)
        pL = cum_in[pos].astype(np.int64)
        nR = n - nL
        pR = total_in - pL
        # weighted Gini * n / 2 = pL*qL/nL + pR*qR/nR
        score = pL * (nL - pL) / nL + pR * (nR - pR) / nR
        k = int(np.argmin(score))
        best = score[k]
        # every position whose float score is near the minimum is resolved exactly below
        near = np.flatnonzero(score <= best + 1e-9 * max(1.0, abs(best)))
        for j in near.tolist():
            cands.append((f, j, xs, pos, nL, pL, nR, pR))
    if not cands:
        return None

    def exact(c) -> Fraction:
        f, j, xs, pos, nL, pL, nR, pR = c
        a, b, c_, d = int(nL[j]), int(pL[j]), int(nR[j]), int(pR[j])
        return Fraction(b * (a - b), a) + Fraction(d * (c_ - d), c_)

    best_key = None
    best = None
    for c in cands:
        f, j, xs, pos, *_ = c
        i = int(pos[j])
        thr = _midpoint(float(xs[i]), float(xs[i + 1]))
        key = (exact(c), f, thr)
        if best_key is None or key < best_key:
            best_key, best = key, (f, thr)
    return best


def _grow(X: np.ndarray, y: np.ndarray) -> TreeNode:
    n = X.shape[0]
    n_in = int(y.sum())
    if n_in == n:
        return Leaf(Label.INSIDE, n)
    if n_in == 0:
        return Leaf(Label.OUTSIDE, n)
    split = _best_split(X, y)
    if split is None:
        raise ContradictoryData(f"identical points {X[0].tolist()} carry both labels")
    f, thr = split
    go_left = X[:, f] <= thr
    return Internal(
        f,
        thr,
        _grow(X[go_left], y[go_left]),
        _grow(X[~go_left], y[~go_left]),
    )


def train(data: LabeledDataset) -> TreeNode:
    if len(data) == 0:
        raise ValueError("cannot train on an empty dataset")
    return train_arrays(data.points, data.inside)


def train_arrays(X: np.ndarray, inside: np.ndarray) -> TreeNode:
    X = np.asarray(X, dtype=float)
    y = np.asarray(inside, dtype=bool)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError("X must be (n, m) with one label per row")
    if X.shape[0] == 0:
        raise ValueError("cannot train on an empty dataset")
    return _grow(X, y)


def predict(tree: TreeNode, point: Sequence[float]) -> Label:
    node = tree
    while isinstance(node, Internal):
        node = node.left if point[node.feature_index] <= node.threshold else node.right
    return node.label


def predict_inside(tree: TreeNode, points: np.ndarray) -> np.ndarray:
    """Vectorised routing; True where the reached leaf is Inside."""
    points = np.asarray(points, dtype=float)
    out = np.zeros(points.shape[0], dtype=bool)

    def walk(node: TreeNode, idx: np.ndarray) -> None:
        if idx.size == 0:
            return
        if isinstance(node, Leaf):
            out[idx] = node.label is Label.INSIDE
            return
        left = points[idx, node.feature_index] <= node.threshold
        walk(node.left, idx[left])
        walk(node.right, idx[~left])

    walk(tree, np.arange(points.shape[0]))
    return out


def leaves(tree: TreeNode) -> list[Leaf]:
    if isinstance(tree, Leaf):
        return [tree]
    return leaves(tree.left) + leaves(tree.right)


def depth(tree: TreeNode) -> int:
    if isinstance(tree, Leaf):
        return 0
    return 1 + max(depth(tree.left), depth(tree.right))


def tree_to_json(tree: TreeNode) -> dict:
    if isinstance(tree, Leaf):
        return {"label": tree.label.value, "count": tree.count}
    return {
        "feature_index": tree.feature_index,
        "threshold": tree.threshold,
        "left": tree_to_json(tree.left),
        "right": tree_to_json(tree.right),
    }


def tree_from_json(obj: dict) -> TreeNode:
    if "label" in obj:
        return Leaf(Label(obj["label"]), int(obj["count"]))
    return Internal(
        int(obj["feature_index"]),
        float(obj["threshold"]),
        tree_from_json(obj["left"]),
        tree_from_json(obj["right"]),
    )
