import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import gini_split_bruteforce
from posdomain.core import Label
from posdomain.grid import GridSpec, LabeledDataset, labeled_grid
from posdomain.tree import (
    ContradictoryData,
    Internal,
    Leaf,
    predict,
    predict_inside,
    train,
    train_arrays,
    tree_from_json,
    tree_to_json,
)


def _data(points, inside):
    pts = np.asarray(points, dtype=float)
    return LabeledDataset(pts, np.asarray(inside, dtype=bool), np.zeros(len(pts)))


def test_pure_root():
    assert train(_data([[0.0], [1.0]], [True, True])) == Leaf(Label.INSIDE, 2)


def test_single_midpoint_split():
    tree = train(_data([[0.0], [1.0]], [False, True]))
    assert tree == Internal(0, 0.5, Leaf(Label.OUTSIDE, 1), Leaf(Label.INSIDE, 1))
    assert predict(tree, [0.5]) is Label.OUTSIDE
    assert predict(tree, [0.50001]) is Label.INSIDE


def test_contradictory_points():
    with pytest.raises(ContradictoryData):
        train(_data([[0.0, 1.0], [0.0, 1.0]], [True, False]))


def test_empty_rejected():
    with pytest.raises(ValueError):
        train_arrays(np.zeros((0, 2)), np.zeros(0, dtype=bool))


def test_tie_breaks_to_lowest_feature_then_smallest_threshold():
    # both features separate the labels perfectly at the same place
    tree = train(_data([[0, 0], [1, 1], [2, 2], [3, 3]], [False, False, True, True]))
    assert isinstance(tree, Internal) and tree.feature_index == 0 and tree.threshold == 1.5
    # two equally good thresholds on one feature: pick the smaller
    tree = train(_data([[0.0], [1.0], [2.0]], [False, True, False]))
    assert tree.threshold == 0.5


def test_band_tree_perfect_on_grid(square, linear, unit_target):
    data = labeled_grid(GridSpec(square, 0.2), linear, unit_target)
    tree = train(data)
    assert np.array_equal(predict_inside(tree, data.points), data.inside)
    assert [predict(tree, p) is Label.INSIDE for p in data.points.tolist()] == data.inside.tolist()
    assert predict(tree, (0.3, 0.3)) is Label.INSIDE


def _check_gini(node, X, y):
    if isinstance(node, Leaf):
        assert len(set(y.tolist())) <= 1
        assert node.count == len(y)
        return
    f, v = gini_split_bruteforce(X, y)
    assert node.feature_index == f
    # threshold is the midpoint above the brute-force value v
    left = X[:, f] <= node.threshold
    assert np.array_equal(left, X[:, f] <= v)
    _check_gini(node.left, X[left], y[left])
    _check_gini(node.right, X[~left], y[~left])


def test_every_split_is_bruteforce_gini_optimum(square, benchmarks, unit_target):
    for f in benchmarks.values():
        data = labeled_grid(GridSpec(square, 0.4), f, unit_target)
        _check_gini(train(data), data.points, data.inside)


small_grids = st.integers(2, 5).flatmap(
    lambda nx: st.integers(1, 4).flatmap(
        lambda ny: st.lists(st.booleans(), min_size=nx * ny, max_size=nx * ny).map(lambda labs: (nx, ny, labs))
    )
)


@given(small_grids, st.randoms(use_true_random=False))
@settings(max_examples=60, deadline=None)
def test_order_independent_and_perfect(grid, rnd):
    nx, ny, labs = grid
    X = np.array([[i * 0.5, j * 0.25] for i in range(nx) for j in range(ny)])
    y = np.array(labs)
    tree = train_arrays(X, y)
    assert np.array_equal(predict_inside(tree, X), y)
    perm = list(range(len(y)))
    rnd.shuffle(perm)
    assert train_arrays(X[perm], y[perm]) == tree
    _check_gini(tree, X, y)


def test_retrain_identical(square, benchmarks, unit_target):
    data = labeled_grid(GridSpec(square, 0.1), benchmarks["sin_plus_cos"], unit_target)
    assert train(data) == train(data)


def test_json_round_trip(square, linear, unit_target):
    tree = train(labeled_grid(GridSpec(square, 0.2), linear, unit_target))
    obj = json.loads(json.dumps(tree_to_json(tree)))
    assert tree_from_json(obj) == tree
    assert set(obj) == {"feature_index", "threshold", "left", "right"}


def test_vectorised_predict_matches_scalar(square, benchmarks, unit_target):
    tree = train(labeled_grid(GridSpec(square, 0.1), benchmarks["log_sum_abs"], unit_target))
    pts = np.random.default_rng(5).uniform(-1.2, 1.2, size=(2000, 2))
    assert predict_inside(tree, pts).tolist() == [predict(tree, p) is Label.INSIDE for p in pts.tolist()]
