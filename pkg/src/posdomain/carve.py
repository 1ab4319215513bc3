"""Turn a trained tree into a union of boxes, and keep only boxes that test clean."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .core import (
    ApproxPositiveDomain,
    Box,
    Interval,
    OutputModel,
    TargetRange,
    Label,
    VariableSpec,
    evaluate_many,
)
from .grid import DEFAULT_GRID_CAP, GridSpec, interval_axis_values, labeled_grid, product_points
from .tree import Internal, TreeNode, train


def _leaf_boxes(tree: TreeNode, variables: Sequence[VariableSpec]):
    # per dimension: [lo, hi, lo_closed, hi_closed]; starts as the closed initial range
    bounds = [[v.lo, v.hi, True, True] for v in variables]

    def walk(node: TreeNode):
        if not isinstance(node, Internal):
            yield node, [tuple(b) for b in bounds]
            return
        f, t = node.feature_index, node.threshold
        saved = list(bounds[f])
        # left: x <= t
        if t < bounds[f][1]:
            bounds[f][1], bounds[f][3] = t, True
        yield from walk(node.left)
        bounds[f] = list(saved)
        # right: x > t
        if t >= bounds[f][0]:
            bounds[f][0], bounds[f][2] = t, False
        yield from walk(node.right)
        bounds[f] = saved

    yield from walk(tree)


def extract_boxes(
    tree: TreeNode,
    variables: Sequence[VariableSpec],
    target: TargetRange | None = None,
    granularity: float = math.nan,
) -> ApproxPositiveDomain:
    """Collect one box per Inside leaf, in depth-first (left before right) order.

    Leaves whose region misses the initial ranges entirely are skipped.
    """
    variables = tuple(variables)
    boxes = []
    for leaf, bounds in _leaf_boxes(tree, variables):
        if leaf.label is not Label.INSIDE:
            continue
        if any(lo > hi or (lo == hi and not (lc and hc)) for lo, hi, lc, hc in bounds):
            continue
        boxes.append(Box(tuple(Interval(lo, hi, lc, hc) for lo, hi, lc, hc in bounds)))
    if target is None:
        target = _everything()
    # leaves partition space, so boxes are disjoint by construction
    return ApproxPositiveDomain(tuple(boxes), variables, target, granularity, refined=False, check=False)


def _everything() -> TargetRange:
    return TargetRange((Interval(-math.inf, math.inf, False, False),))


def apd_contains(apd: ApproxPositiveDomain, point: Sequence[float]) -> bool:
    if len(point) != apd.arity:
        raise ValueError(f"expected {apd.arity} coordinates, got {len(point)}")
    return apd.contains(point)


def carve(
    variables: Sequence[VariableSpec],
    model: OutputModel,
    target: TargetRange,
    granularity: float,
    cap: int = DEFAULT_GRID_CAP,
) -> tuple[ApproxPositiveDomain, TreeNode]:
    """Grid, label, train and extract in one go."""
    spec = GridSpec(tuple(variables), granularity)
    data = labeled_grid(spec, model, target, cap)
    tree = train(data)
    return extract_boxes(tree, spec.variables, target, granularity), tree


def box_inner_points(box: Box, inner_delta: float) -> np.ndarray:
    """Grid over the box's closure, minus points excluded by open bounds."""
    axes = [interval_axis_values(iv.lo, iv.hi, inner_delta) for iv in box.intervals]
    pts = product_points(axes)
    return pts[box.contains_array(pts)]


def box_passes(box: Box, model: OutputModel, target: TargetRange, inner_delta: float) -> bool:
    pts = box_inner_points(box, inner_delta)
    if pts.shape[0] == 0:
        return False
    y = evaluate_many(model, pts)
    return bool(np.all(np.isfinite(y) & target.contains_array(y)))


def refine(
    apd: ApproxPositiveDomain,
    model: OutputModel,
    target: TargetRange | None = None,
    inner_delta: float | None = None,
) -> ApproxPositiveDomain:
    """Keep only boxes whose inner grid maps entirely into the target.

    A box can pass and still contain off-grid points that map outside; a
    smaller ``inner_delta`` narrows that gap. Defaults: the APD's own
    target and a quarter of its granularity.
    """
    target = apd.target if target is None else target
    if inner_delta is None:
        inner_delta = apd.granularity / 4
    if not (math.isfinite(inner_delta) and inner_delta > 0):
        raise ValueError(f"inner_delta must be a positive number, got {inner_delta}")
    kept = tuple(b for b in apd.boxes if box_passes(b, model, target, inner_delta))
    return ApproxPositiveDomain(kept, apd.variables, apd.target, apd.granularity, refined=True, check=False)
