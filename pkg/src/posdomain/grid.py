"""Synthetic labelled training grid."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from decimal import Decimal
from typing import Sequence

import numpy as np

from .core import Label, OutputModel, TargetRange, VariableSpec, evaluate_many

DEFAULT_GRID_CAP = 50_000_000


class GridTooLarge(ValueError):
    pass


class ArityError(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    variables: tuple[VariableSpec, ...]
    granularity: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "variables", tuple(self.variables))
        if not self.variables:
            raise ValueError("need at least one variable")
        if not (math.isfinite(self.granularity) and self.granularity > 0):
            raise ValueError(f"granularity must be a positive number, got {self.granularity}")


def _step_values(lo: float, hi: float, delta: float) -> list[float]:
    # lo + n*delta evaluated in decimal on the shortest repr of the inputs and
    # rounded once, so decimal grids (-1, -0.8, ..., 1) land on the nearest doubles.
    d_lo, d_delta = Decimal(repr(lo)), Decimal(repr(delta))
    tau = delta * 1e-9
    values = [lo]
    n = 1
    while True:
        v = float(d_lo + n * d_delta)
        if v >= hi - tau:
            break
        values.append(v)
        n += 1
    values.append(hi)
    return values


def axis_values(v: VariableSpec, delta: float) -> list[float]:
    """Grid values for one variable: both ends plus every ``lo + n*delta`` in between.

    An interior value within ``delta * 1e-9`` of the upper end collapses onto it.
    """
    if not delta > 0:
        raise ValueError(f"granularity must be positive, got {delta}")
    return _step_values(v.lo, v.hi, delta)


def interval_axis_values(lo: float, hi: float, delta: float) -> list[float]:
    """Like :func:`axis_values` for a bare ``[lo, hi]``; a point range gives one value."""
    if not delta > 0:
        raise ValueError(f"granularity must be positive, got {delta}")
    if lo == hi:
        return [lo]
    return _step_values(lo, hi, delta)


def product_points(axes: Sequence[Sequence[float]]) -> np.ndarray:
    """Row-major cartesian product (last axis varies fastest) as an ``(n, m)`` array."""
    mesh = np.meshgrid(*[np.asarray(a, dtype=float) for a in axes], indexing="ij")
    return np.stack([g.ravel() for g in mesh], axis=1)


def grid_size(spec: GridSpec) -> int:
    return math.prod(len(axis_values(v, spec.granularity)) for v in spec.variables)


def build_grid(spec: GridSpec, cap: int = DEFAULT_GRID_CAP) -> np.ndarray:
    axes = [axis_values(v, spec.granularity) for v in spec.variables]
    size = math.prod(len(a) for a in axes)
    if size > cap:
        raise GridTooLarge(f"grid has {size} points, cap is {cap}")
    return product_points(axes)


@dataclass(frozen=True)
class LabeledDataset:
    points: np.ndarray  # (n, m)
    inside: np.ndarray  # (n,) bool, True = Inside
    outputs: np.ndarray  # (n,) model output per point
    spec: GridSpec | None = None

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def labels(self) -> list[Label]:
        return [Label.INSIDE if b else Label.OUTSIDE for b in self.inside.tolist()]

    def to_csv(self, names: Sequence[str] | None = None) -> str:
        m = self.points.shape[1]
        names = list(names) if names else [f"x{j + 1}" for j in range(m)]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([*names, "y", "label"])
        for p, y, ins in zip(self.points.tolist(), self.outputs.tolist(), self.inside.tolist()):
            w.writerow([*map(repr, p), repr(y), "Inside" if ins else "Outside"])
        return buf.getvalue()


def label_dataset(
    points: np.ndarray,
    model: OutputModel,
    target: TargetRange,
    spec: GridSpec | None = None,
) -> LabeledDataset:
    """Label each point Inside iff the model output lies in the target.

    Non-finite outputs (NaN, +-inf) are always Outside.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != model.arity:
        raise ArityError(f"model arity {model.arity} does not match points of shape {points.shape}")
    y = evaluate_many(model, points)
    inside = np.isfinite(y) & target.contains_array(y)
    return LabeledDataset(points, inside, y, spec)


def labeled_grid(
    spec: GridSpec, model: OutputModel, target: TargetRange, cap: int = DEFAULT_GRID_CAP
) -> LabeledDataset:
    return label_dataset(build_grid(spec, cap), model, target, spec)
