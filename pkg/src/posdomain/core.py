"""Domain types: intervals, boxes, variables, target ranges and the model interface."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Protocol, Sequence, runtime_checkable

import numpy as np


class EmptyTarget(ValueError):
    pass


class Label(str, Enum):
    INSIDE = "Inside"
    OUTSIDE = "Outside"

    def __str__(self) -> str:
        return self.value


def _num_to_json(x: float) -> Any:
    if x == math.inf:
        return "inf"
    if x == -math.inf:
        return "-inf"
    return x


def _num_from_json(x: Any) -> float:
    if isinstance(x, str):
        if x in ("inf", "-inf"):
            return float(x)
        raise ValueError(f"bad number {x!r}")
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ValueError(f"bad number {x!r}")
    return float(x)


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    lo_closed: bool = True
    hi_closed: bool = True

    def __post_init__(self) -> None:
        if math.isnan(self.lo) or math.isnan(self.hi):
            raise ValueError("interval endpoints must not be NaN")
        if self.lo > self.hi:
            raise ValueError(f"empty interval: lo={self.lo} > hi={self.hi}")
        if self.lo == self.hi and not (self.lo_closed and self.hi_closed):
            raise ValueError(f"empty interval at {self.lo}: degenerate intervals must be closed")
        if (self.lo == -math.inf and self.lo_closed) or (self.hi == math.inf and self.hi_closed):
            raise ValueError("infinite endpoints must be open")
        if self.lo == math.inf or self.hi == -math.inf:
            raise ValueError("interval lies entirely at infinity")

    @classmethod
    def closed(cls, lo: float, hi: float) -> "Interval":
        return cls(float(lo), float(hi), True, True)

    def contains(self, x: float) -> bool:
        return (x > self.lo or (self.lo_closed and x == self.lo)) and (
            x < self.hi or (self.hi_closed and x == self.hi)
        )

    __contains__ = contains

    def contains_array(self, x: np.ndarray) -> np.ndarray:
        lo_ok = (x > self.lo) | (x == self.lo) if self.lo_closed else x > self.lo
        hi_ok = (x < self.hi) | (x == self.hi) if self.hi_closed else x < self.hi
        return lo_ok & hi_ok

    def is_subset_of(self, other: "Interval") -> bool:
        lo_ok = self.lo > other.lo or (self.lo == other.lo and (other.lo_closed or not self.lo_closed))
        hi_ok = self.hi < other.hi or (self.hi == other.hi and (other.hi_closed or not self.hi_closed))
        return lo_ok and hi_ok

    def overlaps(self, other: "Interval") -> bool:
        """True when the two intervals share at least one point."""
        if self.hi < other.lo or other.hi < self.lo:
            return False
        if self.hi == other.lo:
            return self.hi_closed and other.lo_closed
        if other.hi == self.lo:
            return other.hi_closed and self.lo_closed
        return True

    def to_json(self) -> dict:
        return {
            "lo": _num_to_json(self.lo),
            "hi": _num_to_json(self.hi),
            "lo_closed": self.lo_closed,
            "hi_closed": self.hi_closed,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Interval":
        return cls(
            _num_from_json(obj["lo"]),
            _num_from_json(obj["hi"]),
            bool(obj["lo_closed"]),
            bool(obj["hi_closed"]),
        )

    def __str__(self) -> str:
        left = "[" if self.lo_closed else "("
        right = "]" if self.hi_closed else ")"
        return f"{left}{self.lo!r}, {self.hi!r}{right}"


@dataclass(frozen=True)
class VariableSpec:
    name: str
    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not self.name.isidentifier():
            raise ValueError(f"variable name {self.name!r} is not an identifier")
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError(f"variable {self.name}: range must be finite")
        if not self.lo < self.hi:
            raise ValueError(f"variable {self.name}: need lo < hi, got [{self.lo}, {self.hi}]")

    @property
    def interval(self) -> Interval:
        return Interval.closed(self.lo, self.hi)

    def to_json(self) -> dict:
        return {"name": self.name, "lo": self.lo, "hi": self.hi}

    @classmethod
    def from_json(cls, obj: dict) -> "VariableSpec":
        return cls(str(obj["name"]), _num_from_json(obj["lo"]), _num_from_json(obj["hi"]))


def _touch_or_overlap(a: Interval, b: Interval) -> str:
    """Classify sorted neighbours ``a`` (lower) and ``b``: 'apart', 'touch' or 'overlap'."""
    if a.hi < b.lo:
        return "apart"
    if a.hi == b.lo:
        return "touch" if a.hi_closed or b.lo_closed else "apart"
    return "overlap"


@dataclass(frozen=True)
class TargetRange:
    """Union of disjoint intervals, kept sorted and with touching pieces merged."""

    intervals: tuple[Interval, ...]

    def __post_init__(self) -> None:
        if not self.intervals:
            raise EmptyTarget("target range needs at least one interval")
        ordered = sorted(self.intervals, key=lambda iv: (iv.lo, not iv.lo_closed, iv.hi))
        merged: list[Interval] = [ordered[0]]
        for iv in ordered[1:]:
            prev = merged[-1]
            kind = _touch_or_overlap(prev, iv)
            if kind == "overlap":
                raise ValueError(f"target intervals {prev} and {iv} overlap")
            if kind == "touch":
                merged[-1] = Interval(prev.lo, iv.hi, prev.lo_closed, iv.hi_closed)
            else:
                merged.append(iv)
        object.__setattr__(self, "intervals", tuple(merged))

    @classmethod
    def of(cls, *intervals: Interval) -> "TargetRange":
        return cls(tuple(intervals))

    @classmethod
    def closed(cls, lo: float, hi: float) -> "TargetRange":
        return cls((Interval.closed(lo, hi),))

    def contains(self, y: float) -> bool:
        return any(iv.contains(y) for iv in self.intervals)

    __contains__ = contains

    def contains_array(self, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        out = np.zeros(y.shape, dtype=bool)
        for iv in self.intervals:
            out |= iv.contains_array(y)
        return out

    def to_json(self) -> list:
        return [iv.to_json() for iv in self.intervals]

    @classmethod
    def from_json(cls, obj: list) -> "TargetRange":
        return cls(tuple(Interval.from_json(o) for o in obj))

    def __str__(self) -> str:
        return " ∪ ".join(str(iv) for iv in self.intervals)


def target_contains(t: TargetRange, y: float) -> bool:
    return t.contains(y)


def shrink_target(t: TargetRange, margin: float, sides: str = "upper") -> TargetRange:
    """Move finite endpoints of every interval inward by ``margin``.

    ``sides`` selects which endpoints move: "upper" (default, the usual
    one-sided "stay below a limit" case), "lower", or "both". Endpoint
    kinds are preserved; intervals left empty are dropped.
    """
    if not margin >= 0:
        raise ValueError(f"margin must be nonnegative, got {margin}")
    if sides not in ("upper", "lower", "both"):
        raise ValueError(f"sides must be 'upper', 'lower' or 'both', got {sides!r}")
    move_lo = sides in ("lower", "both")
    move_hi = sides in ("upper", "both")
    kept = []
    for iv in t.intervals:
        lo = iv.lo + margin if move_lo and math.isfinite(iv.lo) else iv.lo
        hi = iv.hi - margin if move_hi and math.isfinite(iv.hi) else iv.hi
        if lo < hi or (lo == hi and iv.lo_closed and iv.hi_closed):
            kept.append(Interval(lo, hi, iv.lo_closed, iv.hi_closed))
    if not kept:
        raise EmptyTarget(f"shrinking {t} by {margin} leaves nothing")
    return TargetRange(tuple(kept))


@dataclass(frozen=True)
class Box:
    intervals: tuple[Interval, ...]

    def contains(self, point: Sequence[float]) -> bool:
        return all(iv.contains(x) for iv, x in zip(self.intervals, point))

    def contains_array(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        mask = np.ones(points.shape[0], dtype=bool)
        for j, iv in enumerate(self.intervals):
            mask &= iv.contains_array(points[:, j])
        return mask

    def disjoint_from(self, other: "Box") -> bool:
        return any(not a.overlaps(b) for a, b in zip(self.intervals, other.intervals))

    def to_json(self) -> dict:
        return {"intervals": [iv.to_json() for iv in self.intervals]}

    @classmethod
    def from_json(cls, obj: dict) -> "Box":
        return cls(tuple(Interval.from_json(o) for o in obj["intervals"]))

    def describe(self, variables: Sequence[VariableSpec]) -> str:
        return ", ".join(f"{v.name} ∈ {iv}" for v, iv in zip(variables, self.intervals))


@dataclass(frozen=True)
class ApproxPositiveDomain:
    boxes: tuple[Box, ...]
    variables: tuple[VariableSpec, ...]
    target: TargetRange
    granularity: float
    refined: bool = False
    check: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "boxes", tuple(self.boxes))
        object.__setattr__(self, "variables", tuple(self.variables))
        if not self.check:
            return
        m = len(self.variables)
        for box in self.boxes:
            if len(box.intervals) != m:
                raise ValueError(f"box has {len(box.intervals)} intervals, expected {m}")
            for iv, v in zip(box.intervals, self.variables):
                if not iv.is_subset_of(v.interval):
                    raise ValueError(f"box interval {iv} leaves the range of {v.name}")
        for i, a in enumerate(self.boxes):
            for b in self.boxes[i + 1 :]:
                if not a.disjoint_from(b):
                    raise ValueError("boxes of an approximate positive domain must be disjoint")

    @property
    def arity(self) -> int:
        return len(self.variables)

    def contains(self, point: Sequence[float]) -> bool:
        return any(box.contains(point) for box in self.boxes)

    def contains_array(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        mask = np.zeros(points.shape[0], dtype=bool)
        for box in self.boxes:
            mask |= box.contains_array(points)
        return mask

    def to_json(self) -> dict:
        return {
            "variables": [v.to_json() for v in self.variables],
            "target": self.target.to_json(),
            "granularity": self.granularity,
            "refined": self.refined,
            "boxes": [b.to_json() for b in self.boxes],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ApproxPositiveDomain":
        return cls(
            boxes=tuple(Box.from_json(b) for b in obj["boxes"]),
            variables=tuple(VariableSpec.from_json(v) for v in obj["variables"]),
            target=TargetRange.from_json(obj["target"]),
            granularity=_num_from_json(obj["granularity"]),
            refined=bool(obj["refined"]),
        )

    def report(self) -> str:
        """One line per box in bracket notation."""
        return "".join(box.describe(self.variables) + "\n" for box in self.boxes)


@runtime_checkable
class OutputModel(Protocol):
    """Anything mapping a point of ``arity`` reals to one real.

    Implementations may also provide ``evaluate_batch(points) -> ndarray``;
    ``concurrency_safe`` tells callers whether parallel calls are allowed.
    """

    arity: int
    concurrency_safe: bool

    def evaluate(self, point: Sequence[float]) -> float: ...


def evaluate_many(model: OutputModel, points: np.ndarray) -> np.ndarray:
    """Evaluate ``model`` on every row of ``points``, in row order."""
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != model.arity:
        raise ValueError(f"expected points of shape (n, {model.arity}), got {points.shape}")
    batch = getattr(model, "evaluate_batch", None)
    if batch is not None:
        return np.asarray(batch(points), dtype=float)
    return np.array([model.evaluate(tuple(p)) for p in points.tolist()], dtype=float)


class FunctionModel:
    """Wrap a plain Python callable ``fn(*xs) -> float`` as an OutputModel."""

    concurrency_safe = True

    def __init__(self, fn, arity: int, vectorized: bool = False):
        if arity < 1:
            raise ValueError("arity must be positive")
        self.fn = fn
        self.arity = arity
        self.vectorized = vectorized

    def evaluate(self, point: Sequence[float]) -> float:
        if len(point) != self.arity:
            raise ValueError(f"expected {self.arity} coordinates, got {len(point)}")
        return float(self.fn(*point))

    def evaluate_batch(self, points: np.ndarray) -> np.ndarray:
        if not self.vectorized:
            return np.array([self.fn(*p) for p in points.tolist()], dtype=float)
        with np.errstate(all="ignore"):
            return np.asarray(self.fn(*points.T), dtype=float)
