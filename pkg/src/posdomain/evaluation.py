"""Contingency-table evaluation of an approximate positive domain."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import rng
from .core import ApproxPositiveDomain, OutputModel, TargetRange, VariableSpec, evaluate_many


class NoQualifyingGranularity(ValueError):
    def __init__(self, mean_tprs: dict[float, float]):
        shown = ", ".join(f"{d!r}: {t!r}" for d, t in mean_tprs.items())
        super().__init__(f"no granularity reaches the TPR threshold (mean TPRs: {shown})")
        self.mean_tprs = mean_tprs


@dataclass(frozen=True)
class EvalReport:
    """Counts laid out as rows INPUT Inside/Outside by columns OUTPUT Inside/Outside.

    ``tpr`` is TP / (TP + FP) and is ``None`` when the domain accepted no
    test point.
    """

    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @property
    def tpr(self) -> float | None:
        accepted = self.tp + self.fp
        return self.tp / accepted if accepted else None

    @property
    def accuracy(self) -> float:
        return (self.tp + self.tn) / self.total

    def to_json(self) -> dict:
        return {
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "tn": self.tn,
            "tpr": self.tpr,
            "accuracy": self.accuracy,
        }

    def table(self) -> str:
        cells = [str(c) for c in (self.tp, self.fp, self.fn, self.tn)]
        w = max(7, *(len(c) for c in cells))
        tpr = "undefined" if self.tpr is None else repr(self.tpr)
        lines = [
            f"{'':16}{'OUTPUT':^{2 * w + 3}}",
            f"{'':16}{'Inside':>{w}} | {'Outside':>{w}}",
            f"{'INPUT  Inside':<16}{cells[0]:>{w}} | {cells[1]:>{w}}",
            f"{'       Outside':<16}{cells[2]:>{w}} | {cells[3]:>{w}}",
            f"tpr: {tpr}",
            f"accuracy: {self.accuracy!r}",
        ]
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class TestSet:
    points: np.ndarray  # (n, m)
    outputs: np.ndarray  # (n,)
    seed: int

    __test__ = False  # not a pytest class

    def __post_init__(self) -> None:
        if self.points.shape[0] != self.outputs.shape[0]:
            raise ValueError("points and outputs differ in length")

    def __len__(self) -> int:
        return self.points.shape[0]


def sample_uniform(variables: Sequence[VariableSpec], n: int, seed: int) -> np.ndarray:
    """``n`` points uniform on the box of initial ranges; coordinate (i, j) uses counter i*m + j."""
    if n < 1:
        raise ValueError(f"test set size must be at least 1, got {n}")
    m = len(variables)
    u = rng.uniform(rng.derive_key("test-set", seed), 0, n * m).reshape(n, m)
    lo = np.array([v.lo for v in variables])
    hi = np.array([v.hi for v in variables])
    pts = lo + (hi - lo) * u
    return np.minimum(pts, hi)


def generate_test_set(
    variables: Sequence[VariableSpec], n: int, model: OutputModel, seed: int
) -> TestSet:
    pts = sample_uniform(variables, n, seed)
    return TestSet(pts, evaluate_many(model, pts), seed)


def contingency(input_inside: np.ndarray, output_inside: np.ndarray) -> EvalReport:
    a = np.asarray(input_inside, dtype=bool)
    b = np.asarray(output_inside, dtype=bool)
    return EvalReport(
        tp=int(np.count_nonzero(a & b)),
        fp=int(np.count_nonzero(a & ~b)),
        fn=int(np.count_nonzero(~a & b)),
        tn=int(np.count_nonzero(~a & ~b)),
    )


def evaluate(apd: ApproxPositiveDomain, test: TestSet, target: TargetRange) -> EvalReport:
    if len(test) == 0:
        raise ValueError("test set is empty")
    y = test.outputs
    out_in = np.isfinite(y) & target.contains_array(y)
    return contingency(apd.contains_array(test.points), out_in)


def mean_defined(values: Sequence[float | None]) -> float | None:
    """Mean of the non-None entries, or None if there are none."""
    vals = [v for v in values if v is not None]
    return math.fsum(vals) / len(vals) if vals else None


def select_granularity(
    candidates: Sequence[float],
    carve_at: Callable[[float], ApproxPositiveDomain],
    test_sets: Sequence[TestSet],
    target: TargetRange,
    tpr_threshold: float,
) -> float:
    """Largest candidate granularity whose mean TPR over the test sets meets the threshold.

    ``carve_at(delta)`` builds the domain for one granularity. Candidates are
    tried from largest to smallest; a candidate with no defined TPR never
    qualifies.
    """
    if not candidates:
        raise ValueError("need at least one candidate granularity")
    if not test_sets:
        raise ValueError("need at least one test set")
    seen: dict[float, float] = {}
    for delta in sorted(candidates, reverse=True):
        apd = carve_at(delta)
        mean = mean_defined([evaluate(apd, t, target).tpr for t in test_sets])
        seen[delta] = math.nan if mean is None else mean
        if mean is not None and mean >= tpr_threshold:
            return delta
    raise NoQualifyingGranularity(seen)
