"""Sensitivity studies: granularity sweep, noisy outputs and noisy inputs.

Every random draw comes from a counter stream keyed on
``(master_seed, experiment, function, delta, sigma, fold)``, so cells are
independent, can run in any order or process, and rerun bit-identically.
Test set ``k`` is shared by all cells so comparisons across cells are paired.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import rng
from .carve import carve, refine
from .core import ApproxPositiveDomain, OutputModel, TargetRange, VariableSpec, evaluate_many
from .evaluation import EvalReport, contingency, evaluate, mean_defined, sample_uniform, TestSet
from .model import BENCHMARKS, parse_expression

DEFAULT_DELTAS = (0.05, 0.1, 0.2, 0.275, 0.4, 0.7)
DEFAULT_SIGMAS = (0.0, 0.05, 0.1, 0.2)
EXPERIMENTS = ("granularity", "noisy-output", "noisy-input")


class NoisyOutputModel:
    """``base(x) + sigma * z`` with ``z`` drawn in call order from a keyed normal stream."""

    concurrency_safe = False

    def __init__(self, base: OutputModel, sigma: float, key: int):
        if not sigma >= 0:
            raise ValueError(f"sigma must be nonnegative, got {sigma}")
        self.base = base
        self.sigma = sigma
        self.arity = base.arity
        self.stream = rng.NormalStream(key)

    def evaluate(self, point: Sequence[float]) -> float:
        return float(self.evaluate_batch(np.asarray([point], dtype=float))[0])

    def evaluate_batch(self, points: np.ndarray) -> np.ndarray:
        y = evaluate_many(self.base, points)
        z = self.stream.draw(y.shape[0])
        return y + self.sigma * z


@dataclass(frozen=True)
class SweepConfig:
    functions: dict = field(default_factory=lambda: dict(BENCHMARKS))
    variables: tuple = (VariableSpec("x1", -1.0, 1.0), VariableSpec("x2", -1.0, 1.0))
    target: TargetRange = TargetRange.closed(0.0, 1.0)
    deltas: tuple = DEFAULT_DELTAS
    sigmas: tuple = DEFAULT_SIGMAS
    folds: int = 5
    test_size: int = 10_000
    master_seed: int = 0
    refine_inner_delta: float | None = None

    def __post_init__(self) -> None:
        if any(not d > 0 for d in self.deltas):
            raise ValueError("all deltas must be positive")
        if any(not s >= 0 for s in self.sigmas):
            raise ValueError("all sigmas must be nonnegative")
        if self.folds < 1 or self.test_size < 1:
            raise ValueError("folds and test_size must be positive")

    def fold_seed(self, fold: int) -> int:
        return rng.derive_key("fold", self.master_seed, fold)

    def model(self, function_id: str):
        return parse_expression(self.functions[function_id], self.variables)


@dataclass(frozen=True)
class ExperimentResult:
    experiment: str
    function: str
    delta: float
    sigma: float
    reports: tuple  # ((seed, EvalReport), ...)
    baseline: tuple = ()  # noiseless-input reports on the same folds (noisy-input only)

    @property
    def mean_tpr(self) -> float | None:
        return mean_defined([r.tpr for _, r in self.reports])

    @property
    def mean_accuracy(self) -> float:
        return math.fsum(r.accuracy for _, r in self.reports) / len(self.reports)

    @property
    def undefined_folds(self) -> int:
        return sum(r.tpr is None for _, r in self.reports)

    @property
    def tpr_diff(self) -> float | None:
        """Noiseless-input mean TPR minus noisy-input mean TPR."""
        if not self.baseline:
            return None
        clean = mean_defined([r.tpr for _, r in self.baseline])
        noisy = self.mean_tpr
        return None if clean is None or noisy is None else clean - noisy


def _test_points(cfg: SweepConfig, fold: int) -> tuple[int, np.ndarray]:
    seed = cfg.fold_seed(fold)
    return seed, sample_uniform(cfg.variables, cfg.test_size, seed)


def _carve(cfg: SweepConfig, model, delta: float) -> ApproxPositiveDomain:
    apd, _ = carve(cfg.variables, model, cfg.target, delta)
    if cfg.refine_inner_delta is not None:
        apd = refine(apd, model, cfg.target, cfg.refine_inner_delta)
    return apd


def _granularity_cell(cfg: SweepConfig, fid: str, delta: float) -> list[ExperimentResult]:
    f = cfg.model(fid)
    apd = _carve(cfg, f, delta)
    reports = []
    for k in range(cfg.folds):
        seed, pts = _test_points(cfg, k)
        reports.append((seed, evaluate(apd, TestSet(pts, evaluate_many(f, pts), seed), cfg.target)))
    return [ExperimentResult("granularity", fid, delta, 0.0, tuple(reports))]


def _noisy_output_cell(cfg: SweepConfig, fid: str, delta: float, sigma: float) -> list[ExperimentResult]:
    f = cfg.model(fid)
    reports = []
    for k in range(cfg.folds):
        key = rng.derive_key(cfg.master_seed, "noisy-output", fid, delta, sigma, k)
        # labelling and refinement both see the noisy model; the test outputs are noiseless
        apd = _carve(cfg, NoisyOutputModel(f, sigma, key), delta)
        seed, pts = _test_points(cfg, k)
        reports.append((seed, evaluate(apd, TestSet(pts, evaluate_many(f, pts), seed), cfg.target)))
    return [ExperimentResult("noisy-output", fid, delta, sigma, tuple(reports))]


def _noisy_input_cell(cfg: SweepConfig, fid: str, delta: float) -> list[ExperimentResult]:
    f = cfg.model(fid)
    apd = _carve(cfg, f, delta)
    m = len(cfg.variables)
    folds = []
    for k in range(cfg.folds):
        seed, pts = _test_points(cfg, k)
        y = evaluate_many(f, pts)
        clean = contingency(apd.contains_array(pts), np.isfinite(y) & cfg.target.contains_array(y))
        folds.append((seed, pts, apd.contains_array(pts), clean))
    baseline = tuple((seed, clean) for seed, _, _, clean in folds)
    out = []
    for sigma in cfg.sigmas:
        reports = []
        for k, (seed, pts, accepted, _) in enumerate(folds):
            key = rng.derive_key(cfg.master_seed, "noisy-input", fid, delta, sigma, k)
            z = rng.standard_normal(key, 0, pts.shape[0] * m).reshape(pts.shape)
            y = evaluate_many(f, pts + sigma * z)
            reports.append((seed, contingency(accepted, np.isfinite(y) & cfg.target.contains_array(y))))
        out.append(ExperimentResult("noisy-input", fid, delta, sigma, tuple(reports), baseline))
    return out


def _cells(cfg: SweepConfig, experiment: str) -> list[tuple[Callable, tuple]]:
    if experiment == "granularity":
        return [(_granularity_cell, (cfg, fid, d)) for fid in cfg.functions for d in cfg.deltas]
    if experiment == "noisy-output":
        return [
            (_noisy_output_cell, (cfg, fid, d, s))
            for fid in cfg.functions
            for d in cfg.deltas
            for s in cfg.sigmas
        ]
    if experiment == "noisy-input":
        return [(_noisy_input_cell, (cfg, fid, d)) for fid in cfg.functions for d in cfg.deltas]
    raise ValueError(f"unknown experiment {experiment!r}; choose from {EXPERIMENTS}")


def _call(job: tuple[Callable, tuple]) -> list[ExperimentResult]:
    fn, args = job
    return fn(*args)


def run_experiment(cfg: SweepConfig, experiment: str, jobs: int = 1) -> list[ExperimentResult]:
    """Run every cell of one experiment; result order is fixed regardless of ``jobs``."""
    cells = _cells(cfg, experiment)
    if jobs <= 1 or len(cells) == 1:
        chunks = [_call(c) for c in cells]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_call, cells))
    return [r for chunk in chunks for r in chunk]


def run_granularity_sweep(cfg: SweepConfig, jobs: int = 1) -> list[ExperimentResult]:
    return run_experiment(cfg, "granularity", jobs)


def run_noisy_output(cfg: SweepConfig, jobs: int = 1) -> list[ExperimentResult]:
    return run_experiment(cfg, "noisy-output", jobs)


def run_noisy_inputs(cfg: SweepConfig, jobs: int = 1) -> list[ExperimentResult]:
    return run_experiment(cfg, "noisy-input", jobs)


# --- CSV ----------------------------------------------------------------------

PER_SEED_COLUMNS = ["function", "delta", "sigma", "experiment", "seed", "tp", "fp", "fn", "tn", "tpr", "accuracy"]
AGGREGATE_COLUMNS = ["function", "delta", "sigma", "experiment", "mean_tpr", "mean_accuracy", "tpr_diff", "undefined_folds"]


def _fmt(x) -> str:
    if x is None:
        return "undefined"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def per_seed_csv(results: Sequence[ExperimentResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PER_SEED_COLUMNS)
    for res in results:
        for seed, r in res.reports:
            w.writerow(
                [_fmt(v) for v in (res.function, res.delta, res.sigma, res.experiment, seed,
                                   r.tp, r.fp, r.fn, r.tn, r.tpr, r.accuracy)]
            )
    return buf.getvalue()


def aggregate_csv(results: Sequence[ExperimentResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(AGGREGATE_COLUMNS)
    for res in results:
        tpr_diff = res.tpr_diff if res.experiment == "noisy-input" else ""
        w.writerow(
            [_fmt(v) for v in (res.function, res.delta, res.sigma, res.experiment,
                               res.mean_tpr, res.mean_accuracy)]
            + [_fmt(tpr_diff) if tpr_diff != "" else "", res.undefined_folds]
        )
    return buf.getvalue()


def results_table(results: Sequence[ExperimentResult]) -> dict[tuple[str, float, float], ExperimentResult]:
    """Index results by ``(function, delta, sigma)``."""
    return {(r.function, r.delta, r.sigma): r for r in results}
