"""JSON problem configuration."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

from .core import EmptyTarget, Interval, TargetRange, VariableSpec, shrink_target
from .experiments import DEFAULT_DELTAS, DEFAULT_SIGMAS, SweepConfig
from .grid import DEFAULT_GRID_CAP
from .model import BENCHMARKS, ExternalModel, parse_expression


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"config field {field_name!r}: {message}")
        self.field = field_name


@dataclass(frozen=True)
class ProblemConfig:
    variables: tuple[VariableSpec, ...]
    target: TargetRange
    granularity: float
    expr: str | None = None
    command: tuple[str, ...] | None = None
    timeout: float = 10.0
    margin: float = 0.0
    margin_sides: str = "upper"
    seed: int = 0
    test_size: int = 10_000
    grid_cap: int = DEFAULT_GRID_CAP
    inner_delta: float | None = None
    sweep: dict = field(default_factory=dict)
    select: dict = field(default_factory=dict)

    @property
    def carve_target(self) -> TargetRange:
        """The target after the model-error margin is taken off."""
        if self.margin == 0:
            return self.target
        return shrink_target(self.target, self.margin, self.margin_sides)

    def make_model(self):
        if self.expr is not None:
            return parse_expression(self.expr, self.variables)
        return ExternalModel(self.command, len(self.variables), self.timeout)

    def with_overrides(self, **kw: Any) -> "ProblemConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        cfg = replace(self, **kw)
        _check_scalars(cfg)
        return cfg

    def sweep_config(self) -> SweepConfig:
        sw = self.sweep
        if "functions" in sw:
            functions = sw["functions"]
            if not isinstance(functions, dict) or not functions:
                raise ConfigError("sweep.functions", "must be a nonempty object of id -> expression")
        elif self.expr is not None:
            functions = {"model": self.expr}
        else:
            raise ConfigError("model", "sweeps need expression models, not external commands")
        for fid, src in functions.items():
            _parse_expr(f"sweep.functions.{fid}", src, self.variables)
        try:
            return SweepConfig(
                functions=dict(functions),
                variables=self.variables,
                target=self.target,
                deltas=tuple(_num_list("sweep.deltas", sw.get("deltas", DEFAULT_DELTAS))),
                sigmas=tuple(_num_list("sweep.sigmas", sw.get("sigmas", DEFAULT_SIGMAS))),
                folds=_int("sweep.folds", sw.get("folds", 5), 1),
                test_size=self.test_size,
                master_seed=self.seed,
                refine_inner_delta=sw.get("refine_inner_delta"),
            )
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError("sweep", str(exc)) from None


def _parse_expr(name: str, src: Any, variables) -> None:
    if not isinstance(src, str):
        raise ConfigError(name, "must be a string expression")
    try:
        parse_expression(src, variables)
    except ValueError as exc:
        raise ConfigError(name, str(exc)) from None


def _num(name: str, x: Any) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ConfigError(name, f"expected a number, got {x!r}")
    return float(x)


def _int(name: str, x: Any, minimum: int | None = None) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise ConfigError(name, f"expected an integer, got {x!r}")
    if minimum is not None and x < minimum:
        raise ConfigError(name, f"must be at least {minimum}, got {x}")
    return x


def _num_list(name: str, xs: Any) -> list[float]:
    if not isinstance(xs, (list, tuple)) or not xs:
        raise ConfigError(name, "expected a nonempty list of numbers")
    return [_num(f"{name}[{i}]", x) for i, x in enumerate(xs)]


def _check_scalars(cfg: ProblemConfig) -> None:
    if not (math.isfinite(cfg.granularity) and cfg.granularity > 0):
        raise ConfigError("granularity", f"must be a positive number, got {cfg.granularity}")
    if not (math.isfinite(cfg.margin) and cfg.margin >= 0):
        raise ConfigError("margin", f"must be a nonnegative number, got {cfg.margin}")
    if cfg.margin_sides not in ("upper", "lower", "both"):
        raise ConfigError("margin_sides", "must be 'upper', 'lower' or 'both'")
    if cfg.test_size < 1:
        raise ConfigError("test_size", "must be positive")
    if cfg.grid_cap < 1:
        raise ConfigError("grid_cap", "must be positive")
    if cfg.inner_delta is not None and not (math.isfinite(cfg.inner_delta) and cfg.inner_delta > 0):
        raise ConfigError("inner_delta", "must be a positive number")
    if not (math.isfinite(cfg.timeout) and cfg.timeout > 0):
        raise ConfigError("model.timeout", "must be a positive number")
    try:
        cfg.carve_target
    except EmptyTarget as exc:
        raise ConfigError("margin", str(exc)) from None


def config_from_dict(obj: Any) -> ProblemConfig:
    if not isinstance(obj, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    for key in ("variables", "target", "granularity", "model"):
        if key not in obj:
            raise ConfigError(key, "missing")

    raw_vars = obj["variables"]
    if not isinstance(raw_vars, list) or not raw_vars:
        raise ConfigError("variables", "expected a nonempty list")
    variables = []
    for i, v in enumerate(raw_vars):
        try:
            variables.append(VariableSpec(str(v["name"]), _num(f"variables[{i}].lo", v["lo"]),
                                          _num(f"variables[{i}].hi", v["hi"])))
        except ConfigError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"variables[{i}]", str(exc)) from None
    if len({v.name for v in variables}) != len(variables):
        raise ConfigError("variables", "names must be unique")

    raw_target = obj["target"]
    if isinstance(raw_target, dict):
        raw_target = [raw_target]
    try:
        target = TargetRange(tuple(Interval.from_json(t) for t in raw_target))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError("target", str(exc)) from None

    model = obj["model"]
    if not isinstance(model, dict):
        raise ConfigError("model", "expected an object with 'expr' or 'command'")
    expr = command = None
    timeout = 10.0
    if "expr" in model:
        _parse_expr("model.expr", model["expr"], variables)
        expr = model["expr"]
    elif "command" in model:
        cmd = model["command"]
        if not isinstance(cmd, list) or not cmd or not all(isinstance(c, str) for c in cmd):
            raise ConfigError("model.command", "expected a nonempty list of strings")
        command = tuple(cmd)
        timeout = _num("model.timeout", model.get("timeout", 10.0))
    else:
        raise ConfigError("model", "needs 'expr' or 'command'")

    for section in ("sweep", "select"):
        if section in obj and not isinstance(obj[section], dict):
            raise ConfigError(section, "expected an object")

    inner = obj.get("inner_delta")
    cfg = ProblemConfig(
        variables=tuple(variables),
        target=target,
        granularity=_num("granularity", obj["granularity"]),
        expr=expr,
        command=command,
        timeout=timeout,
        margin=_num("margin", obj.get("margin", 0.0)),
        margin_sides=str(obj.get("margin_sides", "upper")),
        seed=_int("seed", obj.get("seed", 0)),
        test_size=_int("test_size", obj.get("test_size", 10_000), 1),
        grid_cap=_int("grid_cap", obj.get("grid_cap", DEFAULT_GRID_CAP), 1),
        inner_delta=None if inner is None else _num("inner_delta", inner),
        sweep=dict(obj.get("sweep", {})),
        select=dict(obj.get("select", {})),
    )
    _check_scalars(cfg)
    return cfg


def load_config(path: str | Path) -> ProblemConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc}") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"invalid JSON: {exc}") from None
    return config_from_dict(obj)


def band_example() -> dict:
    """The two-variable linear example: x1 + x2 over [-1, 1]^2, target [0, 1], delta 0.2."""
    return {
        "variables": [{"name": "x1", "lo": -1.0, "hi": 1.0}, {"name": "x2", "lo": -1.0, "hi": 1.0}],
        "target": [{"lo": 0.0, "hi": 1.0, "lo_closed": True, "hi_closed": True}],
        "granularity": 0.2,
        "model": {"expr": BENCHMARKS["linear"]},
        "seed": 0,
        "test_size": 10000,
    }
