"""Command-line frontend.

Exit codes: 0 ok, 2 config/validation error, 3 model protocol error,
4 no qualifying granularity.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .carve import carve, refine
from .config import ConfigError, ProblemConfig, load_config
from .core import ApproxPositiveDomain
from .evaluation import NoQualifyingGranularity, evaluate, generate_test_set, select_granularity
from .experiments import EXPERIMENTS, aggregate_csv, per_seed_csv, run_experiment
from .grid import GridTooLarge
from .model import ModelProtocolError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_MODEL = 3
EXIT_NO_GRANULARITY = 4


def _write_text(path: str | Path, text: str) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def _load_apd(path: str) -> ApproxPositiveDomain:
    try:
        return ApproxPositiveDomain.from_json(json.loads(Path(path).read_text(encoding="utf-8")))
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError("apd", f"cannot load {path}: {exc}") from None


def _config(args) -> ProblemConfig:
    cfg = load_config(args.config)
    return cfg.with_overrides(
        seed=getattr(args, "seed", None),
        margin=getattr(args, "margin", None),
        inner_delta=getattr(args, "inner_delta", None),
    )


def _closing(model):
    close = getattr(model, "close", None)
    if close is not None:
        close()


def cmd_carve(args) -> int:
    cfg = _config(args)
    model = cfg.make_model()
    try:
        apd, _ = carve(cfg.variables, model, cfg.carve_target, cfg.granularity, cfg.grid_cap)
    finally:
        _closing(model)
    _write_text(args.out, _dump_json(apd.to_json()))
    sys.stdout.write(apd.report())
    print(f"{len(apd.boxes)} boxes written to {args.out}", file=sys.stderr)
    return EXIT_OK


def cmd_eval(args) -> int:
    cfg = _config(args)
    apd = _load_apd(args.apd)
    model = cfg.make_model()
    try:
        test = generate_test_set(cfg.variables, cfg.test_size, model, cfg.seed)
    finally:
        _closing(model)
    report = evaluate(apd, test, cfg.target)
    sys.stdout.write(_dump_json(report.to_json()) if args.json else report.table())
    return EXIT_OK


def cmd_refine(args) -> int:
    cfg = _config(args)
    apd = _load_apd(args.apd)
    inner = cfg.inner_delta if cfg.inner_delta is not None else apd.granularity / 4
    model = cfg.make_model()
    try:
        refined = refine(apd, model, apd.target, inner)
    finally:
        _closing(model)
    _write_text(args.out, _dump_json(refined.to_json()))
    kept = len(refined.boxes)
    print(f"kept {kept} of {len(apd.boxes)} boxes, dropped {len(apd.boxes) - kept}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _config(args)
    sweep = cfg.sweep_config()
    results = run_experiment(sweep, args.experiment, jobs=args.jobs)
    out = Path(args.out)
    stem = args.experiment.replace("-", "_")
    _write_text(out / f"{stem}_per_seed.csv", per_seed_csv(results))
    _write_text(out / f"{stem}_aggregate.csv", aggregate_csv(results))
    print(f"{len(results)} cells written to {out}", file=sys.stderr)
    return EXIT_OK


def cmd_select(args) -> int:
    cfg = _config(args)
    sel = cfg.select
    try:
        candidates = [float(x) for x in sel["candidates"]]
        threshold = float(sel["tpr_threshold"])
        folds = int(sel.get("folds", 5))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError("select", f"needs 'candidates' and 'tpr_threshold' ({exc})") from None
    if not candidates or any(not d > 0 for d in candidates) or folds < 1:
        raise ConfigError("select", "candidates must be positive and folds at least 1")
    model = cfg.make_model()
    try:
        tests = [generate_test_set(cfg.variables, cfg.test_size, model, cfg.seed + k) for k in range(folds)]
        delta = select_granularity(
            candidates,
            lambda d: carve(cfg.variables, model, cfg.carve_target, d, cfg.grid_cap)[0],
            tests,
            cfg.target,
            threshold,
        )
    finally:
        _closing(model)
    print(repr(delta))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="posdomain", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out_required=False):
        sp.add_argument("--config", required=True, help="problem config JSON")
        sp.add_argument("--seed", type=int, help="override config seed")
        sp.add_argument("--margin", type=float, help="override config target margin")
        if out_required:
            sp.add_argument("--out", required=True)

    sp = sub.add_parser("carve", help="grid, label, train and extract boxes")
    common(sp, out_required=True)
    sp.set_defaults(func=cmd_carve)

    sp = sub.add_parser("eval", help="contingency table of an APD on a seeded test set")
    sp.add_argument("apd", help="APD JSON written by carve or refine")
    common(sp)
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("refine", help="keep only boxes whose inner grid maps into the target")
    sp.add_argument("apd")
    common(sp, out_required=True)
    sp.add_argument("--inner-delta", type=float, dest="inner_delta")
    sp.set_defaults(func=cmd_refine)

    sp = sub.add_parser("sweep", help="sensitivity experiments to CSV")
    common(sp, out_required=True)
    sp.add_argument("--experiment", choices=EXPERIMENTS, default="granularity")
    sp.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("select", help="largest granularity meeting a mean-TPR threshold")
    common(sp)
    sp.set_defaults(func=cmd_select)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, GridTooLarge) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ModelProtocolError as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except NoQualifyingGranularity as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_GRANULARITY


if __name__ == "__main__":
    sys.exit(main())
