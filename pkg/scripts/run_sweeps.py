"""Run the granularity, noisy-output and noisy-input studies on the four benchmarks.

Writes ``<exp>_per_seed.csv`` and ``<exp>_aggregate.csv`` into the output
directory and prints the mean TPR per (function, delta, sigma).

    python scripts/run_sweeps.py --out results [--jobs 4] [--seed 0]
"""

import argparse
from pathlib import Path

from posdomain.experiments import EXPERIMENTS, SweepConfig, aggregate_csv, per_seed_csv, run_experiment


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("results"))
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--folds", type=int, default=5)
    ap.add_argument("--experiment", choices=EXPERIMENTS, action="append")
    args = ap.parse_args()

    cfg = SweepConfig(master_seed=args.seed, folds=args.folds)
    args.out.mkdir(parents=True, exist_ok=True)
    for exp in args.experiment or EXPERIMENTS:
        results = run_experiment(cfg, exp, jobs=args.jobs)
        stem = exp.replace("-", "_")
        (args.out / f"{stem}_per_seed.csv").write_text(per_seed_csv(results))
        (args.out / f"{stem}_aggregate.csv").write_text(aggregate_csv(results))
        print(f"== {exp}")
        for r in results:
            tpr = "undefined" if r.mean_tpr is None else f"{r.mean_tpr:.4f}"
            extra = "" if r.tpr_diff is None else f"  tpr_diff {r.tpr_diff:+.4f}"
            print(f"{r.function:>15}  delta {r.delta:<6} sigma {r.sigma:<5} tpr {tpr}  acc {r.mean_accuracy:.4f}{extra}")


if __name__ == "__main__":
    main()
