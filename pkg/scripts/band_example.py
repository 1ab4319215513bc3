"""Carve x1 + x2 over [-1, 1]^2 into boxes for target [0, 1], then score it.

    python scripts/band_example.py [--delta 0.2] [--seed 0] [--refine 0.05]
"""

import argparse

from posdomain import TargetRange, VariableSpec, parse_expression
from posdomain.carve import carve, refine
from posdomain.evaluation import evaluate, generate_test_set


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--delta", type=float, default=0.2)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--test-size", type=int, default=10_000)
    ap.add_argument("--refine", type=float, metavar="INNER_DELTA")
    args = ap.parse_args()

    variables = (VariableSpec("x1", -1.0, 1.0), VariableSpec("x2", -1.0, 1.0))
    target = TargetRange.closed(0.0, 1.0)
    f = parse_expression("x1 + x2", variables)

    apd, tree = carve(variables, f, target, args.delta)
    if args.refine is not None:
        before = len(apd.boxes)
        apd = refine(apd, f, inner_delta=args.refine)
        print(f"refinement kept {len(apd.boxes)} of {before} boxes")
    print(apd.report(), end="")
    report = evaluate(apd, generate_test_set(variables, args.test_size, f, args.seed), target)
    print()
    print(report.table(), end="")


if __name__ == "__main__":
    main()
