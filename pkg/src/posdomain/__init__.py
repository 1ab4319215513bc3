"""Approximate the set of inputs whose model output lands in a target range.

A labelled grid over the input box is fed to a fully grown decision tree;
the Inside leaves, read back as boxes, form the approximate positive domain.
"""

from .carve import apd_contains, carve, extract_boxes, refine
from .core import (
    ApproxPositiveDomain,
    Box,
    EmptyTarget,
    FunctionModel,
    Interval,
    Label,
    OutputModel,
    TargetRange,
    VariableSpec,
    shrink_target,
    target_contains,
)
from .evaluation import EvalReport, TestSet, evaluate, generate_test_set, select_granularity
from .grid import GridSpec, LabeledDataset, axis_values, build_grid, label_dataset
from .model import BENCHMARKS, Expression, ExternalModel, evaluate_expression, parse_expression
from .tree import predict, train

__all__ = [
    "ApproxPositiveDomain",
    "BENCHMARKS",
    "Box",
    "EmptyTarget",
    "EvalReport",
    "Expression",
    "ExternalModel",
    "FunctionModel",
    "GridSpec",
    "Interval",
    "Label",
    "LabeledDataset",
    "OutputModel",
    "TargetRange",
    "TestSet",
    "VariableSpec",
    "apd_contains",
    "axis_values",
    "build_grid",
    "carve",
    "evaluate",
    "evaluate_expression",
    "extract_boxes",
    "generate_test_set",
    "label_dataset",
    "parse_expression",
    "predict",
    "refine",
    "select_granularity",
    "shrink_target",
    "target_contains",
    "train",
]
