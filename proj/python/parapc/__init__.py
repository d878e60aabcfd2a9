"""Constraint-based causal structure learning (PC, stable-PC, parallel-PC) and IDA effect estimation."""

from ._core import (
    Dataset,
    correlations,
    cpdag,
    fisher_z_test,
    ida,
    learn_skeleton,
    load_dataset,
    simulate,
    __version__,
)

__all__ = [
    "Dataset",
    "correlations",
    "cpdag",
    "fisher_z_test",
    "ida",
    "learn_skeleton",
    "load_dataset",
    "simulate",
    "__version__",
]
