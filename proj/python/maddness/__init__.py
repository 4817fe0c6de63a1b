"""Approximate matrix products from learned hash trees and 8-bit lookup tables."""

import json as _json

from ._maddness import (
    Model,
    ParseError,
    UnsupportedVersionError,
    bias_correction,
    estimate_block_sum,
    generalization_bound,
    generate_task,
    hypothesis_complexity,
    mean_pair,
    nmse,
    optimal_split_threshold,
    pq_apply,
    pq_train,
    train,
)


def run_benchmark(**config):
    """Run the benchmark harness; keyword names match the JSON config keys."""
    from ._maddness import run_benchmark as _run

    return _json.loads(_run(_json.dumps(config)))


__all__ = [
    "Model",
    "ParseError",
    "UnsupportedVersionError",
    "bias_correction",
    "estimate_block_sum",
    "generalization_bound",
    "generate_task",
    "hypothesis_complexity",
    "mean_pair",
    "nmse",
    "optimal_split_threshold",
    "pq_apply",
    "pq_train",
    "run_benchmark",
    "train",
]
