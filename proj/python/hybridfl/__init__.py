"""Hybrid federated fraud detection (C++ core)."""

from ._hybridfl import (
    ConfigError,
    DataError,
    Error,
    ExperimentConfig,
    PreparedData,
    ShapeError,
    TrainResult,
    UndefinedMetricError,
    UsageError,
    auprc,
    bce_loss,
    evaluate,
    focal_loss,
    pr_curve,
    prepare_data,
    prf_at_threshold,
    score,
    train,
)

__all__ = [
    "ConfigError",
    "DataError",
    "Error",
    "ExperimentConfig",
    "PreparedData",
    "ShapeError",
    "TrainResult",
    "UndefinedMetricError",
    "UsageError",
    "auprc",
    "bce_loss",
    "evaluate",
    "focal_loss",
    "pr_curve",
    "prepare_data",
    "prf_at_threshold",
    "score",
    "train",
]
