"""Detect and remove protected-attribute bias in black-box classifier scores
with a recursive path model, then re-threshold."""

__version__ = "0.1.0"

from .data_ingest import (  # noqa: E402
    EncodingSchema,
    FairnessDataset,
    RawTable,
    SchemaConfig,
    build_schema,
    encode,
    load_adult_csv,
    load_csv,
)
from .errors import ConfigError, ContractError, ConvergenceError, IngestionError, PathFairError  # noqa: E402
from .metrics import GroupedConfusion, accuracy, equal_opportunity, grouped_confusion  # noqa: E402
from .mitigation import MitigationPolicy, apply_mitigation, classify, derive_policy  # noqa: E402
from .path_model import BiasVerdict, PathModelFit, fit_path_model, ols_with_se, test_bias  # noqa: E402
from .report import AuditConfig, FairnessReport, render_tables, run_audit  # noqa: E402
from .scorer import LogisticModel, ScoreSet, fit_logistic, load_external_scores, predict  # noqa: E402
from .synth import SynthSpec, calibration_trial, generate  # noqa: E402

__all__ = [
    "AuditConfig",
    "BiasVerdict",
    "ConfigError",
    "ContractError",
    "ConvergenceError",
    "EncodingSchema",
    "FairnessDataset",
    "FairnessReport",
    "GroupedConfusion",
    "IngestionError",
    "LogisticModel",
    "MitigationPolicy",
    "PathFairError",
    "PathModelFit",
    "RawTable",
    "SchemaConfig",
    "ScoreSet",
    "SynthSpec",
    "accuracy",
    "apply_mitigation",
    "build_schema",
    "calibration_trial",
    "classify",
    "derive_policy",
    "encode",
    "equal_opportunity",
    "fit_logistic",
    "fit_path_model",
    "generate",
    "grouped_confusion",
    "load_adult_csv",
    "load_csv",
    "load_external_scores",
    "ols_with_se",
    "predict",
    "render_tables",
    "run_audit",
    "test_bias",
]
