"""End-to-end audit: ingest, score, fit the path model, mitigate, evaluate, report."""

from __future__ import annotations

import datetime as _dt
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .data_ingest import (
    ADULT_DROPPED,
    EncodingSchema,
    FairnessDataset,
    RawTable,
    SchemaConfig,
    build_schema,
    encode,
    load_adult_csv,
    load_csv,
)
from .errors import ConfigError
from .metrics import GroupedConfusion, SummaryRow, confusions_to_csv, grouped_confusion, render_confusion, render_summary
from .mitigation import MitigationPolicy, apply_mitigation, classify, derive_policy
from .path_model import PathModelFit, fit_path_model, test_bias
from .scorer import LogisticModel, ScoreSet, fit_logistic, load_external_scores, predict

REPORT_VERSION = 1
HIST_BINS = 50


@dataclass(frozen=True)
class AuditConfig:
    train: str
    test: str | None = None
    protected: str = "sex"
    target: str = "income"
    positive_label: str = ">50K"
    group1_label: str = "Male"
    negative_label: str | None = None
    group0_label: str | None = None
    drop: tuple[str, ...] = ADULT_DROPPED
    data_format: str = "adult"
    alpha: float = 0.05
    external_scores: str | None = None
    external_test_scores: str | None = None
    round_coefficient: int | None = None
    rank_basis: str = "all"
    out: str | None = None
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.test is not None and Path(self.test).resolve() == Path(self.train).resolve():
            raise ConfigError("train and test paths must differ")
        if self.data_format not in ("adult", "csv"):
            raise ConfigError(f"unknown data format {self.data_format!r}")
        if self.rank_basis not in ("all", "valid"):
            raise ConfigError(f"unknown rank basis {self.rank_basis!r}")
        if self.external_scores and self.test and not self.external_test_scores:
            raise ConfigError("external train scores given; test split also needs --external-test-scores")
        if self.external_test_scores and not self.external_scores:
            raise ConfigError("--external-test-scores requires --external-scores")

    @property
    def schema_config(self) -> SchemaConfig:
        return SchemaConfig(
            protected=self.protected,
            target=self.target,
            positive_label=self.positive_label,
            group1_label=self.group1_label,
            negative_label=self.negative_label,
            group0_label=self.group0_label,
            drop=tuple(self.drop),
        )


def load_table(path: str, data_format: str, variant: str, target: str) -> RawTable:
    if data_format == "adult":
        return load_adult_csv(path, variant, target=target)
    return load_csv(path)


@dataclass
class FairnessReport:
    schema: EncodingSchema
    fit: PathModelFit
    policy: MitigationPolicy
    confusions: dict[str, GroupedConfusion]
    summary: list[SummaryRow]
    rows: dict[str, dict[str, int]]
    config: AuditConfig
    model: LogisticModel | None = None
    plot_data: dict = field(default_factory=dict)
    notices: list[str] = field(default_factory=list)
    generated_at: str = ""

    @property
    def schema_fingerprint(self) -> str:
        return self.schema.fingerprint

    def to_dict(self) -> dict:
        model = None
        if self.model is not None:
            model = {
                "iterations": self.model.iterations,
                "converged": self.model.converged,
                "deviance": self.model.deviance,
                "dropped_columns": list(self.model.dropped),
                "diverging_coefficients": list(self.model.diverging),
                "coefficients": self.model.as_dict(),
            }
        return {
            "report_version": REPORT_VERSION,
            "tool_version": __version__,
            "generated_at": self.generated_at,
            "config": {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self.config).items()},
            "schema_fingerprint": self.schema_fingerprint,
            "labels": {
                "protected": {"column": self.schema.protected.name, "levels": list(self.schema.protected.levels)},
                "target": {"column": self.schema.target.name, "levels": list(self.schema.target.levels)},
            },
            "rows": self.rows,
            "scorer": {"kind": "builtin-logistic" if self.model else "external", "model": model},
            "path_model": self.fit.as_dict(),
            "policy": self.policy.as_dict(),
            "confusions": {k: c.as_dict() for k, c in self.confusions.items()},
            "summary": [asdict(r) for r in self.summary],
            "plot_data": self.plot_data,
            "notices": self.notices,
        }

    def to_json(self) -> str:
        return dumps_json(self.to_dict()) + "\n"


# ------------------------------------------------------------------ JSON


def _fmt_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        return "null"
    return format(x, ".17g")


def dumps_json(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with every float written at 17 significant digits; NaN/inf become null."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps_json(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(dumps_json(v, indent, _level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps_json(v, indent, _level + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if obj is None:
        return "null"
    return json.dumps(str(obj))


# ------------------------------------------------------------------ pipeline


def _histograms(data: FairnessDataset, scores: ScoreSet) -> dict:
    out = {}
    for variant, values in (("raw", scores.raw), ("mitigated", scores.mitigated)):
        v = values[data.row_mask]
        edges = np.histogram_bin_edges(v, bins=HIST_BINS)
        out[variant] = {
            "bin_edges": edges.tolist(),
            "counts_a0": np.histogram(v[data.a[data.row_mask] == 0], bins=edges)[0].tolist(),
            "counts_a1": np.histogram(v[data.a[data.row_mask] == 1], bins=edges)[0].tolist(),
        }
    return out


def _row_counts(table: RawTable, data: FairnessDataset) -> dict[str, int]:
    return {"raw": len(table), "valid": data.n_valid, "excluded": data.n - data.n_valid}


def run_audit(config: AuditConfig, write: bool = True) -> FairnessReport:
    """Run the full pipeline; writes report files into ``config.out`` when set."""
    train_table = load_table(config.train, config.data_format, "train", config.target)
    schema = build_schema(train_table, config.schema_config)
    train = encode(train_table, schema)

    model = None
    if config.external_scores:
        train_scores = load_external_scores(config.external_scores, train)
    else:
        model = fit_logistic(train)
        train_scores = predict(model, train)

    fit = fit_path_model(train.a, train.y, train_scores.raw)
    verdict = test_bias(fit, config.alpha)
    policy = derive_policy(
        fit, verdict, train_scores, train, rank_basis=config.rank_basis, round_digits=config.round_coefficient
    )

    splits = [("train", train_table, train, train_scores)]
    notices = []
    if config.test:
        test_table = load_table(config.test, config.data_format, "test", config.target)
        test = encode(test_table, schema)
        test_scores = (
            load_external_scores(config.external_test_scores, test) if config.external_scores else predict(model, test)
        )
        splits.append(("test", test_table, test, test_scores))
    else:
        notices.append("no test split configured; test tables omitted")
    if model is not None and model.diverging:
        notices.append(f"logistic scorer: diverging coefficients (separation) {', '.join(model.diverging)}")

    confusions, summary, rows, plots = {}, [], {}, {}
    for split, table, data, scores in splits:
        scores = apply_mitigation(scores, data, policy)
        rows[split] = _row_counts(table, data)
        plots[split] = _histograms(data, scores)
        for variant, tau in (("raw", policy.raw_threshold), ("mitigated", policy.mitigated_threshold)):
            conf = grouped_confusion(data, classify(scores, variant, tau))
            confusions[f"{split}_{variant}"] = conf
            summary.append(SummaryRow.from_confusion(split, variant, tau, conf))

    report = FairnessReport(
        schema=schema,
        fit=fit,
        policy=policy,
        confusions=confusions,
        summary=summary,
        rows=rows,
        config=config,
        model=model,
        plot_data={"bins": HIST_BINS, **plots},
        notices=notices,
        generated_at=_dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    )
    if write and config.out:
        write_report(report, config.out)
    return report


TABLE_TITLES = {
    "train_raw": "Classification based on raw scores (train)",
    "train_mitigated": "Classification based on mitigated scores (train)",
    "test_raw": "Classification based on raw scores (test)",
    "test_mitigated": "Classification based on mitigated scores (test)",
}


def render_tables(report: FairnessReport) -> str:
    a_labels = report.schema.protected.levels
    y_labels = report.schema.target.levels
    parts = [report.fit.dumps()]
    p = report.policy
    parts.append(
        f"Bias test: {p.verdict.coefficient} z = {p.verdict.z:.3f}, "
        f"{'biased' if p.verdict.biased else 'not biased'} at alpha = {p.verdict.alpha}\n"
        f"Mitigation: score - {p.bias_coefficient:.6g} * a; thresholds raw {p.raw_threshold:.4f}, "
        f"mitigated {p.mitigated_threshold:.4f} (rank {p.threshold_rank})\n"
    )
    for key, title in TABLE_TITLES.items():
        if key in report.confusions:
            parts.append(render_confusion(report.confusions[key], title, a_labels, y_labels))
    parts.append(render_summary(report.summary))
    parts += [f"Note: {n}\n" for n in report.notices]
    return "\n".join(parts)


def write_report(report: FairnessReport, out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(report.to_json())
    (out / "tables.txt").write_text(render_tables(report))
    (out / "tables.csv").write_text(confusions_to_csv(report.confusions))
    (out / "policy.txt").write_text(report.policy.dumps())
    (out / "schema.txt").write_text(report.schema.dumps())
