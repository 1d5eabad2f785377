"""Grouped confusion counts, equal-opportunity rates and accuracy."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .data_ingest import FairnessDataset
from .errors import ContractError
from .mitigation import ClassifiedScores


@dataclass(frozen=True, eq=False)
class GroupedConfusion:
    """Counts indexed ``counts[a, y, pred]``; ``excluded`` = rows not classified."""

    counts: np.ndarray
    excluded: int = 0

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=np.int64).reshape(2, 2, 2)
        if (c < 0).any():
            raise ContractError("confusion counts must be non-negative")
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)

    @property
    def n_classified(self) -> int:
        return int(self.counts.sum())

    def cell(self, a: int, y: int, pred: int) -> int:
        return int(self.counts[a, y, pred])

    def as_dict(self) -> dict:
        return {
            "cells": [
                {"a": a, "y": y, "pred": p, "count": self.cell(a, y, p)}
                for a in (0, 1)
                for y in (0, 1)
                for p in (0, 1)
            ],
            "n_classified": self.n_classified,
            "excluded": self.excluded,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GroupedConfusion":
        counts = np.zeros((2, 2, 2), dtype=np.int64)
        for c in d["cells"]:
            counts[c["a"], c["y"], c["pred"]] = c["count"]
        return cls(counts, d.get("excluded", 0))


def grouped_confusion(data: FairnessDataset, classes: ClassifiedScores) -> GroupedConfusion:
    if classes.dataset_fingerprint != data.fingerprint:
        raise ContractError(f"classes belong to dataset {classes.dataset_fingerprint}, not {data.fingerprint}")
    use = data.row_mask & classes.classified
    a = data.a[use].astype(np.int64)
    y = data.y[use].astype(np.int64)
    pred = classes.classes[use].astype(np.int64)
    counts = np.bincount(a * 4 + y * 2 + pred, minlength=8)
    return GroupedConfusion(counts, excluded=int(data.n - use.sum()))


class EqualOpportunity(NamedTuple):
    rate0: float | None
    rate1: float | None
    gap: float | None
    note: str = ""


def equal_opportunity(conf: GroupedConfusion) -> EqualOpportunity:
    """True-positive rate per protected group and their absolute difference.

    A group without positive rows gets rate ``None`` and an explanatory note.
    """
    rates, notes = [], []
    for g in (0, 1):
        pos = conf.cell(g, 1, 0) + conf.cell(g, 1, 1)
        if pos == 0:
            rates.append(None)
            notes.append(f"no rows with a={g}, y=1")
        else:
            rates.append(conf.cell(g, 1, 1) / pos)
    gap = abs(rates[1] - rates[0]) if None not in rates else None
    return EqualOpportunity(rates[0], rates[1], gap, "; ".join(notes))


def accuracy(conf: GroupedConfusion) -> float:
    n = conf.n_classified
    if n == 0:
        raise ContractError("accuracy of an empty confusion table")
    correct = conf.counts[:, 0, 0].sum() + conf.counts[:, 1, 1].sum()
    return float(correct / n)


@dataclass(frozen=True)
class SummaryRow:
    split: str
    variant: str
    threshold: float
    eo_rate_group0: float | None
    eo_rate_group1: float | None
    eo_gap: float | None
    overall_accuracy: float

    @classmethod
    def from_confusion(cls, split: str, variant: str, threshold: float, conf: GroupedConfusion) -> "SummaryRow":
        eo = equal_opportunity(conf)
        return cls(split, variant, threshold, eo.rate0, eo.rate1, eo.gap, accuracy(conf))


# ------------------------------------------------------------------ rendering


def render_confusion(conf: GroupedConfusion, title: str, a_labels=("0", "1"), y_labels=("0", "1")) -> str:
    """Aligned text table: rows (a, y), columns pred 0 / pred 1."""
    wa = max(len("a"), *(len(f"{l} (0)") for l in a_labels))
    wy = max(len("y"), *(len(f"{l} (0)") for l in y_labels))
    h0, h1 = f"{y_labels[0]} (0)", f"{y_labels[1]} (1)"
    wc = max(8, len(h0), len(h1))
    lines = [title, f"{'a':<{wa}}  {'y':<{wy}}  {'pred':>{wc}}", f"{'':<{wa}}  {'':<{wy}}  {h0:>{wc}}  {h1:>{wc}}"]
    for a in (0, 1):
        for y in (0, 1):
            lines.append(
                f"{a_labels[a] + f' ({a})':<{wa}}  {y_labels[y] + f' ({y})':<{wy}}  "
                f"{conf.cell(a, y, 0):>{wc},}  {conf.cell(a, y, 1):>{wc},}"
            )
    eo = equal_opportunity(conf)
    fmt = lambda r: "n/a" if r is None else f"{r:.4f}"  # noqa: E731
    lines.append(
        f"TPR a=0: {fmt(eo.rate0)}  TPR a=1: {fmt(eo.rate1)}  gap: {fmt(eo.gap)}  "
        f"accuracy: {accuracy(conf):.4f}  classified: {conf.n_classified:,}  excluded: {conf.excluded:,}"
    )
    return "\n".join(lines) + "\n"


CSV_FIELDS = ("table", "a", "y", "pred", "count")


def confusions_to_csv(tables: dict[str, GroupedConfusion]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for name, conf in tables.items():
        for a in (0, 1):
            for y in (0, 1):
                for p in (0, 1):
                    w.writerow((name, a, y, p, conf.cell(a, y, p)))
    return buf.getvalue()


def confusions_from_csv(text: str) -> dict[str, GroupedConfusion]:
    counts: dict[str, np.ndarray] = {}
    for row in csv.DictReader(io.StringIO(text)):
        c = counts.setdefault(row["table"], np.zeros((2, 2, 2), dtype=np.int64))
        c[int(row["a"]), int(row["y"]), int(row["pred"])] = int(row["count"])
    return {name: GroupedConfusion(c) for name, c in counts.items()}


def render_summary(rows: list[SummaryRow]) -> str:
    head = f"{'Data':<6}{'Scores':<11}{'Threshold':>10}{'TPR a=0':>10}{'TPR a=1':>10}{'Gap':>9}{'Accuracy':>10}"
    fmt = lambda r: "n/a" if r is None else f"{r:.4f}"  # noqa: E731
    lines = ["Comparison of accuracy performance", head]
    for r in rows:
        lines.append(
            f"{r.split:<6}{r.variant:<11}{r.threshold:>10.4f}{fmt(r.eo_rate_group0):>10}"
            f"{fmt(r.eo_rate_group1):>10}{fmt(r.eo_gap):>9}{r.overall_accuracy:>10.4f}"
        )
    return "\n".join(lines) + "\n"
