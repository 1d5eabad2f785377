"""Loading, schema inference and numeric encoding of tabular CSV data.

The Adult census files ship without a header, with a ``|`` banner line at the
top of the test file and a trailing period on the test labels (``>50K.``).
:func:`load_adult_csv` absorbs all of that; :func:`load_csv` is the plain
headered variant used for everything else (including synthetic exports).
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ContractError, IngestionError

ADULT_COLUMNS = (
    "age",
    "workclass",
    "fnlwgt",
    "education",
    "education-num",
    "marital-status",
    "occupation",
    "relationship",
    "race",
    "sex",
    "capital-gain",
    "capital-loss",
    "hours-per-week",
    "native-country",
    "income",
)
ADULT_DROPPED = ("education", "fnlwgt", "relationship")
MISSING_TOKEN = "?"


@dataclass(frozen=True)
class RawTable:
    column_names: tuple[str, ...]
    rows: tuple[tuple[str | None, ...], ...]
    source: str = ""

    def __post_init__(self):
        if len(set(self.column_names)) != len(self.column_names):
            raise IngestionError(f"duplicate column names in {self.source or 'table'}")
        width = len(self.column_names)
        for i, row in enumerate(self.rows):
            if len(row) != width:
                raise IngestionError(f"row {i} has {len(row)} cells, expected {width}")

    def __len__(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> list[str | None]:
        try:
            j = self.column_names.index(name)
        except ValueError:
            raise ContractError(f"column {name!r} not in table {self.source or ''}".rstrip()) from None
        return [row[j] for row in self.rows]


def _clean(cell: str, missing: str) -> str | None:
    cell = cell.strip()
    if cell == missing or cell == "":
        return None
    return cell


def _read_records(path: str | Path) -> Iterable[tuple[int, list[str]]]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            for lineno, rec in enumerate(csv.reader(fh, skipinitialspace=True), start=1):
                if not rec or (len(rec) == 1 and not rec[0].strip()):
                    continue
                if rec[0].lstrip().startswith("|"):
                    continue
                yield lineno, rec
    except OSError as exc:
        raise IngestionError(f"cannot read {path}: {exc}") from exc


def _is_number(s: str | None) -> bool:
    if s is None:
        return False
    try:
        float(s)
    except ValueError:
        return False
    return True


def load_csv(
    path: str | Path,
    column_names: Sequence[str] | None = None,
    missing: str = MISSING_TOKEN,
    strip_label_period: str | None = None,
) -> RawTable:
    """Read a comma-separated file into a :class:`RawTable`.

    If ``column_names`` is None the first record is the header. Cells are
    trimmed and ``missing`` (default ``"?"``) or empty cells become None.
    ``strip_label_period`` names a column whose values lose one trailing ``.``.
    """
    records = _read_records(path)
    if column_names is None:
        try:
            _, header = next(records)
        except StopIteration:
            raise IngestionError(f"{path}: empty file") from None
        column_names = [h.strip() for h in header]
    names = tuple(column_names)
    width = len(names)
    strip_j = names.index(strip_label_period) if strip_label_period in names else None

    rows = []
    for lineno, rec in records:
        if len(rec) != width:
            raise IngestionError(
                f"{path}: data row {len(rows)} (line {lineno}) has {len(rec)} cells, expected {width}"
            )
        row = [_clean(c, missing) for c in rec]
        if strip_j is not None and row[strip_j] is not None and row[strip_j].endswith("."):
            row[strip_j] = row[strip_j][:-1]
        rows.append(tuple(row))
    return RawTable(names, tuple(rows), source=str(path))


def load_adult_csv(path: str | Path, variant: str = "train", target: str = "income") -> RawTable:
    """Load an Adult-format file (raw UCI or a headered CSV export).

    A header row is recognised by a non-numeric first cell (the first Adult
    field, age, is always numeric).
    """
    if variant not in ("train", "test"):
        raise IngestionError(f"unknown Adult variant {variant!r}")
    first = next(iter(_read_records(path)), None)
    if first is None:
        raise IngestionError(f"{path}: no data rows")
    has_header = not _is_number(first[1][0].strip())
    return load_csv(
        path,
        column_names=None if has_header else ADULT_COLUMNS,
        strip_label_period=target if variant == "test" else None,
    )


# --------------------------------------------------------------------- schema


@dataclass(frozen=True)
class ColumnSpec:
    name: str
    kind: str  # "numeric", "categorical" or "binary"
    levels: tuple[str, ...] = ()

    def feature_names(self) -> list[str]:
        if self.kind == "numeric":
            return [self.name]
        if self.kind == "categorical":
            return [f"{self.name}={lvl}" for lvl in self.levels[1:]]
        return [self.name]


@dataclass(frozen=True)
class SchemaConfig:
    """Column roles and label mappings used to build an :class:`EncodingSchema`.

    ``negative_label`` / ``group0_label`` are inferred as "the other label"
    when left as None.
    """

    protected: str = "sex"
    target: str = "income"
    positive_label: str = ">50K"
    group1_label: str = "Male"
    negative_label: str | None = None
    group0_label: str | None = None
    drop: tuple[str, ...] = ADULT_DROPPED
    numeric: tuple[str, ...] | None = None


@dataclass(frozen=True)
class EncodingSchema:
    """How a :class:`RawTable` maps to a numeric :class:`FairnessDataset`.

    ``protected`` and ``target`` are binary specs whose ``levels`` are
    ``(label coded 0, label coded 1)``. ``features`` lists the non-protected
    predictor columns in table order.
    """

    features: tuple[ColumnSpec, ...]
    protected: ColumnSpec
    target: ColumnSpec
    dropped: tuple[str, ...] = ()

    @property
    def positive_label(self) -> str:
        return self.target.levels[1]

    @property
    def group1_label(self) -> str:
        return self.protected.levels[1]

    @property
    def feature_names(self) -> list[str]:
        return [n for spec in self.features for n in spec.feature_names()]

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    @property
    def used_columns(self) -> list[str]:
        return [s.name for s in self.features] + [self.protected.name, self.target.name]

    def dumps(self) -> str:
        """Key-value text; values are JSON so arbitrary labels survive a round trip."""
        lines = [
            f"protected = {json.dumps(self.protected.name)}",
            f"protected.levels = {json.dumps(list(self.protected.levels))}",
            f"target = {json.dumps(self.target.name)}",
            f"target.levels = {json.dumps(list(self.target.levels))}",
            f"dropped = {json.dumps(list(self.dropped))}",
            f"features = {json.dumps([s.name for s in self.features])}",
        ]
        for s in self.features:
            lines.append(f"column.{s.name}.kind = {json.dumps(s.kind)}")
            if s.kind == "categorical":
                lines.append(f"column.{s.name}.levels = {json.dumps(list(s.levels))}")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "EncodingSchema":
        kv = {}
        for line in text.splitlines():
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            key, sep, value = line.partition(" = ")
            if not sep:
                raise IngestionError(f"malformed schema line: {line!r}")
            kv[key.strip()] = json.loads(value)
        try:
            features = tuple(
                ColumnSpec(
                    name,
                    kv[f"column.{name}.kind"],
                    tuple(kv.get(f"column.{name}.levels", ())),
                )
                for name in kv["features"]
            )
            return cls(
                features=features,
                protected=ColumnSpec(kv["protected"], "binary", tuple(kv["protected.levels"])),
                target=ColumnSpec(kv["target"], "binary", tuple(kv["target.levels"])),
                dropped=tuple(kv["dropped"]),
            )
        except KeyError as exc:
            raise IngestionError(f"schema dump missing key {exc}") from None

    @property
    def fingerprint(self) -> str:
        return hashlib.sha256(self.dumps().encode()).hexdigest()[:16]


def _binary_levels(values: list[str | None], column: str, one: str, zero: str | None) -> tuple[str, str]:
    seen = {v for v in values if v is not None}
    if one not in seen:
        raise IngestionError(f"column {column!r}: label {one!r} never occurs")
    others = seen - {one}
    if zero is None:
        if len(others) != 1:
            raise IngestionError(
                f"column {column!r} is not binary: labels {sorted(seen)} (expected two)"
            )
        (zero,) = others
    elif others != {zero}:
        raise IngestionError(
            f"column {column!r} has labels {sorted(seen)} outside the configured pair ({zero!r}, {one!r})"
        )
    return zero, one


def build_schema(table: RawTable, config: SchemaConfig = SchemaConfig()) -> EncodingSchema:
    """Infer an encoding schema from a training table.

    Categorical levels are collected from complete rows only (rows with no
    missing used cell), so a level that never survives listwise deletion is
    absent from the schema and rows carrying it are masked at encode time.
    """
    for col in (config.protected, config.target, *config.drop):
        if col not in table.column_names:
            raise IngestionError(f"column {col!r} not in {table.source or 'table'}")

    protected = ColumnSpec(
        config.protected,
        "binary",
        _binary_levels(table.column(config.protected), config.protected, config.group1_label, config.group0_label),
    )
    target = ColumnSpec(
        config.target,
        "binary",
        _binary_levels(table.column(config.target), config.target, config.positive_label, config.negative_label),
    )
    excluded = {config.protected, config.target, *config.drop}
    used = [c for c in table.column_names if c not in excluded]

    cols = {c: table.column(c) for c in used + [config.protected, config.target]}
    complete = [all(cols[c][i] is not None for c in cols) for i in range(len(table))]

    features = []
    for c in used:
        values = cols[c]
        if config.numeric is not None:
            numeric = c in config.numeric
        else:
            numeric = all(_is_number(v) for v in values if v is not None)
        if numeric:
            features.append(ColumnSpec(c, "numeric"))
        else:
            levels = sorted({v for v, ok in zip(values, complete) if ok})
            features.append(ColumnSpec(c, "categorical", tuple(levels)))
    return EncodingSchema(tuple(features), protected, target, tuple(config.drop))


# -------------------------------------------------------------------- dataset


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class FairnessDataset:
    """Encoded design matrix plus protected indicator ``a`` and target ``y``.

    Masked rows (``row_mask`` false) stay in place so indices line up with the
    raw file. On those rows ``X`` is NaN; ``a`` and ``y`` keep their value when
    the raw cell was readable and are NaN otherwise.
    """

    X: np.ndarray
    a: np.ndarray
    y: np.ndarray
    row_mask: np.ndarray
    feature_names: tuple[str, ...]
    schema_fingerprint: str
    source: str = ""
    protected_name: str = "a"
    fingerprint: str = field(init=False)

    def __post_init__(self):
        n = len(self.row_mask)
        if self.X.shape != (n, len(self.feature_names)) or self.a.shape != (n,) or self.y.shape != (n,):
            raise ContractError("dataset arrays have inconsistent shapes")
        for name in ("X", "a", "y", "row_mask"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        h = hashlib.sha256(self.schema_fingerprint.encode())
        for arr in (self.X, self.a, self.y, self.row_mask):
            h.update(arr.tobytes())
        object.__setattr__(self, "fingerprint", h.hexdigest()[:16])

    @classmethod
    def from_arrays(cls, a, y, X=None, feature_names=None, row_mask=None, source="arrays", schema_fingerprint="arrays"):
        """Wrap plain arrays; rows with any NaN are masked unless ``row_mask`` is given."""
        a = np.asarray(a, dtype=float)
        y = np.asarray(y, dtype=float)
        n = len(a)
        X = np.zeros((n, 0)) if X is None else np.asarray(X, dtype=float).reshape(n, -1)
        if feature_names is None:
            feature_names = tuple(f"x{j + 1}" for j in range(X.shape[1]))
        if row_mask is None:
            row_mask = ~(np.isnan(a) | np.isnan(y) | np.isnan(X).any(axis=1))
        return cls(X, a, y, np.asarray(row_mask, dtype=bool), tuple(feature_names), schema_fingerprint, source)

    @property
    def n(self) -> int:
        return len(self.row_mask)

    @property
    def n_valid(self) -> int:
        return int(self.row_mask.sum())

    @property
    def p(self) -> int:
        return self.X.shape[1]


def encode(table: RawTable, schema: EncodingSchema) -> FairnessDataset:
    """Encode ``table`` with reference-level dummy coding.

    Rows with a missing used cell, an unparseable number, or a categorical
    level unknown to ``schema`` are masked rather than dropped.
    """
    missing_cols = [c for c in schema.used_columns if c not in table.column_names]
    if missing_cols:
        raise ContractError(f"table {table.source or ''} lacks schema columns {missing_cols}")
    n = len(table)
    valid = np.ones(n, dtype=bool)
    blocks = []
    for spec in schema.features:
        cells = table.column(spec.name)
        if spec.kind == "numeric":
            col = np.full(n, np.nan)
            for i, v in enumerate(cells):
                if v is None:
                    continue
                try:
                    col[i] = float(v)
                except ValueError:
                    pass
            valid &= ~np.isnan(col)
            blocks.append(col[:, None])
        else:
            index = {lvl: k for k, lvl in enumerate(spec.levels)}
            codes = np.array([index.get(v, -1) if v is not None else -1 for v in cells], dtype=np.int64)
            valid &= codes >= 0
            # reference level (index 0) gets no indicator
            ind = (codes[:, None] == np.arange(1, len(spec.levels))[None, :]).astype(float)
            blocks.append(ind)

    def binary(spec: ColumnSpec) -> np.ndarray:
        zero, one = spec.levels
        lookup = {zero: 0.0, one: 1.0}
        return np.array([lookup.get(v, np.nan) if v is not None else np.nan for v in table.column(spec.name)])

    a = binary(schema.protected)
    y = binary(schema.target)
    valid &= ~np.isnan(a) & ~np.isnan(y)

    X = np.hstack(blocks) if blocks else np.zeros((n, 0))
    X[~valid] = np.nan
    return FairnessDataset(
        X=X,
        a=a,
        y=y,
        row_mask=valid,
        feature_names=tuple(schema.feature_names),
        schema_fingerprint=schema.fingerprint,
        source=table.source,
        protected_name=schema.protected.name,
    )
