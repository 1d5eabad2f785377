"""Reference black-box scorer (logistic regression by IRLS) and score I/O."""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from scipy.special import expit

from .data_ingest import FairnessDataset
from .errors import ContractError, ConvergenceError, IngestionError

INTERCEPT = "(Intercept)"


class SeparationWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class LogisticModel:
    """Fitted coefficients over ``(intercept, features..., protected)``.

    Coefficients of columns dropped as constant are stored as 0.0 so the
    vector length is always ``1 + p + 1``.
    """

    names: tuple[str, ...]
    coefficients: np.ndarray
    schema_fingerprint: str
    iterations: int = 0
    deviance_history: tuple[float, ...] = ()
    converged: bool = True
    dropped: tuple[str, ...] = ()
    diverging: tuple[str, ...] = ()

    @property
    def deviance(self) -> float:
        return self.deviance_history[-1] if self.deviance_history else math.nan

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.names, map(float, self.coefficients)))

    def dumps(self) -> str:
        lines = [
            f"# schema_fingerprint = {self.schema_fingerprint}",
            f"# iterations = {self.iterations}",
            f"# deviance = {self.deviance!r}",
            f"# converged = {self.converged}",
        ]
        if self.dropped:
            lines.append(f"# dropped = {'|'.join(self.dropped)}")
        lines += [f"{n} = {float(c)!r}" for n, c in zip(self.names, self.coefficients)]
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "LogisticModel":
        meta, names, coefs = {}, [], []
        for line in text.splitlines():
            if not line.strip():
                continue
            key, sep, value = line.rpartition(" = ")
            if not sep:
                raise IngestionError(f"malformed model line: {line!r}")
            if key.startswith("# "):
                meta[key[2:]] = value
            else:
                names.append(key)
                coefs.append(float(value))
        if "schema_fingerprint" not in meta:
            raise IngestionError("model dump lacks schema_fingerprint")
        deviance = float(meta.get("deviance", "nan"))
        return cls(
            names=tuple(names),
            coefficients=np.array(coefs),
            schema_fingerprint=meta["schema_fingerprint"],
            iterations=int(meta.get("iterations", 0)),
            deviance_history=() if math.isnan(deviance) else (deviance,),
            converged=meta.get("converged", "True") == "True",
            dropped=tuple(filter(None, meta.get("dropped", "").split("|"))),
        )


@dataclass(frozen=True, eq=False)
class ScoreSet:
    """Per-row scores aligned to one dataset; NaN marks rows without a score."""

    raw: np.ndarray
    dataset_fingerprint: str
    mitigated: np.ndarray | None = None

    def __post_init__(self):
        for name in ("raw", "mitigated"):
            arr = getattr(self, name)
            if arr is not None:
                arr = np.array(arr, dtype=float)
                arr.setflags(write=False)
                object.__setattr__(self, name, arr)

    def with_mitigated(self, mitigated: np.ndarray) -> "ScoreSet":
        return replace(self, mitigated=mitigated)

    def check(self, data: FairnessDataset) -> None:
        if self.dataset_fingerprint != data.fingerprint:
            raise ContractError(
                f"scores belong to dataset {self.dataset_fingerprint}, not {data.fingerprint} ({data.source})"
            )


def design_matrix(data: FairnessDataset) -> tuple[np.ndarray, tuple[str, ...]]:
    """``[1, X, a]`` restricted to valid rows, with column names."""
    m = data.row_mask
    Xd = np.column_stack([np.ones(m.sum()), data.X[m], data.a[m]])
    return Xd, (INTERCEPT, *data.feature_names, data.protected_name)


def log_likelihood(beta: np.ndarray, X: np.ndarray, y: np.ndarray) -> float:
    eta = X @ beta
    return float(np.sum(y * eta - np.logaddexp(0.0, eta)))


def log_likelihood_gradient(beta: np.ndarray, X: np.ndarray, y: np.ndarray) -> np.ndarray:
    return X.T @ (y - expit(X @ beta))


def _deviance(beta, X, y):
    return -2.0 * log_likelihood(beta, X, y)


def _newton_step(X, w, grad):
    gram = X.T @ (w[:, None] * X)
    try:
        L = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError:
        # numerically singular: jitter the diagonal, relative to its scale
        k = gram.shape[0]
        gram = gram + 1e-10 * max(np.trace(gram) / k, 1.0) * np.eye(k)
        return np.linalg.lstsq(gram, grad, rcond=None)[0]
    z = np.linalg.solve(L, grad)
    return np.linalg.solve(L.T, z)


def fit_logistic(
    data: FairnessDataset,
    max_iter: int = 50,
    tol: float = 1e-8,
    dev_tol: float = 1e-10,
) -> LogisticModel:
    """Maximum-likelihood logistic regression of ``y`` on ``[1, X, a]`` by IRLS.

    Stops when the largest coefficient change drops below ``tol`` or the
    relative deviance change below ``dev_tol``. Each Newton step is halved
    until the deviance does not increase. Coefficients still moving at the
    stop are reported as diverging (quasi-separation) with a warning.
    """
    Xd, names = design_matrix(data)
    y = data.y[data.row_mask]
    if not (np.any(y == 0) and np.any(y == 1)):
        raise ContractError("fit_logistic needs at least one valid row of each class")

    keep = np.ones(Xd.shape[1], dtype=bool)
    keep[1:] = np.ptp(Xd[:, 1:], axis=0) > 0 if len(y) else False
    dropped = tuple(n for n, k in zip(names, keep) if not k)
    if dropped:
        warnings.warn(f"dropping constant columns: {', '.join(dropped)}", stacklevel=2)
    X = Xd[:, keep]

    beta = np.zeros(X.shape[1])
    dev = _deviance(beta, X, y)
    history = [dev]
    delta = np.full_like(beta, np.inf)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        mu = expit(X @ beta)
        w = mu * (1.0 - mu)
        step = _newton_step(X, w, X.T @ (y - mu))
        for _ in range(40):
            new_dev = _deviance(beta + step, X, y)
            if new_dev <= dev + 1e-12 * abs(dev):
                break
            step = step / 2.0
        delta = step
        beta = beta + step
        rel = abs(dev - new_dev) / (abs(new_dev) + 0.1)
        dev = new_dev
        history.append(dev)
        if np.max(np.abs(delta)) < tol or rel < dev_tol:
            converged = True
            break

    # separation: a coefficient still moving while already far out on the logit scale
    moving = (np.abs(delta) > max(1e3 * tol, 1e-4)) & (np.abs(beta) > 8.0)
    kept_names = [n for n, k in zip(names, keep) if k]
    diverging = tuple(n for n, m in zip(kept_names, moving) if m)
    if diverging:
        warnings.warn(
            f"coefficients diverging (separation): {', '.join(diverging)}", SeparationWarning, stacklevel=2
        )
    if not converged and not diverging:
        raise ConvergenceError(f"IRLS did not converge in {it} iterations (deviance {dev:.10g})")

    full = np.zeros(len(names))
    full[keep] = beta
    return LogisticModel(
        names=names,
        coefficients=full,
        schema_fingerprint=data.schema_fingerprint,
        iterations=it,
        deviance_history=tuple(history),
        converged=converged,
        dropped=dropped,
        diverging=diverging,
    )


def predict(model: LogisticModel, data: FairnessDataset) -> ScoreSet:
    if model.schema_fingerprint != data.schema_fingerprint:
        raise ContractError(
            f"model trained on schema {model.schema_fingerprint}, data encoded with {data.schema_fingerprint}"
        )
    if len(model.coefficients) != data.p + 2:
        raise ContractError(f"model has {len(model.coefficients)} coefficients, data needs {data.p + 2}")
    Xd, _ = design_matrix(data)
    raw = np.full(data.n, np.nan)
    raw[data.row_mask] = expit(Xd @ model.coefficients)
    return ScoreSet(raw, data.fingerprint)


def save_scores(scores: ScoreSet, path: str | Path, variant: str = "raw") -> None:
    values = scores.raw if variant == "raw" else scores.mitigated
    if values is None:
        raise ContractError(f"no {variant} scores to save")
    with open(path, "w", newline="") as fh:
        fh.write("row_index,score\n")
        for i in np.flatnonzero(~np.isnan(values)):
            fh.write(f"{i},{float(values[i])!r}\n")


def load_external_scores(path: str | Path, data: FairnessDataset) -> ScoreSet:
    """Attach scores from a ``row_index,score`` CSV to ``data``.

    Every valid row must be listed; entries for masked rows are ignored.
    """
    raw = np.full(data.n, np.nan)
    seen = np.zeros(data.n, dtype=bool)
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise IngestionError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh, skipinitialspace=True)
        header = [h.strip() for h in next(reader, [])]
        if header[:2] != ["row_index", "score"]:
            raise IngestionError(f"{path}: header must be 'row_index,score', got {header}")
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            try:
                i, s = int(rec[0]), float(rec[1])
            except (ValueError, IndexError):
                raise IngestionError(f"{path} line {lineno}: bad record {rec}") from None
            if not 0 <= i < data.n:
                raise ContractError(f"{path} line {lineno}: row_index {i} outside [0, {data.n})")
            if seen[i]:
                raise ContractError(f"{path} line {lineno}: row_index {i} listed twice")
            if math.isnan(s):
                raise IngestionError(f"{path} line {lineno}: score is NaN")
            seen[i] = True
            raw[i] = s
    missing = np.flatnonzero(data.row_mask & ~seen)
    if len(missing):
        shown = ", ".join(map(str, missing[:10])) + (" ..." if len(missing) > 10 else "")
        raise ContractError(f"{path}: no score for valid row(s) {shown}")
    raw[~data.row_mask] = np.nan
    return ScoreSet(raw, data.fingerprint)
