"""Recursive two-equation path model for a score, its target and a protected bit.

    score = b0_score + b_a_score * a + b_y_score * y + e_score
    y     = b0_y     + b_a_y     * a               + e_y

With uncorrelated errors the system is recursive, so maximum likelihood
reduces to per-equation least squares. Standard errors follow the ML
convention (residual variance RSS / n), which is also what SEM software
reports for observed-variable path models.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .errors import ContractError

P_FLOOR = 1e-300
COEFFICIENTS = ("beta_0_yhat", "beta_a_yhat", "beta_y_yhat", "beta_0_y", "beta_a_y")
LABELS = {
    "beta_0_yhat": "Intercept",
    "beta_a_yhat": "Protected (a)",
    "beta_y_yhat": "Target (y)",
    "beta_0_y": "Intercept",
    "beta_a_y": "Protected (a)",
}


def ols_with_se(X: np.ndarray, t: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    """Least-squares coefficients, ML standard errors and residual sum of squares.

    ``X`` must already contain the intercept column. SE^2 = diag((X'X)^-1) * RSS / n.
    """
    X = np.asarray(X, dtype=float)
    t = np.asarray(t, dtype=float)
    n, k = X.shape
    if n <= k:
        raise ContractError(f"ols needs more rows than columns (n={n}, k={k})")
    gram = X.T @ X
    try:
        L = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError:
        raise ContractError("singular design: X'X is not invertible") from None
    Linv = np.linalg.inv(L)
    gram_inv = Linv.T @ Linv

    is_const = np.all(X == X[0], axis=0)
    if is_const.sum() == 1 and X[0, is_const][0] == 1.0:
        # intercept present: solve on centred data so a constant response gives exact zero slopes
        j0 = int(np.flatnonzero(is_const)[0])
        others = [j for j in range(k) if j != j0]
        Xc = X[:, others] - X[:, others].mean(axis=0)
        t_mean = t.mean()
        slopes = np.linalg.solve(Xc.T @ Xc, Xc.T @ (t - t_mean)) if others else np.zeros(0)
        coef = np.empty(k)
        coef[others] = slopes
        coef[j0] = t_mean - X[:, others].mean(axis=0) @ slopes
    else:
        coef = gram_inv @ (X.T @ t)
    resid = t - X @ coef
    rss = float(resid @ resid)
    se = np.sqrt(np.diag(gram_inv) * rss / n)
    return coef, se, rss


def two_sided_p(z):
    return 2.0 * ndtr(-np.abs(z))


@dataclass(frozen=True)
class PathModelFit:
    beta_0_yhat: float
    beta_a_yhat: float
    beta_y_yhat: float
    beta_0_y: float
    beta_a_y: float
    var_e_yhat: float
    var_e_y: float
    se: dict
    z: dict
    p: dict
    n_used: int

    def estimate(self, name: str) -> float:
        return getattr(self, name)

    def as_dict(self) -> dict:
        return {
            "n_used": self.n_used,
            "coefficients": {
                name: {"estimate": self.estimate(name), "se": self.se[name], "z": self.z[name], "p": self.p[name]}
                for name in COEFFICIENTS
            },
            "residual_variances": {"e_yhat": self.var_e_yhat, "e_y": self.var_e_y},
        }

    def dumps(self) -> str:
        """Plain-text block: one row per coefficient, score equation first."""
        lines = [f"Path model fit (n_used = {self.n_used})", ""]
        head = f"{'Coefficient':<27}{'Est.':>10}{'SE':>10}{'z-value':>11}  {'p':<10}"
        for title, names in (("Score equation", COEFFICIENTS[:3]), ("Target equation", COEFFICIENTS[3:])):
            lines += [title, head]
            for name in names:
                lines.append(
                    f"{LABELS[name] + ' ' + name:<27}{self.estimate(name):>10.3f}{self.se[name]:>10.4f}"
                    f"{self.z[name]:>11.3f}  {format_p(self.p[name]):<10}"
                )
            lines.append("")
        lines.append(f"Residual variance e_yhat = {self.var_e_yhat:.6g}, e_y = {self.var_e_y:.6g}")
        return "\n".join(lines) + "\n"


def format_p(p: float) -> str:
    if p < P_FLOOR:
        return "< 1e-300"
    if p < 0.001:
        return f"{p:.3e}"
    return f"{p:.4f}"


def _zp(coef, se):
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0, coef / np.where(se > 0, se, 1.0), np.where(coef == 0, 0.0, np.inf * np.sign(coef)))
    return z, two_sided_p(z)


def fit_path_model(a, y, yhat) -> PathModelFit:
    """Fit both equations on rows where ``a``, ``y`` and ``yhat`` are all present.

    NaN entries mark absent values; such rows are dropped listwise.
    """
    a = np.asarray(a, dtype=float)
    y = np.asarray(y, dtype=float)
    yhat = np.asarray(yhat, dtype=float)
    if not (a.shape == y.shape == yhat.shape):
        raise ContractError("a, y and yhat must have equal lengths")
    keep = ~(np.isnan(a) | np.isnan(y) | np.isnan(yhat))
    a, y, yhat = a[keep], y[keep], yhat[keep]
    n = len(a)
    if n < 3:
        raise ContractError(f"path model needs at least 3 complete rows, got {n}")
    if np.ptp(a) == 0:
        raise ContractError("protected attribute is constant; the a-paths are not identifiable")
    if np.ptp(y) == 0:
        raise ContractError("target is constant; the y-path is not identifiable")

    ones = np.ones(n)
    c1, se1, rss1 = ols_with_se(np.column_stack([ones, a, y]), yhat)
    c2, se2, rss2 = ols_with_se(np.column_stack([ones, a]), y)
    coef = np.concatenate([c1, c2])
    se = np.concatenate([se1, se2])
    z, p = _zp(coef, se)
    return PathModelFit(
        *map(float, coef),
        var_e_yhat=rss1 / n,
        var_e_y=rss2 / n,
        se=dict(zip(COEFFICIENTS, map(float, se))),
        z=dict(zip(COEFFICIENTS, map(float, z))),
        p=dict(zip(COEFFICIENTS, map(float, p))),
        n_used=n,
    )


@dataclass(frozen=True)
class BiasVerdict:
    biased: bool
    alpha: float
    coefficient: str
    z: float
    p: float

    def as_dict(self) -> dict:
        return {"biased": self.biased, "alpha": self.alpha, "coefficient": self.coefficient, "z": self.z, "p": self.p}


def test_bias(fit: PathModelFit, alpha: float = 0.05) -> BiasVerdict:
    """Two-sided z-test of the direct protected-attribute path into the score."""
    name = "beta_a_yhat"
    p = fit.p[name]
    return BiasVerdict(biased=bool(p < alpha), alpha=alpha, coefficient=name, z=fit.z[name], p=p)


test_bias.__test__ = False  # keep pytest from collecting it when imported
