"""Synthetic data drawn from the path model with known coefficients.

Random numbers come from numpy's PCG64 bit generator seeded directly with
``SynthSpec.seed``. Per row block, draws happen in a fixed order: ``n``
uniforms for ``a``, ``n`` uniforms for ``y``, then ``n`` standard normals
(numpy's ziggurat) for the score noise. Trial ``i`` of a calibration run
uses seed ``base_seed + i``, so any single trial can be replayed alone.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from scipy.special import expit

from .data_ingest import FairnessDataset
from .errors import ContractError
from .path_model import fit_path_model, test_bias
from .scorer import ScoreSet, save_scores


@dataclass(frozen=True)
class SynthSpec:
    n: int = 200
    p_a: float = 0.5
    beta_0_y: float = -1.0  # logit scale
    beta_a_y: float = 1.0  # logit scale
    beta_0_yhat: float = 0.1
    beta_a_yhat: float = 0.2
    beta_y_yhat: float = 0.5
    noise_sd: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ContractError("n must be positive")
        if not 0.0 < self.p_a < 1.0:
            raise ContractError("p_a must lie in (0, 1)")
        if self.noise_sd < 0:
            raise ContractError("noise_sd must be non-negative")
        if not 0 <= self.seed < 2**64:
            raise ContractError("seed must be a 64-bit unsigned integer")


def rng_for(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def generate(spec: SynthSpec) -> tuple[FairnessDataset, ScoreSet]:
    rng = rng_for(spec.seed)
    n = spec.n
    a = (rng.random(n) < spec.p_a).astype(float)
    y = (rng.random(n) < expit(spec.beta_0_y + spec.beta_a_y * a)).astype(float)
    noise = rng.standard_normal(n) * spec.noise_sd
    yhat = spec.beta_0_yhat + spec.beta_a_yhat * a + spec.beta_y_yhat * y + noise
    data = FairnessDataset.from_arrays(a, y, source=f"synthetic:seed={spec.seed}", schema_fingerprint="synthetic")
    return data, ScoreSet(yhat, data.fingerprint)


def calibration_trial(spec_null: SynthSpec, trials: int = 500, alpha: float = 0.05) -> float:
    """Fraction of ``trials`` independent draws in which the bias test rejects."""
    if trials < 100:
        raise ContractError("calibration needs at least 100 trials")
    rejections = 0
    for i in range(trials):
        data, scores = generate(replace(spec_null, seed=spec_null.seed + i))
        try:
            fit = fit_path_model(data.a, data.y, scores.raw)
        except ContractError:
            # degenerate draw (constant a or y): counted as no rejection
            continue
        rejections += test_bias(fit, alpha).biased
    return rejections / trials


def write_csv(data: FairnessDataset, scores: ScoreSet, out_dir: str | Path) -> tuple[Path, Path]:
    """Write ``data.csv`` (columns a, y, features) and ``scores.csv`` (row_index, score)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    data_path, score_path = out / "data.csv", out / "scores.csv"
    with open(data_path, "w", newline="") as fh:
        fh.write(",".join(("a", "y", *data.feature_names)) + "\n")
        for i in range(data.n):
            cells = [str(int(data.a[i])), str(int(data.y[i]))] + [repr(float(v)) for v in data.X[i]]
            fh.write(",".join(cells) + "\n")
    save_scores(scores, score_path)
    return data_path, score_path
