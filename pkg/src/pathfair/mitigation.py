"""Post-processing policy: remove the direct protected-attribute effect, then threshold."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data_ingest import FairnessDataset
from .errors import ContractError
from .path_model import BiasVerdict, PathModelFit
from .scorer import ScoreSet

UNCLASSIFIED = -1


@dataclass(frozen=True)
class MitigationPolicy:
    bias_coefficient: float
    raw_threshold: float
    mitigated_threshold: float
    threshold_rank: int
    verdict: BiasVerdict
    fitted_coefficient: float = float("nan")
    rank_basis: str = "all"
    round_digits: int | None = None
    ties_at_raw_threshold: int = 1
    ties_at_mitigated_threshold: int = 1

    def as_dict(self) -> dict:
        return {
            "bias_coefficient": self.bias_coefficient,
            "fitted_coefficient": self.fitted_coefficient,
            "round_digits": self.round_digits,
            "raw_threshold": self.raw_threshold,
            "mitigated_threshold": self.mitigated_threshold,
            "threshold_rank": self.threshold_rank,
            "rank_basis": self.rank_basis,
            "ties_at_raw_threshold": self.ties_at_raw_threshold,
            "ties_at_mitigated_threshold": self.ties_at_mitigated_threshold,
            "verdict": self.verdict.as_dict(),
        }

    def dumps(self) -> str:
        v = self.verdict
        pairs = [
            ("bias_coefficient", repr(self.bias_coefficient)),
            ("fitted_coefficient", repr(self.fitted_coefficient)),
            ("round_digits", "off" if self.round_digits is None else str(self.round_digits)),
            ("raw_threshold", repr(self.raw_threshold)),
            ("mitigated_threshold", repr(self.mitigated_threshold)),
            ("threshold_rank", str(self.threshold_rank)),
            ("rank_basis", self.rank_basis),
            ("alpha", repr(v.alpha)),
            ("tested_coefficient", v.coefficient),
            ("z", repr(v.z)),
            ("p", repr(v.p)),
            ("biased", "true" if v.biased else "false"),
        ]
        return "".join(f"{k} = {val}\n" for k, val in pairs)


@dataclass(frozen=True, eq=False)
class ClassifiedScores:
    """Predicted classes (``UNCLASSIFIED`` where no score exists)."""

    classes: np.ndarray
    threshold: float
    variant: str
    dataset_fingerprint: str

    @property
    def classified(self) -> np.ndarray:
        return self.classes != UNCLASSIFIED


def rank_threshold(scores: np.ndarray, rank: int) -> tuple[float, int]:
    """Score whose 1-based ascending rank is ``rank``, and how many rows share it.

    Ties resolve to the shared value; rank 0 yields ``-inf`` (everything positive).
    """
    s = np.sort(scores[~np.isnan(scores)])
    if not 0 <= rank <= len(s):
        raise ContractError(f"threshold rank {rank} outside [0, {len(s)}]")
    if rank == 0:
        return -np.inf, 0
    tau = float(s[rank - 1])
    return tau, int(np.count_nonzero(s == tau))


def count_negatives(data: FairnessDataset, basis: str = "all") -> int:
    """Training negatives defining the threshold rank.

    ``"all"`` counts every row whose target is known, including rows masked for
    missing features (the count is taken before listwise deletion);
    ``"valid"`` counts masked-in rows only.
    """
    if basis == "all":
        return int(np.count_nonzero(data.y == 0))
    if basis == "valid":
        return int(np.count_nonzero(data.y[data.row_mask] == 0))
    raise ContractError(f"unknown rank basis {basis!r}")


def mitigate(raw: np.ndarray, a: np.ndarray, coefficient: float) -> np.ndarray:
    return raw - coefficient * a


def derive_policy(
    fit: PathModelFit,
    verdict: BiasVerdict,
    train_scores: ScoreSet,
    train_data: FairnessDataset,
    rank_basis: str = "all",
    round_digits: int | None = None,
) -> MitigationPolicy:
    train_scores.check(train_data)
    raw = np.where(train_data.row_mask, train_scores.raw, np.nan)
    if np.isnan(raw[train_data.row_mask]).any():
        raise ContractError("training scores do not cover every valid row")
    rank = count_negatives(train_data, rank_basis)
    tau_raw, ties_raw = rank_threshold(raw, rank)

    coefficient = fit.beta_a_yhat
    if round_digits is not None:
        coefficient = round(coefficient, round_digits)
    if not verdict.biased:
        coefficient = 0.0
        tau_mit, ties_mit = tau_raw, ties_raw
    else:
        tau_mit, ties_mit = rank_threshold(mitigate(raw, train_data.a, coefficient), rank)
    return MitigationPolicy(
        bias_coefficient=float(coefficient),
        raw_threshold=tau_raw,
        mitigated_threshold=tau_mit,
        threshold_rank=rank,
        verdict=verdict,
        fitted_coefficient=fit.beta_a_yhat,
        rank_basis=rank_basis,
        round_digits=round_digits,
        ties_at_raw_threshold=ties_raw,
        ties_at_mitigated_threshold=ties_mit,
    )


def apply_mitigation(scores: ScoreSet, data: FairnessDataset, policy: MitigationPolicy) -> ScoreSet:
    scores.check(data)
    mitigated = np.where(data.row_mask, mitigate(scores.raw, data.a, policy.bias_coefficient), np.nan)
    return scores.with_mitigated(mitigated)


def classify(scores: ScoreSet, variant: str, threshold: float) -> ClassifiedScores:
    """Class 1 where score > threshold (strict), 0 where score <= threshold."""
    if variant not in ("raw", "mitigated"):
        raise ContractError(f"unknown score variant {variant!r}")
    values = scores.raw if variant == "raw" else scores.mitigated
    if values is None:
        raise ContractError(f"{variant} scores not computed")
    classes = np.full(len(values), UNCLASSIFIED, dtype=np.int8)
    present = ~np.isnan(values)
    classes[present] = values[present] > threshold
    return ClassifiedScores(classes, float(threshold), variant, scores.dataset_fingerprint)
