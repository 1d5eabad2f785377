"""
Auditing a census income classifier for sex bias
=================================================

Walk through the pipeline one step at a time on the UCI Adult data: fit a
logistic scorer, fit the path model on its scores, test the direct sex path,
remove it, and compare equal-opportunity rates before and after.

Run from the repository root::

    python demos/01_adult_audit.py
"""

import warnings
from pathlib import Path

import numpy as np

from pathfair import (
    apply_mitigation,
    build_schema,
    classify,
    derive_policy,
    encode,
    equal_opportunity,
    fit_logistic,
    fit_path_model,
    grouped_confusion,
    load_adult_csv,
    predict,
    test_bias,
)
from pathfair.metrics import accuracy, render_confusion

DATA = Path(__file__).resolve().parents[1] / "data" / "adult"

# Load both splits. "?" cells become missing; the test file's banner line and
# the trailing period on its labels are handled by the loader.
train_table = load_adult_csv(DATA / "adult.data")
test_table = load_adult_csv(DATA / "adult.test", variant="test")

# The schema is learned from the training split only. education, fnlwgt and
# relationship are dropped; sex and income become 0/1.
schema = build_schema(train_table)
train = encode(train_table, schema)
test = encode(test_table, schema)
print(f"train: {train.n} rows, {train.n_valid} usable; test: {test.n} rows, {test.n_valid} usable")

# The black box. A few sparse levels are perfectly separated, hence the warning.
with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    model = fit_logistic(train)
train_scores = predict(model, train)
test_scores = predict(model, test)

# Path model on (sex, income, score); the direct sex -> score path is the bias.
fit = fit_path_model(train.a, train.y, train_scores.raw)
print(fit.dumps())
verdict = test_bias(fit, alpha=0.05)
print(f"direct sex effect {fit.beta_a_yhat:.3f}, z = {verdict.z:.1f}, biased: {verdict.biased}")

# Thresholds put as many rows below the cut as there are low-income people in
# the training file; the same rank is reused for the corrected scores.
policy = derive_policy(fit, verdict, train_scores, train)
print(f"thresholds: raw {policy.raw_threshold:.4f}, mitigated {policy.mitigated_threshold:.4f}")

labels = dict(a_labels=schema.protected.levels, y_labels=schema.target.levels)
for name, data, scores in (("train", train, train_scores), ("test", test, test_scores)):
    scores = apply_mitigation(scores, data, policy)
    for variant, tau in (("raw", policy.raw_threshold), ("mitigated", policy.mitigated_threshold)):
        conf = grouped_confusion(data, classify(scores, variant, tau))
        print(render_confusion(conf, f"{name}, {variant} scores", **labels))

# Within each sex the ranking of people is untouched: only the cut moves.
test_scores = apply_mitigation(test_scores, test, policy)
men = test.row_mask & (test.a == 1)
assert np.array_equal(np.argsort(test_scores.raw[men]), np.argsort(test_scores.mitigated[men]))

raw = grouped_confusion(test, classify(test_scores, "raw", policy.raw_threshold))
mit = grouped_confusion(test, classify(test_scores, "mitigated", policy.mitigated_threshold))
print(f"test gap {equal_opportunity(raw).gap:.4f} -> {equal_opportunity(mit).gap:.4f}, "
      f"accuracy {accuracy(raw):.4f} -> {accuracy(mit):.4f}")
