"""
Auditing someone else's model
==============================

The scorer is a black box: any model's scores can be audited as long as they
come as a ``row_index,score`` file aligned to the raw data rows. Here a
deliberately biased "model" is simulated and written to disk, then audited
through the same entry point the command line uses.
"""

import tempfile
from pathlib import Path

from pathfair import AuditConfig, SynthSpec, generate, render_tables, run_audit
from pathfair.synth import write_csv

work = Path(tempfile.mkdtemp())

# Stand-ins for a vendor's training and hold-out scores.
paths = {}
for split, seed in (("train", 11), ("test", 12)):
    data, scores = generate(SynthSpec(n=5000, beta_a_yhat=0.08, noise_sd=0.15, seed=seed))
    paths[split] = write_csv(data, scores, work / split)

config = AuditConfig(
    train=str(paths["train"][0]),
    test=str(paths["test"][0]),
    data_format="csv",
    protected="a",
    target="y",
    positive_label="1",
    group1_label="1",
    drop=(),
    external_scores=str(paths["train"][1]),
    external_test_scores=str(paths["test"][1]),
    out=str(work / "report"),
)
report = run_audit(config)
print(render_tables(report))
print(f"report files in {work / 'report'}")
