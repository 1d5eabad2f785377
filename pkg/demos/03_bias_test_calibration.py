"""
Is the bias test honest?
========================

Under a score with no direct protected-attribute path, a test at level 0.05
should cry bias in about 5% of datasets. With a real path it should almost
always fire.
"""

from pathfair import SynthSpec, calibration_trial

null = SynthSpec(n=200, beta_a_yhat=0.0, noise_sd=0.1, seed=0)
for alpha in (0.01, 0.05, 0.10):
    print(f"alpha {alpha:.2f}: null rejection rate {calibration_trial(null, trials=500, alpha=alpha):.3f}")

# Power against increasing effects at a fixed noise level.
for effect in (0.01, 0.02, 0.05):
    spec = SynthSpec(n=200, beta_a_yhat=effect, noise_sd=0.1, seed=0)
    print(f"effect {effect:.2f}: rejection rate {calibration_trial(spec, trials=200):.3f}")
