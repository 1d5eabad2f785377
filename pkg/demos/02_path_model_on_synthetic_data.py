"""
Recovering known path coefficients
===================================

Draw data from the path model with chosen coefficients and check that the
least-squares fit gets them back, with standard errors that shrink like
1/sqrt(n).
"""

import numpy as np

from pathfair import SynthSpec, fit_path_model, generate

truth = dict(beta_0_yhat=0.1, beta_a_yhat=0.2, beta_y_yhat=0.5)

# One moderately sized draw.
data, scores = generate(SynthSpec(n=1000, noise_sd=0.05, seed=3, **truth))
fit = fit_path_model(data.a, data.y, scores.raw)
for name, value in truth.items():
    est, se = fit.estimate(name), fit.se[name]
    print(f"{name:12s} true {value:.3f}  est {est:.4f}  ({(est - value) / se:+.2f} SE)")

# Quadrupling n should roughly halve the standard error of the bias path.
def bias_se(n, seed):
    data, scores = generate(SynthSpec(n=n, noise_sd=0.05, seed=seed))
    return fit_path_model(data.a, data.y, scores.raw).se["beta_a_yhat"]


for n in (250, 1000, 4000, 16000):
    print(f"n = {n:6d}: mean SE of the a -> score path {np.mean([bias_se(n, k) for k in range(20)]):.5f}")
