"""Fit a high-dimensional poisson model and read the inference table.

Simulates n=300 counts driven by three of p=400 predictors, runs the
split-and-smooth estimator, and prints estimates with confidence
intervals for the true signals and a few noise coordinates.
"""

import numpy as np

from ssglm import Dataset, infer, make_selector, ssglm_fit

rng = np.random.default_rng(1)
n, p = 300, 400
signals = {12: 0.9, 77: -0.7, 240: 0.6}

X = rng.standard_normal((n, p))
eta = 0.8 + sum(v * X[:, j] for j, v in signals.items())
Y = rng.poisson(np.exp(eta)).astype(float)
ds = Dataset(Y=Y, X=X, labels=None)

selector = make_selector("sis", iterations=2)
fit = ssglm_fit(ds, "poisson", selector, q=0.5, B=100, seed=7)
report, variance = infer(fit, alpha=0.05)

print(f"splits: B={fit.plan.B}, n1={fit.plan.n1}, "
      f"clamped variances: {int(variance.clamped.sum())}")
print(f"{'coef':>10} {'truth':>7} {'est':>8} {'se':>7} "
      f"{'95% CI':>19} {'p':>9} {'sel':>5}")
show = [0] + [j + 1 for j in sorted(signals)] + [2, 151, 399]
for j in show:
    truth = 0.8 if j == 0 else signals.get(j - 1, 0.0)
    name = "intercept" if j == 0 else f"x{j}"
    sel = "" if j == 0 else f"{fit.selection_freq[j - 1]:.2f}"
    print(f"{name:>10} {truth:>7.2f} {report.beta_hat[j]:>8.3f} "
          f"{report.se[j]:>7.3f} [{report.ci_lower[j]:>7.3f}, "
          f"{report.ci_upper[j]:>7.3f}] {report.p_values[j]:>9.2e} {sel:>5}")
