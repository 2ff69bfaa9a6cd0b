"""Joint inference on a fixed subvector with Wald contrast tests.

Builds a logistic model whose two strongest effects cancel
(beta_a + beta_b = 0), then tests that sum (a true null) and each
coefficient individually.
"""

import numpy as np

from ssglm import (Dataset, contrast_test, make_selector,
                   subvector_covariance, subvector_fit)

rng = np.random.default_rng(3)
n, p = 400, 300
a, b, c = 25, 140, 260          # signal positions

X = rng.standard_normal((n, p))
eta = -1.5 * X[:, a] + 1.5 * X[:, b] + 0.8 * X[:, c]
Y = rng.binomial(1, 1.0 / (1.0 + np.exp(-eta))).astype(float)
ds = Dataset(Y=Y, X=X, labels=None)

S1 = np.array([a, b, c])
b1, est, plan = subvector_fit(ds, "binomial",
                              make_selector("sis", iterations=2, d=8),
                              S1, q=0.5, B=100, seed=5)
sigma1 = subvector_covariance(plan, est, b1)

print("subvector estimate:", np.round(b1, 3))
print("covariance diagonal:", np.round(np.diag(sigma1), 4))

tests = [
    ("b_a + b_b = 0  (true)", np.array([[1.0, 1.0, 0.0]]), np.array([0.0])),
    ("b_a = 0        (false)", np.array([[1.0, 0.0, 0.0]]), np.array([0.0])),
    ("b_a = b_b = b_c = 0", np.eye(3), np.zeros(3)),
]
for label, Q, R in tests:
    t = contrast_test(b1, sigma1, Q, R)
    print(f"{label:>24}: T = {t.T:8.3f} on {t.df} df, p = {t.p_value:.4f}")
