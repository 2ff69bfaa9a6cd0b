"""The batched append-one-column solver must agree with one-at-a-time fits."""

import numpy as np
import pytest

from ssglm._batched import fit_append_batch
from ssglm.glm import fit_mle


@pytest.mark.parametrize("family", ["gaussian", "binomial", "poisson"])
def test_batch_matches_individual_fits(family):
    rng = np.random.default_rng(21)
    n, base, extra = 80, 3, 12
    Xb = rng.standard_normal((n, base))
    Xc = rng.standard_normal((n, extra))
    eta = 0.2 + Xb @ np.array([0.5, -0.4, 0.3])
    if family == "gaussian":
        Y = eta + rng.standard_normal(n)
    elif family == "binomial":
        Y = rng.binomial(1, 1 / (1 + np.exp(-eta))).astype(float)
    else:
        Y = rng.poisson(np.exp(eta)).astype(float)

    res = fit_append_batch(Y, Xb, Xc, family)
    assert res.beta.shape == (extra, base + 2)
    for j in range(extra):
        ref = fit_mle(Y, np.hstack([Xb, Xc[:, j:j + 1]]), family)
        assert res.converged[j]
        assert np.allclose(res.beta[j], ref.beta, atol=1e-6), j


def test_batch_no_base_design():
    rng = np.random.default_rng(5)
    X = rng.standard_normal((50, 4))
    Y = rng.poisson(np.exp(0.3 + 0.6 * X[:, 0])).astype(float)
    res = fit_append_batch(Y, None, X, "poisson")
    for j in range(4):
        ref = fit_mle(Y, X[:, j:j + 1], "poisson")
        assert np.allclose(res.beta[j], ref.beta, atol=1e-7)


def test_batch_warm_start_changes_nothing():
    rng = np.random.default_rng(6)
    Xb = rng.standard_normal((60, 2))
    Xc = rng.standard_normal((60, 5))
    Y = rng.binomial(1, 0.4, size=60).astype(float)
    base = fit_mle(Y, Xb, "binomial")
    cold = fit_append_batch(Y, Xb, Xc, "binomial")
    warm = fit_append_batch(Y, Xb, Xc, "binomial", init_base=base.beta)
    assert np.allclose(cold.beta, warm.beta, atol=1e-6)


def test_batch_flags_separated_column():
    # one appended column perfectly separates the response
    rng = np.random.default_rng(8)
    n = 40
    Xc = np.hstack([rng.standard_normal((n, 1)), np.linspace(-1, 1, n)[:, None]])
    Y = (Xc[:, 1] > 0).astype(float)
    res = fit_append_batch(Y, None, Xc, "binomial")
    assert res.stabilized[1]
    assert not res.stabilized[0]
    assert np.all(np.isfinite(res.beta))
