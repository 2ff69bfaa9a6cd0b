"""Tests for the synthetic generators and the replication engine."""

import numpy as np
import pytest

from ssglm.simulate import (SimScenario, gen_design, gen_response, gen_truth,
                            load_scenario, run_scenario, save_scenario,
                            sweep_split_proportion)


def test_gen_design_identity_moments():
    rng = np.random.default_rng(0)
    X = gen_design(4000, 5, {"kind": "identity"}, rng)
    assert np.all(np.abs(X.mean(axis=0)) < 1e-12)        # centered
    C = np.corrcoef(X.T)
    assert np.all(np.abs(C - np.eye(5)) < 0.06)


def test_gen_design_ar1_correlation():
    rng = np.random.default_rng(1)
    X = gen_design(6000, 4, {"kind": "ar1", "rho": 0.5}, rng)
    C = np.corrcoef(X.T)
    expect = 0.5 ** np.abs(np.subtract.outer(np.arange(4), np.arange(4)))
    assert np.all(np.abs(C - expect) < 0.05)


def test_gen_design_cs_correlation():
    rng = np.random.default_rng(2)
    X = gen_design(6000, 4, {"kind": "cs", "rho": 0.3}, rng)
    C = np.corrcoef(X.T)
    expect = np.full((4, 4), 0.3)
    np.fill_diagonal(expect, 1.0)
    assert np.all(np.abs(C - expect) < 0.05)


def test_gen_design_validation():
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError, match="ar1 rho"):
        gen_design(10, 3, {"kind": "ar1", "rho": 1.5}, rng)
    with pytest.raises(ValueError, match="compound symmetry"):
        gen_design(10, 3, {"kind": "cs", "rho": -0.9}, rng)
    with pytest.raises(ValueError, match="unknown correlation"):
        gen_design(10, 3, {"kind": "toeplitz"}, rng)


def test_gen_truth_fixed():
    beta, s = gen_truth(10, {"kind": "fixed", "intercept": 1.0,
                             "indices": [3, 7], "values": [0.5, -0.5]},
                        np.random.default_rng(0))
    assert beta[0] == 1.0
    assert beta[4] == 0.5 and beta[8] == -0.5
    assert np.count_nonzero(beta) == 3
    assert s.tolist() == [3, 7]


def test_gen_truth_random():
    beta, s = gen_truth(50, {"kind": "random", "s0": 5, "low": 0.5,
                             "high": 1.5}, np.random.default_rng(1))
    assert s.size == 5
    mags = np.abs(beta[s + 1])
    assert np.all((mags >= 0.5) & (mags <= 1.5))


def test_gen_truth_nonsparse():
    beta, s = gen_truth(200, {"kind": "nonsparse", "s0": 100},
                        np.random.default_rng(2))
    assert s.size == 100
    vals = beta[s + 1]
    big = np.sort(vals[np.abs(vals) > 0.5])
    assert np.allclose(big, [-1.5, -1.0, 1.0, 1.5])
    assert np.sum(np.abs(vals) <= 0.5) == 96


def test_gen_truth_validation():
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError, match="equal length"):
        gen_truth(10, {"kind": "fixed", "indices": [1], "values": [1, 2]},
                  rng)
    with pytest.raises(ValueError, match="unknown beta spec"):
        gen_truth(10, {"kind": "spike"}, rng)


def test_gen_response_families():
    rng = np.random.default_rng(3)
    X = rng.standard_normal((5000, 2))
    beta = np.array([0.5, 0.4, -0.3])
    eta = beta[0] + X @ beta[1:]
    yg = gen_response(X, beta, "gaussian", np.random.default_rng(4))
    assert abs(np.mean(yg - eta)) < 0.05
    yb = gen_response(X, beta, "binomial", np.random.default_rng(5))
    assert set(np.unique(yb)) <= {0.0, 1.0}
    yp = gen_response(X, beta, "poisson", np.random.default_rng(6))
    assert np.all(yp >= 0) and np.all(yp == np.floor(yp))
    assert abs(np.mean(yp) - np.mean(np.exp(eta))) < 0.1


def test_gen_response_negative_binomial_overdispersion():
    rng = np.random.default_rng(7)
    X = np.zeros((200000, 1))
    beta = np.array([1.0, 0.0])          # constant mean e
    r = 10.0
    y = gen_response(X, beta, "negative_binomial", rng, nb_dispersion=r)
    mu = np.e
    assert abs(y.mean() - mu) < 0.03
    # NB variance mu + mu^2/r, clearly above the poisson mu
    expect_var = mu + mu * mu / r
    assert abs(y.var() - expect_var) < 0.1


def test_gen_response_validation():
    with pytest.raises(ValueError, match="unknown response family"):
        gen_response(np.zeros((3, 1)), np.array([0.0, 0.0]), "gamma",
                     np.random.default_rng(0))


def _tiny_scenario(**kw):
    base = dict(
        name="tiny", family="gaussian", n=60, p=10,
        beta_spec={"kind": "fixed", "indices": [1, 4],
                   "values": [1.0, -1.0]},
        q=0.5, B=6, replications=3, selector="sis",
        selector_options={"d": 4}, seed=3)
    base.update(kw)
    return SimScenario(**base)


def test_scenario_yaml_round_trip(tmp_path):
    sc = _tiny_scenario()
    path = tmp_path / "s.yaml"
    save_scenario(sc, str(path))
    back = load_scenario(str(path))
    assert back.to_dict() == sc.to_dict()


def test_scenario_rejects_unknown_keys():
    with pytest.raises(ValueError, match="unknown scenario keys"):
        SimScenario.from_dict({**_tiny_scenario().to_dict(), "bogus": 1})


def test_run_scenario_metrics_shapes():
    rep = run_scenario(_tiny_scenario())
    assert rep.bias.shape == (11,)
    assert rep.coverage.shape == (11,)
    assert rep.effective_K == 3
    assert rep.failures == 0
    assert rep.signal_indices.tolist() == [2, 5]
    noise = rep.noise_mask()
    assert not noise[0] and not noise[2] and not noise[5]
    assert noise.sum() == 8
    # strong gaussian signals are essentially unbiased here
    assert np.all(np.abs(rep.bias[[2, 5]]) < 0.2)
    assert np.all(rep.selection_freq[[1, 4]] > 0.9)
    assert rep.beta_hat_reps.shape == (3, 11)


def test_run_scenario_deterministic():
    r1 = run_scenario(_tiny_scenario())
    r2 = run_scenario(_tiny_scenario())
    assert np.array_equal(r1.beta_hat_reps, r2.beta_hat_reps)


def test_run_scenario_auc_for_binomial():
    sc = _tiny_scenario(family="binomial", n=80,
                        beta_spec={"kind": "fixed", "indices": [1, 4],
                                   "values": [1.5, -1.5]})
    rep = run_scenario(sc)
    assert 0.5 < rep.auc <= 1.0


def test_sweep_split_proportion():
    rows = sweep_split_proportion(_tiny_scenario(replications=2),
                                  [0.4, 0.6])
    assert [r["q"] for r in rows] == [0.4, 0.6]
    assert all(np.isfinite(r["mse_avg"]) for r in rows)


def test_metrics_report_summary_rows():
    rep = run_scenario(_tiny_scenario())
    rows = rep.summary_rows()
    assert len(rows) == 11
    assert rows[0]["coef"] == "intercept"
    assert rows[2]["is_signal"] and not rows[3]["is_signal"]
