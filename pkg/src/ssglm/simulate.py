"""Synthetic-data generators and a replication engine with the usual
frequentist metrics (bias, SE vs SD, coverage, power, type I error)."""

import time
import warnings
from dataclasses import dataclass, field, asdict

import numpy as np
import yaml

from .data import Dataset
from .inference import contrast_test, infer, subvector_covariance, subvector_fit
from .selection import make_selector
from .smoothing import ssglm_fit
from .splitting import substream

TAG_DESIGN = 10
TAG_TRUTH = 11
TAG_RESPONSE = 12


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------

def gen_design(n, p, correlation, rng):
    """Draw n i.i.d. mean-zero multivariate normal rows, then center columns.

    correlation: {"kind": "identity"} | {"kind": "ar1", "rho": r}
    | {"kind": "cs", "rho": r}.
    """
    kind = correlation.get("kind", "identity")
    rho = float(correlation.get("rho", 0.0))
    Z = rng.standard_normal((n, p))
    if kind == "identity":
        X = Z
    elif kind == "ar1":
        if not -1.0 < rho < 1.0:
            raise ValueError("ar1 rho must be in (-1, 1)")
        idx = np.arange(p)
        sigma = rho ** np.abs(idx[:, None] - idx[None, :])
        X = Z @ np.linalg.cholesky(sigma).T
    elif kind == "cs":
        if rho <= -1.0 / (p - 1) or rho >= 1.0:
            raise ValueError(
                f"compound symmetry needs rho in (-1/(p-1), 1); got {rho}")
        sigma = np.full((p, p), rho)
        np.fill_diagonal(sigma, 1.0)
        X = Z @ np.linalg.cholesky(sigma).T
    else:
        raise ValueError(f"unknown correlation kind {kind!r}")
    return X - X.mean(axis=0)


def gen_truth(p, beta_spec, rng):
    """Build (beta_star, S_star) from a declarative coefficient spec.

    kinds:
      fixed     — exact indices/values (plus intercept)
      random    — s0 random positions, |values| ~ Unif[low, high],
                  random signs
      nonsparse — s0-4 small effects ~ Unif[-0.5, 0.5] plus the four
                  values (-1.5, -1, 1, 1.5) at random positions
    """
    kind = beta_spec["kind"]
    intercept = float(beta_spec.get("intercept", 0.0))
    beta = np.zeros(p + 1)
    beta[0] = intercept
    if kind == "fixed":
        idx = np.asarray(beta_spec["indices"], dtype=np.int64)
        vals = np.asarray(beta_spec["values"], dtype=float)
        if idx.shape != vals.shape:
            raise ValueError("indices and values must have equal length")
        beta[idx + 1] = vals
        s_star = np.sort(idx)
    elif kind == "random":
        s0 = int(beta_spec["s0"])
        low = float(beta_spec.get("low", 0.5))
        high = float(beta_spec.get("high", 1.5))
        idx = np.sort(rng.choice(p, size=s0, replace=False))
        mags = rng.uniform(low, high, size=s0)
        signs = rng.choice((-1.0, 1.0), size=s0)
        beta[idx + 1] = signs * mags
        s_star = idx
    elif kind == "nonsparse":
        s0 = int(beta_spec.get("s0", 100))
        big = np.asarray(beta_spec.get("big_values", (-1.5, -1.0, 1.0, 1.5)))
        if s0 <= big.size:
            raise ValueError("nonsparse spec needs s0 > number of big values")
        idx = np.sort(rng.choice(p, size=s0, replace=False))
        vals = rng.uniform(-0.5, 0.5, size=s0)
        big_pos = rng.choice(s0, size=big.size, replace=False)
        vals[big_pos] = big
        beta[idx + 1] = vals
        s_star = idx
    else:
        raise ValueError(f"unknown beta spec kind {kind!r}")
    return beta, s_star


def gen_response(X, beta_star, family, rng, nb_dispersion=10.0):
    """Draw responses from the linear predictor under the named family.

    family may also be 'negative_binomial': mean exp(eta) with
    dispersion r, so a fitted poisson model is mis-specified only in the
    overdispersion.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    beta_star = np.asarray(beta_star, dtype=float)
    eta = beta_star[0] + X @ beta_star[1:]
    if not np.all(np.isfinite(eta)):
        raise ValueError("non-finite linear predictor")
    if family == "gaussian":
        return eta + rng.standard_normal(X.shape[0])
    if family in ("binomial", "binomial_logit"):
        prob = 1.0 / (1.0 + np.exp(-eta))
        return rng.binomial(1, prob).astype(float)
    if family == "poisson":
        mu = np.exp(eta)
        if not np.all(np.isfinite(mu)):
            raise ValueError("poisson mean overflow")
        return rng.poisson(mu).astype(float)
    if family == "negative_binomial":
        r = float(nb_dispersion)
        mu = np.exp(eta)
        if not np.all(np.isfinite(mu)):
            raise ValueError("negative binomial mean overflow")
        return rng.negative_binomial(r, r / (r + mu)).astype(float)
    raise ValueError(f"unknown response family {family!r}")


# ---------------------------------------------------------------------------
# scenarios
# ---------------------------------------------------------------------------

@dataclass
class SimScenario:
    """Declarative description of one replication study."""

    name: str
    family: str                      # family fitted by the estimator
    n: int
    p: int
    beta_spec: dict
    correlation: dict = field(default_factory=lambda: {"kind": "identity"})
    response_family: str = None      # data-generating family; default: family
    nb_dispersion: float = 10.0
    q: float = 0.5
    B: int = 100
    replications: int = 100
    selector: str = "sis"
    selector_options: dict = field(default_factory=dict)
    alpha: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.response_family is None:
            self.response_family = self.family
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must be in (0, 1)")
        rho = self.correlation.get("rho")
        if rho is not None and not -1.0 < float(rho) < 1.0:
            raise ValueError("rho must be in (-1, 1)")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown scenario keys: {sorted(unknown)}")
        return cls(**d)


def save_scenario(scenario, path):
    with open(path, "w") as fh:
        yaml.safe_dump(scenario.to_dict(), fh, sort_keys=False)


def load_scenario(path):
    with open(path) as fh:
        d = yaml.safe_load(fh)
    return SimScenario.from_dict(d)


def _replicate_data(scenario, k):
    """Design, truth, and response for replication k (deterministic)."""
    rng_x = substream(scenario.seed, k, TAG_DESIGN)
    X = gen_design(scenario.n, scenario.p, scenario.correlation, rng_x)
    if scenario.beta_spec["kind"] == "fixed":
        rng_t = substream(scenario.seed, 0, TAG_TRUTH)
    else:
        rng_t = substream(scenario.seed, k, TAG_TRUTH)
    beta_star, s_star = gen_truth(scenario.p, scenario.beta_spec, rng_t)
    rng_y = substream(scenario.seed, k, TAG_RESPONSE)
    Y = gen_response(X, beta_star, scenario.response_family, rng_y,
                     nb_dispersion=scenario.nb_dispersion)
    ds = Dataset(Y=Y, X=X, labels=None).center()
    return ds, beta_star, s_star


def _auc(Y, score):
    """Rank-based AUC of `score` against binary Y."""
    pos = score[Y == 1]
    neg = score[Y == 0]
    if pos.size == 0 or neg.size == 0:
        return np.nan
    ranks = np.argsort(np.argsort(np.concatenate([pos, neg]), kind="stable"),
                       kind="stable") + 1.0
    # midranks for ties
    allv = np.concatenate([pos, neg])
    order = np.argsort(allv, kind="stable")
    sorted_v = allv[order]
    midrank = np.empty_like(sorted_v)
    i = 0
    while i < sorted_v.size:
        j = i
        while j + 1 < sorted_v.size and sorted_v[j + 1] == sorted_v[i]:
            j += 1
        midrank[i:j + 1] = 0.5 * (i + j) + 1.0
        i = j + 1
    ranks = np.empty_like(midrank)
    ranks[order] = midrank
    r_pos = ranks[: pos.size].sum()
    return (r_pos - pos.size * (pos.size + 1) / 2.0) / (pos.size * neg.size)


@dataclass
class MetricsReport:
    """Replication metrics, per coordinate (intercept first) and aggregated."""

    scenario: SimScenario
    bias: np.ndarray
    se_mean: np.ndarray
    sd: np.ndarray
    coverage: np.ndarray
    selection_freq: np.ndarray       # (p,) selector frequency over splits/reps
    mse: np.ndarray
    rejection: np.ndarray
    signal_indices: np.ndarray       # coefficient positions (1-based = j)
    mse_avg: float
    effective_K: int
    failures: int
    auc: float
    wall_time_per_rep: float
    beta_hat_reps: np.ndarray = None  # (K, p+1)
    truth_reps: np.ndarray = None     # (K, p+1)

    def noise_mask(self):
        mask = np.ones(self.bias.shape[0], dtype=bool)
        mask[0] = False
        mask[self.signal_indices] = False
        return mask

    def mc_se(self, rate, k=None):
        k = k or self.effective_K
        return float(np.sqrt(max(rate * (1 - rate), 1e-12) / k))

    def summary_rows(self):
        """One row per coordinate for CSV emission."""
        rows = []
        for j in range(self.bias.shape[0]):
            rows.append({
                "coef": "intercept" if j == 0 else f"x{j}",
                "bias": self.bias[j],
                "se": self.se_mean[j],
                "sd": self.sd[j],
                "cov_prob": self.coverage[j],
                "sel_freq": (np.nan if j == 0
                             else self.selection_freq[j - 1]),
                "mse": self.mse[j],
                "rejection": self.rejection[j],
                "is_signal": bool(j in set(self.signal_indices.tolist())),
            })
        return rows


def run_scenario(scenario, n_jobs=1, keep_reps=True, verbose=False):
    """K independent replications of fit + inference, with metrics.

    A replication that raises is recorded and excluded; the report
    carries the effective K.
    """
    K = scenario.replications
    p = scenario.p
    selector = make_selector(scenario.selector, **scenario.selector_options)
    beta_hats, truths, ses, covers, rejects = [], [], [], [], []
    sel_freqs = []
    aucs = []
    failures = 0
    signal = None
    t0 = time.perf_counter()
    for k in range(K):
        try:
            ds, beta_star, s_star = _replicate_data(scenario, k)
            fit = ssglm_fit(ds, scenario.family, selector, q=scenario.q,
                            B=scenario.B, seed=scenario.seed * 1_000_003 + k,
                            n_jobs=n_jobs)
            report, _ = infer(fit, alpha=scenario.alpha)
        except Exception as err:
            failures += 1
            warnings.warn(f"replication {k} failed: {err}")
            continue
        signal = s_star + 1 if signal is None else signal
        beta_hats.append(fit.beta_hat)
        truths.append(beta_star)
        ses.append(report.se)
        covers.append((report.ci_lower <= beta_star)
                      & (beta_star <= report.ci_upper))
        rejects.append(report.p_values < scenario.alpha)
        sel_freqs.append(fit.selection_freq)
        if scenario.family in ("binomial", "binomial_logit"):
            eta_hat = fit.beta_hat[0] + ds.X @ fit.beta_hat[1:]
            aucs.append(_auc(ds.Y, eta_hat))
        if verbose:
            print(f"[{scenario.name}] replication {k + 1}/{K} done")
    elapsed = time.perf_counter() - t0
    if not beta_hats:
        raise RuntimeError("every replication failed")

    bh = np.vstack(beta_hats)
    tr = np.vstack(truths)
    Keff = bh.shape[0]
    err = bh - tr
    bias = err.mean(axis=0)
    sd = bh.std(axis=0, ddof=1) if Keff > 1 else np.zeros(p + 1)
    mse = np.mean(err * err, axis=0)
    coverage = np.vstack(covers).mean(axis=0)
    rejection = np.vstack(rejects).mean(axis=0)
    se_mean = np.vstack(ses).mean(axis=0)
    selection_freq = np.vstack(sel_freqs).mean(axis=0)
    return MetricsReport(
        scenario=scenario, bias=bias, se_mean=se_mean, sd=sd,
        coverage=coverage, selection_freq=selection_freq, mse=mse,
        rejection=rejection,
        signal_indices=np.asarray(signal, dtype=np.int64),
        mse_avg=float(np.mean(mse[1:])), effective_K=Keff,
        failures=failures,
        auc=float(np.nanmean(aucs)) if aucs else np.nan,
        wall_time_per_rep=elapsed / max(Keff, 1),
        beta_hat_reps=bh if keep_reps else None,
        truth_reps=tr if keep_reps else None)


def contrast_scenario(scenario, S1, contrasts, n_jobs=1, verbose=False):
    """Rejection rates for Wald contrast tests over K replications.

    `contrasts` is a sequence of (Q, R) pairs on the coordinates S1.
    Returns a list of dicts with per-contrast rates and their MC SEs.
    """
    K = scenario.replications
    S1 = np.sort(np.asarray(S1, dtype=np.int64))
    selector = make_selector(scenario.selector, **scenario.selector_options)
    reject = np.zeros((K, len(contrasts)), dtype=float)
    used = 0
    for k in range(K):
        try:
            ds, beta_star, _ = _replicate_data(scenario, k)
            b1, est, plan = subvector_fit(
                ds, scenario.family, selector, S1, q=scenario.q,
                B=scenario.B, seed=scenario.seed * 1_000_003 + k,
                n_jobs=n_jobs)
            sigma1 = subvector_covariance(plan, est, b1)
        except Exception as err:
            warnings.warn(f"replication {k} failed: {err}")
            continue
        for ci, (Q, R) in enumerate(contrasts):
            t = contrast_test(b1, sigma1, Q, R)
            reject[used, ci] = float(t.p_value < scenario.alpha)
        used += 1
        if verbose:
            print(f"[{scenario.name}] contrast replication {k + 1}/{K} done")
    if used == 0:
        raise RuntimeError("every replication failed")
    rates = reject[:used].mean(axis=0)
    out = []
    for ci, (Q, R) in enumerate(contrasts):
        rate = float(rates[ci])
        out.append({"contrast": ci, "Q": np.asarray(Q).tolist(),
                    "R": np.asarray(R).tolist(), "rejection_rate": rate,
                    "mc_se": float(np.sqrt(max(rate * (1 - rate), 1e-12)
                                           / used)),
                    "replications": used})
    return out


def sweep_split_proportion(scenario, q_values, n_jobs=1, verbose=False):
    """MSE_avg at each split proportion, for the q-vs-MSE curve."""
    rows = []
    for q in q_values:
        sc = SimScenario.from_dict({**scenario.to_dict(), "q": float(q)})
        rep = run_scenario(sc, n_jobs=n_jobs, keep_reps=False,
                           verbose=verbose)
        rows.append({"q": float(q), "mse_avg": rep.mse_avg,
                     "effective_K": rep.effective_K})
    return rows
