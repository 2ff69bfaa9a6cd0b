"""Variance estimation and hypothesis testing for smoothed estimates.

The variance of each smoothed coefficient comes from the covariance
between split-membership indicators and split-level estimates (the
infinitesimal-jackknife form with a finite-sample factor), with a
finite-B bias correction. Subvector covariance and Wald-type contrast
tests extend the same construction to fixed small index sets.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.stats import chi2, norm

from .families import get_family
from .glm import fit_mle
from .smoothing import SmoothedFit
from .splitting import TAG_CV, TAG_RETRY, make_splits, substream

def _jackknife_factor(n, n1):
    return n * (n - 1) / (n - n1) ** 2


def jackknife_variance(plan, beta_mat, beta_hat, valid=None):
    """Delta-method variance of each smoothed coordinate.

    cov_ij = (1/B) sum_b (J_bi - Jbar_i)(btilde_j^b - bhat_j)
    V_j    = n(n-1)/(n-n1)^2 * sum_i cov_ij^2

    Coordinates with failed splits (valid[b, j] False) are computed over
    their valid splits only, with the per-coordinate effective B.
    """
    beta_mat = np.asarray(beta_mat, dtype=float)
    B, ncoef = beta_mat.shape
    if B < 2:
        raise ValueError("variance estimation needs B >= 2 splits")
    if plan.B != B:
        raise ValueError("plan and estimate matrix disagree on B")
    J = plan.assignments.astype(float)
    factor = _jackknife_factor(plan.n, plan.n1)

    if valid is None or np.all(valid):
        Jc = J - J.mean(axis=0)
        D = beta_mat - beta_hat
        cov = Jc.T @ D / B                      # (n, ncoef)
        return factor * np.sum(cov * cov, axis=0)

    valid = np.asarray(valid, dtype=bool)
    v_hat = np.empty(ncoef)
    for j in range(ncoef):
        ok = valid[:, j]
        Bj = int(ok.sum())
        if Bj < 2:
            v_hat[j] = np.nan
            continue
        Jj = J[ok]
        Jc = Jj - Jj.mean(axis=0)
        d = beta_mat[ok, j] - beta_hat[j]
        cov = Jc.T @ d / Bj
        v_hat[j] = factor * np.sum(cov * cov)
    return v_hat


def bias_corrected_variance(v_hat, plan, beta_mat, beta_hat, valid=None):
    """Finite-B correction: subtract (n/B^2)(n1/(n-n1)) sum_b (btilde-bhat)^2.

    Corrected values that fall at or below zero indicate the Monte Carlo
    correction has overshot; those coordinates fall back to the
    uncorrected V_j and are flagged.
    """
    beta_mat = np.asarray(beta_mat, dtype=float)
    B, ncoef = beta_mat.shape
    n, n1 = plan.n, plan.n1
    D = beta_mat - beta_hat
    if valid is None or np.all(valid):
        ss = np.sum(D * D, axis=0)
        corr = (n / B ** 2) * (n1 / (n - n1)) * ss
    else:
        valid = np.asarray(valid, dtype=bool)
        corr = np.empty(ncoef)
        for j in range(ncoef):
            ok = valid[:, j]
            Bj = int(ok.sum())
            if Bj < 2:
                corr[j] = np.nan
                continue
            ss = float(np.sum(D[ok, j] ** 2))
            corr[j] = (n / Bj ** 2) * (n1 / (n - n1)) * ss
    v_hat_B = v_hat - corr
    with np.errstate(invalid="ignore"):
        clamped = np.where(np.isnan(v_hat_B), False, v_hat_B <= 0)
    v_hat_B = np.where(clamped, v_hat, v_hat_B)
    return v_hat_B, clamped


@dataclass
class VarianceEstimate:
    v_hat: np.ndarray
    v_hat_B: np.ndarray
    clamped: np.ndarray


@dataclass
class InferenceReport:
    """Per-coefficient estimates, CIs, p-values and adjustments."""

    beta_hat: np.ndarray
    se: np.ndarray
    ci_lower: np.ndarray
    ci_upper: np.ndarray
    p_values: np.ndarray
    bonferroni: np.ndarray
    alpha: float
    selection_freq: np.ndarray = None
    labels: list = None


def coordinate_inference(beta_hat, v_hat_B, alpha=0.05, selection_freq=None,
                         labels=None, n_tests=None):
    """CIs and two-sided normal p-values from bias-corrected variances.

    The printed standard error is sqrt(V_j^B) directly; the variance
    estimator already carries the sample-size scaling. Bonferroni uses
    n_tests comparisons (default: number of non-intercept coefficients).
    """
    beta_hat = np.asarray(beta_hat, dtype=float)
    v_hat_B = np.asarray(v_hat_B, dtype=float)
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must be in (0, 1)")
    if np.any(v_hat_B[np.isfinite(v_hat_B)] < 0):
        raise ValueError("variances must be nonnegative")
    se = np.sqrt(v_hat_B)
    degenerate = (se == 0) & (beta_hat != 0)
    if np.any(degenerate):
        warnings.warn(f"{int(degenerate.sum())} coordinates have zero "
                      "estimated variance with nonzero estimates")
    zcrit = norm.ppf(1.0 - alpha / 2.0)
    ci_lower = beta_hat - zcrit * se
    ci_upper = beta_hat + zcrit * se
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0, np.abs(beta_hat) / se, np.inf)
    z = np.where((beta_hat == 0) & (se == 0), 0.0, z)
    p_values = 2.0 * norm.sf(z)
    if n_tests is None:
        n_tests = max(1, beta_hat.shape[0] - 1)
    bonferroni = np.minimum(1.0, n_tests * p_values)
    return InferenceReport(beta_hat=beta_hat, se=se, ci_lower=ci_lower,
                           ci_upper=ci_upper, p_values=p_values,
                           bonferroni=bonferroni, alpha=alpha,
                           selection_freq=selection_freq, labels=labels)


def infer(fit: SmoothedFit, alpha=0.05):
    """Full inference pipeline over a SmoothedFit."""
    beta_mat = fit.beta_matrix
    v_hat = jackknife_variance(fit.plan, beta_mat, fit.beta_hat, fit.valid)
    v_hat_B, clamped = bias_corrected_variance(v_hat, fit.plan, beta_mat,
                                               fit.beta_hat, fit.valid)
    report = coordinate_inference(fit.beta_hat, v_hat_B, alpha=alpha,
                                  selection_freq=fit.selection_freq,
                                  labels=fit.labels)
    variance = VarianceEstimate(v_hat=v_hat, v_hat_B=v_hat_B, clamped=clamped)
    return report, variance


# ---------------------------------------------------------------------------
# fixed subvectors and contrasts
# ---------------------------------------------------------------------------

def _subvector_split(b, Y, X, S1, family, selector, plan_row, seed,
                     max_select):
    d1 = np.flatnonzero(plan_row == 1)
    d2 = np.flatnonzero(plan_row == 0)
    try:
        sel = selector(Y[d2], X[d2], family, substream(seed, b, TAG_CV))
    except Exception as first_err:
        try:
            sel = selector(Y[d2], X[d2], family, substream(seed, b, TAG_RETRY))
        except Exception:
            raise RuntimeError(
                f"selection failed twice on split {b}: {first_err}"
            ) from first_err
    S = sel.selected
    if S.size > max_select:
        if sel.scores is not None:
            order = np.argsort(-sel.scores[S], kind="stable")
            S = np.sort(S[order[:max_select]])
        else:
            S = S[:max_select]
    union = np.union1d(S1, S)
    pf = fit_mle(Y[d1], X[d1][:, union], family, subset=tuple(union))
    pos = np.searchsorted(union, S1)
    return pf.beta[1 + pos], union


def subvector_fit(dataset, family, selector, S1, q=0.5, B=500, seed=0,
                  n_jobs=1):
    """Joint estimates for a fixed index set via per-split union fits.

    Each split fits Y1 on the union of S1 and the selected set in one
    regression (not p1 separate appends) and extracts the S1 block.
    Returns (beta1_hat, per-split estimate matrix, plan).
    """
    from joblib import Parallel, delayed

    family = get_family(family)
    if not np.all(dataset.centered):
        dataset = dataset.center()
    family.validate_response(dataset.Y)
    S1 = np.sort(np.asarray(S1, dtype=np.int64))
    if S1.size < 1:
        raise ValueError("S1 must contain at least one index")
    if np.any(S1 < 0) or np.any(S1 >= dataset.p):
        raise ValueError("S1 indices out of range")
    Y, X = dataset.Y, dataset.X
    plan = make_splits(dataset.n, q, B, seed)
    max_select = max(1, plan.n1 // 2)
    args = [(b, Y, X, S1, family, selector, plan.assignments[b], seed,
             max_select) for b in range(B)]
    if n_jobs == 1:
        out = [_subvector_split(*a) for a in args]
    else:
        out = Parallel(n_jobs=n_jobs)(
            delayed(_subvector_split)(*a) for a in args)
    est = np.vstack([e for e, _ in out])            # (B, p1)
    beta1_hat = est.mean(axis=0)
    return beta1_hat, est, plan


def subvector_covariance(plan, est, beta1_hat):
    """Delta-method covariance of a subvector estimate.

    Applies the same finite-sample factor n(n-1)/(n-n1)^2 as the
    one-dimensional variance so the p1=1 case agrees with
    jackknife_variance exactly.
    """
    est = np.asarray(est, dtype=float)
    B = est.shape[0]
    if B < 2:
        raise ValueError("covariance estimation needs B >= 2 splits")
    if plan.B != B:
        raise ValueError("plan and estimate matrix disagree on B")
    J = plan.assignments.astype(float)
    Jc = J - J.mean(axis=0)
    D = est - beta1_hat
    cov = Jc.T @ D / B                              # (n, p1)
    return _jackknife_factor(plan.n, plan.n1) * cov.T @ cov


@dataclass
class ContrastTest:
    """Wald-type test of H0: Q beta^(1) = R against chi-square(r)."""

    beta1_hat: np.ndarray
    sigma1_hat: np.ndarray
    Q: np.ndarray
    R: np.ndarray
    T: float
    df: int
    p_value: float


def contrast_test(beta1_hat, sigma1_hat, Q, R):
    """T = (Q bhat - R)' [Q Sigma Q']^{-1} (Q bhat - R), referred to chi2_r."""
    beta1_hat = np.asarray(beta1_hat, dtype=float)
    sigma1_hat = np.asarray(sigma1_hat, dtype=float)
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    R = np.atleast_1d(np.asarray(R, dtype=float))
    r, p1 = Q.shape
    if beta1_hat.shape[0] != p1 or sigma1_hat.shape != (p1, p1):
        raise ValueError("contrast dimensions do not match the subvector")
    if R.shape[0] != r:
        raise ValueError("R must have one entry per contrast row")
    if np.linalg.matrix_rank(Q) < r:
        raise ValueError("contrast matrix Q is rank-deficient")
    M = Q @ sigma1_hat @ Q.T
    diff = Q @ beta1_hat - R
    try:
        sol = np.linalg.solve(M, diff)
    except np.linalg.LinAlgError:
        bad = [i for i in range(r) if np.allclose(M[i], 0)]
        raise ValueError(
            f"Q Sigma Q' is singular (offending contrast rows: {bad})"
        ) from None
    T = float(diff @ sol)
    p_value = float(chi2.sf(T, df=r))
    return ContrastTest(beta1_hat=beta1_hat, sigma1_hat=sigma1_hat, Q=Q, R=R,
                        T=T, df=r, p_value=p_value)
