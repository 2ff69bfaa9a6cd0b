"""Low-dimensional GLM fitting: likelihood, score, information, IRLS.

All designs are passed without an intercept column; an intercept is
prepended internally and coefficient vectors are ordered (intercept,
covariates). Likelihoods are averaged over rows, so the score and
observed information carry a 1/n factor.
"""

from dataclasses import dataclass

import numpy as np

from .families import get_family, _POISSON_THETA_MAX

DEFAULT_SCORE_TOL = 1e-8
DEFAULT_MAX_ITER = 100
MAX_HALVINGS = 20
DIVERGENCE_BOUND = 30.0
RIDGE_LAMBDA = 1e-6


@dataclass
class PartialFit:
    """Result of a maximum-likelihood fit on a subset of predictors."""

    subset: tuple
    beta: np.ndarray            # (1 + |S|,), intercept first
    neg_loglik: float
    info: np.ndarray            # (1+|S|) x (1+|S|) observed information
    converged: bool
    iterations: int
    stabilized: bool = False


def _with_intercept(X):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return np.hstack([np.ones((X.shape[0], 1)), X])


def _clamped_theta(family, eta):
    """Clamp natural parameters so the poisson cumulant stays finite."""
    if family.kind == "poisson":
        return np.clip(eta, -_POISSON_THETA_MAX, _POISSON_THETA_MAX)
    return eta


def neg_log_likelihood(beta_S, Y, X_S, family):
    """Average negative log-likelihood (1/n) sum{A(theta_i) - Y_i theta_i}.

    The c(Y) normalizer is dropped; it does not depend on beta.
    """
    family = get_family(family)
    Y = np.asarray(Y, dtype=float)
    Xbar = _with_intercept(X_S)
    beta_S = np.asarray(beta_S, dtype=float)
    if beta_S.shape[0] != Xbar.shape[1]:
        raise ValueError(
            f"beta has length {beta_S.shape[0]}, design implies {Xbar.shape[1]}")
    if Y.shape[0] != Xbar.shape[0]:
        raise ValueError("response and design row counts differ")
    theta = _clamped_theta(family, Xbar @ beta_S)
    return float(np.mean(family.cumulant(theta) - Y * theta))


def score_and_information(beta_S, Y, X_S, family):
    """Score U_S and observed information I_S at beta_S.

    U_S = (1/n) Xbar' (A'(Xbar beta) - Y)
    I_S = (1/n) Xbar' diag(A''(Xbar beta)) Xbar
    """
    family = get_family(family)
    Y = np.asarray(Y, dtype=float)
    Xbar = _with_intercept(X_S)
    beta_S = np.asarray(beta_S, dtype=float)
    if beta_S.shape[0] != Xbar.shape[1]:
        raise ValueError(
            f"beta has length {beta_S.shape[0]}, design implies {Xbar.shape[1]}")
    if Y.shape[0] != Xbar.shape[0]:
        raise ValueError("response and design row counts differ")
    n = Y.shape[0]
    theta = _clamped_theta(family, Xbar @ beta_S)
    mu = family.mean(theta)
    w = family.variance(theta)
    U = Xbar.T @ (mu - Y) / n
    info = (Xbar.T * w) @ Xbar / n
    return U, info


def _initial_beta(family, Y, ncoef):
    beta = np.zeros(ncoef)
    mu0 = float(np.mean(Y))
    if family.kind == "binomial_logit":
        mu0 = min(max(mu0, 1e-3), 1.0 - 1e-3)
    elif family.kind == "poisson":
        mu0 = max(mu0, 1e-3)
    beta[0] = float(family.link(mu0))
    return beta


def fit_mle(Y, X_S, family, max_iter=DEFAULT_MAX_ITER,
            score_tol=DEFAULT_SCORE_TOL, ridge_fallback=True,
            subset=()):
    """Newton/IRLS minimizer of the partial negative log-likelihood.

    Gaussian fits use the normal-equations closed form. Other families
    run Newton with step halving; iterates with any |coefficient| above
    DIVERGENCE_BOUND (quasi-separation, drifting poisson fits) are
    restarted with a tiny ridge penalty and flagged `stabilized`.

    Raises LinAlgError for rank-deficient designs.
    """
    family = get_family(family)
    Y = np.asarray(Y, dtype=float)
    Xbar = _with_intercept(X_S)
    n, m = Xbar.shape
    if m >= n:
        raise ValueError(f"design has {m} coefficients but only {n} rows")

    if family.kind == "gaussian":
        G = Xbar.T @ Xbar
        np.linalg.cholesky(G)  # doubles as the rank check
        beta = np.linalg.solve(G, Xbar.T @ Y)
        nll = neg_log_likelihood(beta, Y, X_S, family)
        return PartialFit(subset=tuple(subset), beta=beta, neg_loglik=nll,
                          info=G / n, converged=True, iterations=1)

    ridge = 0.0
    stabilized = False
    beta = _initial_beta(family, Y, m)
    nll = neg_log_likelihood(beta, Y, X_S, family) + 0.5 * ridge * beta @ beta
    converged = False
    it = 0
    while it < max_iter:
        it += 1
        U, info = score_and_information(beta, Y, X_S, family)
        if ridge > 0.0:
            U = U + ridge * beta
            info = info + ridge * np.eye(m)
        if np.max(np.abs(U)) <= score_tol:
            converged = True
            break
        try:
            step = np.linalg.solve(info, U)
        except np.linalg.LinAlgError:
            if ridge == 0.0 and ridge_fallback:
                ridge = RIDGE_LAMBDA
                stabilized = True
                continue
            raise
        # step halving keeps the descent monotone
        scale = 1.0
        improved = False
        for _ in range(MAX_HALVINGS + 1):
            cand = beta - scale * step
            cand_nll = (neg_log_likelihood(cand, Y, X_S, family)
                        + 0.5 * ridge * cand @ cand)
            if cand_nll <= nll + 1e-14:
                improved = True
                break
            scale *= 0.5
        if not improved:
            break
        beta, nll = cand, cand_nll
        if np.max(np.abs(beta)) > DIVERGENCE_BOUND and ridge == 0.0:
            if not ridge_fallback:
                raise np.linalg.LinAlgError(
                    "fit diverged and ridge fallback is disabled")
            ridge = RIDGE_LAMBDA
            stabilized = True
            beta = _initial_beta(family, Y, m)
            nll = (neg_log_likelihood(beta, Y, X_S, family)
                   + 0.5 * ridge * beta @ beta)
            it = 0

    _, info = score_and_information(beta, Y, X_S, family)
    nll = neg_log_likelihood(beta, Y, X_S, family)
    return PartialFit(subset=tuple(subset), beta=beta, neg_loglik=nll,
                      info=info, converged=converged, iterations=it,
                      stabilized=stabilized)
