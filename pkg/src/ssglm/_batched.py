"""Vectorized Newton solver for families of append-one-column GLMs.

The smoothing estimator and marginal screening both fit many GLMs that
share a common base design and differ in a single appended column. This
module runs all of those fits simultaneously: one (n, J) linear-predictor
array and one batched Hessian solve per Newton iteration, with per-model
step halving, convergence tracking, and ridge stabilization. Models are
dropped from the working set as they converge, so late iterations only
pay for the stragglers.
"""

from dataclasses import dataclass

import numpy as np

from .families import get_family
from .glm import (DIVERGENCE_BOUND, MAX_HALVINGS, RIDGE_LAMBDA,
                  _clamped_theta, _initial_beta)


@dataclass
class BatchFit:
    """Coefficients and diagnostics for a batch of append-one fits."""

    beta: np.ndarray          # (J, m+1): intercept, base coefs, appended coef
    converged: np.ndarray     # (J,) bool
    stabilized: np.ndarray    # (J,) bool
    iterations: int


def _batch_nll(family, Y, eta, ridge, beta):
    theta = _clamped_theta(family, eta)
    nll = np.mean(family.cumulant(theta) - Y[:, None] * theta, axis=0)
    return nll + 0.5 * ridge * np.sum(beta * beta, axis=1)


def _batch_solve(H, U):
    try:
        return np.linalg.solve(H, U[:, :, None])[:, :, 0]
    except np.linalg.LinAlgError:
        # rare: some model's Hessian is singular; patch those individually
        steps = np.empty_like(U)
        for j in range(H.shape[0]):
            try:
                steps[j] = np.linalg.solve(H[j], U[j])
            except np.linalg.LinAlgError:
                steps[j] = np.linalg.lstsq(H[j], U[j], rcond=None)[0]
        return steps


def fit_append_batch(Y, X_base, X_cols, family, init_base=None,
                     max_iter=100, score_tol=1e-8):
    """Fit, for every column c of X_cols, the GLM of Y on [1, X_base, c].

    init_base optionally warm-starts the shared part of every model with
    the MLE of the base fit. Models that diverge (any |coefficient| above
    DIVERGENCE_BOUND) are restarted with a tiny ridge penalty and
    reported as stabilized; fits are never dropped.
    """
    family = get_family(family)
    Y = np.asarray(Y, dtype=float)
    X_cols = np.atleast_2d(np.asarray(X_cols, dtype=float))
    n, J = X_cols.shape
    if X_base is None or np.size(X_base) == 0:
        C = np.ones((n, 1))
    else:
        X_base = np.asarray(X_base, dtype=float)
        C = np.hstack([np.ones((n, 1)), X_base])
    m = C.shape[1]

    beta = np.zeros((J, m + 1))
    if init_base is not None:
        beta[:, :m] = np.asarray(init_base, dtype=float)
    else:
        beta[:, :m] = _initial_beta(family, Y, m)

    ridge = np.zeros(J)
    stabilized = np.zeros(J, dtype=bool)
    converged = np.zeros(J, dtype=bool)
    stuck = np.zeros(J, dtype=bool)

    it = 0
    active = np.arange(J)
    while it < max_iter and active.size:
        it += 1
        Xa = X_cols[:, active]
        ba = beta[active]
        ra = ridge[active]
        eta = C @ ba[:, :m].T + Xa * ba[:, m]
        theta = _clamped_theta(family, eta)
        mu = family.mean(theta)
        w = family.variance(theta)

        R = (mu - Y[:, None]) / n
        U = np.concatenate(
            [(C.T @ R).T, np.einsum("nj,nj->j", Xa, R)[:, None]], axis=1)
        U += ra[:, None] * ba

        done = np.max(np.abs(U), axis=1) <= score_tol
        converged[active[done]] = True
        live = ~done
        if not np.any(live):
            break
        a = active[live]
        Xa, ba, ra, U, w = Xa[:, live], ba[live], ra[live], U[live], w[:, live]
        Ja = a.size

        # batched observed information for [C, x_j]
        T = C[:, None, :] * w[:, :, None]                  # (n, Ja, m)
        Hcc = (T.reshape(n, -1).T @ C).reshape(Ja, m, m) / n
        Hcx = (C.T @ (w * Xa)).T / n                       # (Ja, m)
        Hxx = np.einsum("nj,nj->j", w * Xa, Xa) / n
        H = np.empty((Ja, m + 1, m + 1))
        H[:, :m, :m] = Hcc
        H[:, :m, m] = Hcx
        H[:, m, :m] = Hcx
        H[:, m, m] = Hxx
        H[:, np.arange(m + 1), np.arange(m + 1)] += ra[:, None]

        step = _batch_solve(H, U)

        # per-model step halving; models that cannot descend are frozen
        eta0 = C @ ba[:, :m].T + Xa * ba[:, m]
        nll0 = _batch_nll(family, Y, eta0, ra, ba)
        scale = np.ones(Ja)
        for _ in range(MAX_HALVINGS + 1):
            cand = ba - scale[:, None] * step
            eta_c = C @ cand[:, :m].T + Xa * cand[:, m]
            nll_c = _batch_nll(family, Y, eta_c, ra, cand)
            bad = nll_c > nll0 + 1e-14
            if not np.any(bad):
                break
            scale[bad] *= 0.5
        else:
            stuck[a[bad]] = True
            cand[bad] = ba[bad]
        beta[a] = cand

        diverged = (np.max(np.abs(cand), axis=1) > DIVERGENCE_BOUND
                    ) & ~stabilized[a]
        if np.any(diverged):
            d = a[diverged]
            stabilized[d] = True
            ridge[d] = RIDGE_LAMBDA
            beta[d] = 0.0
            beta[d, 0] = _initial_beta(family, Y, 1)[0]

        active = np.flatnonzero(~converged & ~stuck)

    return BatchFit(beta=beta, converged=converged, stabilized=stabilized,
                    iterations=it)
