"""Split-and-smooth estimation: per-split selection plus p+1 partial
regressions on the held-out half, averaged over B random splits."""

import warnings
from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed

from ._batched import fit_append_batch
from .families import get_family
from .glm import fit_mle
from .splitting import SplitPlan, TAG_CV, TAG_RETRY, make_splits, substream


@dataclass
class SplitEstimate:
    """One split's selected set and full length-(p+1) coefficient vector."""

    b: int
    selected: np.ndarray
    beta_tilde: np.ndarray      # (p+1,), intercept first
    valid: np.ndarray           # (p+1,) bool; False where the sub-fit failed
    stabilized_count: int

    @property
    def failed(self):
        return np.flatnonzero(~self.valid)


@dataclass
class SmoothedFit:
    """Smoothed coefficients with the per-split estimates behind them."""

    beta_hat: np.ndarray        # (p+1,)
    splits: list
    plan: SplitPlan
    selection_freq: np.ndarray  # (p,)
    valid: np.ndarray           # (B, p+1)
    labels: list = None

    @property
    def beta_matrix(self):
        return np.vstack([s.beta_tilde for s in self.splits])

    @property
    def effective_B(self):
        return self.valid.sum(axis=0)


def one_time_estimate(Y1, X1, S, family, score_tol=1e-8, max_iter=100):
    """Coefficients for all p predictors from one estimation half-sample.

    The intercept and every j in S come from the single fit on S; each
    j outside S gets the appended-column fit on S u {j}, warm-started at
    the base solution. Per-coordinate failures are recorded rather than
    aborting the remaining coordinates.
    """
    family = get_family(family)
    Y1 = np.asarray(Y1, dtype=float)
    X1 = np.atleast_2d(np.asarray(X1, dtype=float))
    n1, p = X1.shape
    S = np.sort(np.asarray(S, dtype=np.int64))
    if S.size + 2 > n1:
        raise ValueError(
            f"selected set of size {S.size} too large for n1={n1}")

    beta_tilde = np.full(p + 1, np.nan)
    valid = np.zeros(p + 1, dtype=bool)
    stabilized = 0

    try:
        base = fit_mle(Y1, X1[:, S], family, score_tol=score_tol,
                       max_iter=max_iter, subset=tuple(S))
    except np.linalg.LinAlgError:
        base = None
    if base is not None:
        beta_tilde[0] = base.beta[0]
        beta_tilde[S + 1] = base.beta[1:]
        valid[0] = base.converged
        valid[S + 1] = base.converged
        stabilized += int(base.stabilized) * (S.size + 1)

    others = np.setdiff1d(np.arange(p), S)
    if others.size:
        init = base.beta if base is not None else None
        batch = fit_append_batch(Y1, X1[:, S], X1[:, others], family,
                                 init_base=init, score_tol=score_tol,
                                 max_iter=max_iter)
        beta_tilde[others + 1] = batch.beta[:, -1]
        valid[others + 1] = batch.converged
        stabilized += int(batch.stabilized.sum())

    finite = np.isfinite(beta_tilde)
    valid &= finite
    return beta_tilde, valid, stabilized


def _run_split(b, Y, X, family, selector, plan_row, seed, max_select, p):
    d1 = np.flatnonzero(plan_row == 1)
    d2 = np.flatnonzero(plan_row == 0)
    Y2, X2 = Y[d2], X[d2]
    try:
        sel = selector(Y2, X2, family, substream(seed, b, TAG_CV))
    except Exception as first_err:
        try:
            sel = selector(Y2, X2, family, substream(seed, b, TAG_RETRY))
        except Exception:
            raise RuntimeError(
                f"selection failed twice on split {b}: {first_err}"
            ) from first_err
    S = sel.selected
    if S.size > max_select:
        # keep the highest-ranked indices so every partial fit stays
        # low-dimensional
        if sel.scores is not None:
            order = np.argsort(-sel.scores[S], kind="stable")
            S = np.sort(S[order[:max_select]])
        else:
            S = S[:max_select]
    beta_tilde, valid, stab = one_time_estimate(Y[d1], X[d1], S, family)
    return SplitEstimate(b=b, selected=np.sort(S), beta_tilde=beta_tilde,
                         valid=valid, stabilized_count=stab)


def ssglm_fit(dataset, family, selector, q=0.5, B=500, seed=0, n_jobs=1):
    """Run the full split-and-smooth estimator (Algorithm: B splits,
    select on D2, partial regressions on D1, average).

    `selector` is a callable (Y, X, family, rng) -> SelectionResult.
    Results are bitwise identical for any n_jobs: each split depends
    only on (data, seed, b) and the reduction runs in split order.
    """
    family = get_family(family)
    if not np.all(dataset.centered):
        dataset = dataset.center()
    family.validate_response(dataset.Y)
    Y, X = dataset.Y, dataset.X
    n, p = X.shape
    plan = make_splits(n, q, B, seed)
    max_select = max(1, plan.n1 // 2)
    if plan.n1 // 4 < 1:
        warnings.warn("estimation half-sample is very small")

    args = [(b, Y, X, family, selector, plan.assignments[b], seed,
             max_select, p) for b in range(B)]
    if n_jobs == 1:
        splits = [_run_split(*a) for a in args]
    else:
        splits = Parallel(n_jobs=n_jobs)(delayed(_run_split)(*a) for a in args)

    beta_mat = np.vstack([s.beta_tilde for s in splits])
    valid = np.vstack([s.valid for s in splits])
    counts = valid.sum(axis=0)
    if np.any(counts == 0):
        warnings.warn(
            f"{int((counts == 0).sum())} coordinates failed in every split")
    sums = np.where(valid, beta_mat, 0.0).sum(axis=0)
    beta_hat = np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)

    membership = np.zeros(p)
    for s in splits:
        membership[s.selected] += 1.0
    selection_freq = membership / B

    big = max((s.selected.size for s in splits), default=0)
    if big > plan.n1 // 4:
        warnings.warn(
            f"largest selected set ({big}) exceeds n1/4; asymptotic "
            "approximations may be poor")

    return SmoothedFit(beta_hat=beta_hat, splits=splits, plan=plan,
                       selection_freq=selection_freq, valid=valid,
                       labels=list(dataset.labels))
