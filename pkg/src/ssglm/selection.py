"""Variable selection on the screening half-sample.

Two selectors are provided: marginal screening (rank predictors by the
absolute coefficient of single-variable GLM fits) and an l1-penalized
GLM solved by coordinate descent along a warm-started lambda path, tuned
by K-fold cross-validated deviance. Both return a SelectionResult and
are deterministic given the data and an RNG.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from numba import njit

from ._batched import fit_append_batch
from .families import get_family
from .glm import _initial_beta

KKT_RTOL = 1e-4


@dataclass
class SelectionResult:
    """Sorted selected indices plus the ranking or tuning info behind them."""

    selected: np.ndarray
    scores: np.ndarray = None
    lambda_: float = None

    def __post_init__(self):
        self.selected = np.asarray(self.selected, dtype=np.int64)
        if self.selected.size != np.unique(self.selected).size:
            raise ValueError("selected indices must be unique")
        self.selected = np.sort(self.selected)


def default_sis_cap(n):
    """Standard screening cap floor(n / log n)."""
    return max(1, int(n // np.log(n)))


def sis_select(Y, X, family, d=None):
    """Rank predictors by |marginal GLM coefficient|; keep the top d.

    Ties break toward the smaller index. Columns whose marginal fit does
    not produce a finite coefficient are ranked last.
    """
    Y = np.asarray(Y, dtype=float)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n, p = X.shape
    if d is None:
        d = default_sis_cap(n)
    if d < 1:
        raise ValueError("screening cap d must be >= 1")
    fit = fit_append_batch(Y, None, X, family)
    scores = np.abs(fit.beta[:, 1])
    bad = ~np.isfinite(scores)
    if np.any(bad):
        warnings.warn(
            f"{int(bad.sum())} columns had non-finite marginal fits; "
            "ranked last")
        scores = scores.copy()
        scores[bad] = -np.inf
    order = np.argsort(-scores, kind="stable")
    selected = order[: min(d, p)]
    return SelectionResult(selected=selected, scores=scores)


def iterated_sis_select(Y, X, family, d=None, iterations=2):
    """Marginal screening with conditional re-ranking passes.

    The first pass ranks predictors marginally. Each later pass refits
    every remaining predictor appended to the variables kept so far and
    ranks by the absolute appended coefficient, so strong effects already
    captured no longer mask moderate ones. Roughly d/iterations
    predictors are kept per pass, d in total. With iterations=1 this is
    plain marginal screening.
    """
    Y = np.asarray(Y, dtype=float)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n, p = X.shape
    if d is None:
        d = default_sis_cap(n)
    if d < 1:
        raise ValueError("screening cap d must be >= 1")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    d = min(d, p)
    if iterations == 1:
        return sis_select(Y, X, family, d=d)

    from .glm import fit_mle

    kept = np.empty(0, dtype=np.int64)
    per_pass = max(1, d // iterations)
    # rank[j]: overall priority order; kept variables occupy the front
    rank = np.empty(p, dtype=np.int64)
    for it in range(iterations):
        rest = np.setdiff1d(np.arange(p), kept)
        if rest.size == 0:
            break
        if kept.size:
            base = fit_mle(Y, X[:, kept], family)
            fit = fit_append_batch(Y, X[:, kept], X[:, rest], family,
                                   init_base=base.beta)
            util = np.abs(fit.beta[:, -1])
        else:
            fit = fit_append_batch(Y, None, X[:, rest], family)
            util = np.abs(fit.beta[:, 1])
        bad = ~np.isfinite(util)
        if np.any(bad):
            warnings.warn(
                f"{int(bad.sum())} columns had non-finite conditional fits; "
                "ranked last")
            util = util.copy()
            util[bad] = -np.inf
        order = rest[np.argsort(-util, kind="stable")]
        take = d - kept.size if it == iterations - 1 else per_pass
        take = min(take, order.size)
        rank[kept.size:kept.size + order.size] = order
        kept = np.concatenate([kept, order[:take]])
    scores = np.empty(p)
    scores[rank] = np.arange(p, 0, -1, dtype=float)
    return SelectionResult(selected=kept, scores=scores)


# ---------------------------------------------------------------------------
# l1-penalized GLM by coordinate descent
# ---------------------------------------------------------------------------

@njit(cache=True)
def _cd_weighted(X, w, z, beta, b0, lam, tol, max_sweeps):
    """Coordinate descent for the penalized weighted least squares problem

        (1/2n) sum_i w_i (z_i - b0 - x_i beta)^2 + lam * ||beta||_1

    Updates beta and b0 in place; returns the number of sweeps used.
    One full sweep over all coordinates alternates with sweeps over the
    current active set until no coordinate moves more than tol.
    """
    n, p = X.shape
    r = z - b0 - X @ beta
    wsum = w.sum()
    sj = np.empty(p)
    for j in range(p):
        acc = 0.0
        for i in range(n):
            acc += w[i] * X[i, j] * X[i, j]
        sj[j] = acc / n
    sweeps = 0
    while sweeps < max_sweeps:
        sweeps += 1
        max_delta = 0.0
        for j in range(p):
            if sj[j] <= 0.0:
                continue
            rho = 0.0
            for i in range(n):
                rho += w[i] * X[i, j] * r[i]
            rho = rho / n + sj[j] * beta[j]
            if rho > lam:
                new = (rho - lam) / sj[j]
            elif rho < -lam:
                new = (rho + lam) / sj[j]
            else:
                new = 0.0
            delta = new - beta[j]
            if delta != 0.0:
                for i in range(n):
                    r[i] -= delta * X[i, j]
                beta[j] = new
                if abs(delta) > max_delta:
                    max_delta = abs(delta)
        # intercept (unpenalized)
        num = 0.0
        for i in range(n):
            num += w[i] * r[i]
        shift = num / wsum
        if shift != 0.0:
            b0 += shift
            for i in range(n):
                r[i] -= shift
            if abs(shift) > max_delta:
                max_delta = abs(shift)
        if max_delta < tol:
            break
    return beta, b0, sweeps


def lambda_max(Y, X, family):
    """Smallest lambda with an empty active set (KKT at the null fit)."""
    family = get_family(family)
    Y = np.asarray(Y, dtype=float)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n = Y.shape[0]
    b0 = _initial_beta(family, Y, 1)[0]
    mu = family.mean(np.full(n, b0))
    return float(np.max(np.abs(X.T @ (mu - Y))) / n)


def default_lambda_grid(Y, X, family, n_lambda=100, ratio=1e-3):
    lmax = lambda_max(Y, X, family)
    if lmax <= 0:
        lmax = 1e-3
    return np.geomspace(lmax, ratio * lmax, n_lambda)


def lasso_path(Y, X, family, lambda_grid, outer_tol=1e-9, max_outer=100,
               cd_tol=1e-10, max_sweeps=2000):
    """Warm-started coordinate-descent path for the l1-penalized GLM.

    Minimizes ell(beta) + lam * ||beta[1:]||_1 (intercept unpenalized)
    at every lam in the strictly decreasing grid. Returns a list of
    (lam, active_indices, (b0, beta)) tuples, plus a per-lam converged
    flag on non-gaussian families.
    """
    family = get_family(family)
    Y = np.asarray(Y, dtype=float)
    X = np.ascontiguousarray(np.atleast_2d(np.asarray(X, dtype=float)))
    lambda_grid = np.asarray(lambda_grid, dtype=float)
    if np.any(np.diff(lambda_grid) >= 0) or np.any(lambda_grid <= 0):
        raise ValueError("lambda_grid must be strictly decreasing, positive")
    n, p = X.shape
    beta = np.zeros(p)
    b0 = float(_initial_beta(family, Y, 1)[0])
    gaussian = family.kind == "gaussian"
    path = []
    for lam in lambda_grid:
        converged = True
        if gaussian:
            w = np.ones(n)
            beta, b0, _ = _cd_weighted(X, w, Y.copy(), beta, b0, lam,
                                       cd_tol, max_sweeps)
        else:
            for _ in range(max_outer):
                eta = b0 + X @ beta
                mu = family.mean(eta)
                w = np.maximum(family.variance(eta), 1e-9)
                z = eta + (Y - mu) / w
                prev = beta.copy()
                prev_b0 = b0
                beta, b0, _ = _cd_weighted(X, w, z, beta, b0, lam,
                                           cd_tol, max_sweeps)
                if max(np.max(np.abs(beta - prev)),
                       abs(b0 - prev_b0)) < outer_tol:
                    break
            else:
                converged = False
        active = np.flatnonzero(beta)
        path.append({"lambda": float(lam), "active": active.copy(),
                     "b0": b0, "beta": beta.copy(), "converged": converged})
    return path


def _unit_deviance(family, Y, eta):
    """Per-observation deviance 2*(ll_sat - ll(eta))."""
    family = get_family(family)
    theta = np.asarray(eta, dtype=float)
    if family.kind == "gaussian":
        return (Y - theta) ** 2
    if family.kind == "binomial_logit":
        # saturated loglik is 0 for y in {0,1}
        return 2.0 * (family.cumulant(theta) - Y * theta)
    if family.kind == "poisson":
        sat = np.where(Y > 0, Y * np.log(np.maximum(Y, 1.0)) - Y, 0.0)
        return 2.0 * (family.cumulant(theta) - Y * theta + sat)
    raise ValueError(family.kind)


def cv_select(Y, X, family, folds=10, lambda_grid=None, rng=None, cap=None):
    """Pick lambda by K-fold cross-validated deviance; return its active set.

    The path is fit on the full data; folds only score candidate lambdas.
    An empty active set at the optimum is a valid result. If the active
    set exceeds `cap` (default rows/2), the cap largest-magnitude
    coefficients are kept.
    """
    Y = np.asarray(Y, dtype=float)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n = Y.shape[0]
    if folds < 2:
        raise ValueError("folds must be >= 2")
    if rng is None:
        rng = np.random.default_rng(0)
    if lambda_grid is None:
        lambda_grid = default_lambda_grid(Y, X, family)
    if cap is None:
        cap = max(1, n // 2)

    assignment = rng.permutation(n) % folds
    n_lam = len(lambda_grid)
    dev = np.zeros(n_lam)
    for k in range(folds):
        test = assignment == k
        train = ~test
        sub_path = lasso_path(Y[train], X[train], family, lambda_grid)
        for li, entry in enumerate(sub_path):
            eta = entry["b0"] + X[test] @ entry["beta"]
            dev[li] += np.sum(_unit_deviance(family, Y[test], eta))
    dev /= n

    best = int(np.argmin(dev))
    full_path = lasso_path(Y, X, family, lambda_grid)
    entry = full_path[best]
    active = entry["active"]
    if active.size > cap:
        keep = np.argsort(-np.abs(entry["beta"][active]), kind="stable")[:cap]
        active = active[keep]
    return SelectionResult(selected=active, scores=None,
                           lambda_=entry["lambda"])


# ---------------------------------------------------------------------------
# selector registry used by the smoothing driver and the CLI
# ---------------------------------------------------------------------------

def make_selector(name, **options):
    """Build a selector callable(Y, X, family, rng) -> SelectionResult."""
    if name == "sis":
        d = options.pop("d", None)
        iterations = options.pop("iterations", 1)
        if options:
            raise ValueError(f"unknown sis options: {sorted(options)}")

        def _sis(Y, X, family, rng):
            return iterated_sis_select(Y, X, family, d=d,
                                       iterations=iterations)

        return _sis
    if name in ("lasso-cv", "cv-lasso"):
        folds = options.pop("folds", 10)
        n_lambda = options.pop("n_lambda", 100)
        if options:
            raise ValueError(f"unknown lasso-cv options: {sorted(options)}")

        def _cv(Y, X, family, rng):
            grid = default_lambda_grid(Y, X, family, n_lambda=n_lambda)
            return cv_select(Y, X, family, folds=folds, lambda_grid=grid,
                             rng=rng)

        return _cv
    raise ValueError(f"unknown selector {name!r}; choices: sis, lasso-cv")
