"""Exponential-family definitions with canonical links.

Each family carries the cumulant A, its first derivative (the mean
function) and its second derivative (the variance function). Only the
three canonical-link members needed for the estimator are provided:
gaussian (identity link), binomial with logit link, and poisson with
log link.
"""

import numpy as np

# Natural parameters beyond this are clamped for the poisson cumulant so
# exp() stays finite; roughly log(realmax)/2.
_POISSON_THETA_MAX = 0.5 * np.log(np.finfo(np.float64).max)


class Family:
    """One exponential-family member under its canonical link.

    Subclasses implement the cumulant ``A``, the mean ``A'`` and the
    variance ``A''``; all three operate elementwise on arrays.
    """

    kind = None

    def cumulant(self, theta):
        raise NotImplementedError

    def mean(self, theta):
        raise NotImplementedError

    def variance(self, theta):
        raise NotImplementedError

    def link(self, mu):
        """Canonical link g(mu), used to initialize the intercept."""
        raise NotImplementedError

    def validate_response(self, y):
        """Raise ValueError if y is not a legal response for this family."""
        if not np.all(np.isfinite(y)):
            raise ValueError("response contains non-finite values")

    def __repr__(self):
        return f"Family({self.kind})"


class Gaussian(Family):
    kind = "gaussian"

    def cumulant(self, theta):
        return 0.5 * np.square(theta)

    def mean(self, theta):
        return np.asarray(theta, dtype=float)

    def variance(self, theta):
        return np.ones_like(np.asarray(theta, dtype=float))

    def link(self, mu):
        return mu


class BinomialLogit(Family):
    kind = "binomial_logit"

    def cumulant(self, theta):
        # log(1 + e^theta), stable for large |theta|
        theta = np.asarray(theta, dtype=float)
        return np.logaddexp(0.0, theta)

    def mean(self, theta):
        theta = np.asarray(theta, dtype=float)
        with np.errstate(over="ignore"):
            return 1.0 / (1.0 + np.exp(-theta))

    def variance(self, theta):
        mu = self.mean(theta)
        return mu * (1.0 - mu)

    def link(self, mu):
        mu = np.clip(mu, 1e-10, 1.0 - 1e-10)
        return np.log(mu / (1.0 - mu))

    def validate_response(self, y):
        super().validate_response(y)
        if not np.all(np.isin(y, (0.0, 1.0))):
            raise ValueError("binomial_logit response must be coded 0/1")


class Poisson(Family):
    kind = "poisson"

    def cumulant(self, theta):
        theta = np.asarray(theta, dtype=float)
        if np.any(theta > _POISSON_THETA_MAX):
            raise FloatingPointError(
                "poisson cumulant overflow: natural parameter exceeds "
                f"{_POISSON_THETA_MAX:.1f}"
            )
        return np.exp(theta)

    def mean(self, theta):
        return self.cumulant(theta)

    def variance(self, theta):
        return self.cumulant(theta)

    def link(self, mu):
        return np.log(np.maximum(mu, 1e-10))

    def validate_response(self, y):
        super().validate_response(y)
        if np.any(y < 0) or np.any(y != np.floor(y)):
            raise ValueError("poisson response must be nonnegative integers")


_FAMILIES = {
    "gaussian": Gaussian,
    "binomial_logit": BinomialLogit,
    "binomial": BinomialLogit,
    "poisson": Poisson,
}


def get_family(name):
    """Look up a family by name ('gaussian', 'binomial', 'poisson')."""
    if isinstance(name, Family):
        return name
    try:
        return _FAMILIES[name]()
    except KeyError:
        raise ValueError(f"unknown family {name!r}; choices: gaussian, "
                         "binomial_logit, poisson") from None


def family_eval(family, theta):
    """Evaluate (A(theta), A'(theta), A''(theta)) at a scalar or array theta."""
    family = get_family(family)
    theta = np.asarray(theta, dtype=float)
    if not np.all(np.isfinite(theta)):
        raise ValueError("theta must be finite")
    return family.cumulant(theta), family.mean(theta), family.variance(theta)
