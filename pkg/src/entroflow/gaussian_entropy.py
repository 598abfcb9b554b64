"""Closed-form entropies of scalar Gaussian densities.

All logarithms are natural. ``H_c(f|g) = -int f ln(f/g)`` is the negative
Kullback-Leibler divergence, so it is never positive.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import DomainError
from .quadrature import adaptive_gl

MIN_VARIANCE = 1e-300
_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class Gaussian1D:
    mean: float
    variance: float

    def __post_init__(self):
        m, v = float(self.mean), float(self.variance)
        if not math.isfinite(m):
            raise DomainError(f"mean must be finite, got {self.mean!r}")
        if not (math.isfinite(v) and v >= MIN_VARIANCE):
            raise DomainError(f"variance must be positive and finite, got {self.variance!r}")
        object.__setattr__(self, "mean", m)
        object.__setattr__(self, "variance", v)

    @property
    def std(self):
        return math.sqrt(self.variance)

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        return -0.5 * (_LOG_2PI + math.log(self.variance)) - (x - self.mean) ** 2 / (2.0 * self.variance)

    def pdf(self, x):
        return np.exp(self.logpdf(x))


@dataclass(frozen=True)
class GaussianMixture:
    """Finite mixture ``sum_i w_i g_i``; weights positive, summing to one."""

    components: tuple

    def __post_init__(self):
        comps = tuple((float(w), g) for w, g in self.components)
        if not comps:
            raise DomainError("mixture needs at least one component")
        for w, g in comps:
            if not (w > 0 and math.isfinite(w)):
                raise DomainError(f"mixture weight must be positive, got {w!r}")
            if not isinstance(g, Gaussian1D):
                raise DomainError("mixture components must be Gaussian1D")
        total = math.fsum(w for w, _ in comps)
        if abs(total - 1.0) > 1e-12:
            raise DomainError(f"mixture weights sum to {total!r}, not 1")
        object.__setattr__(self, "components", comps)

    @property
    def mean(self):
        return math.fsum(w * g.mean for w, g in self.components)

    @property
    def variance(self):
        m = self.mean
        return math.fsum(w * (g.variance + (g.mean - m) ** 2) for w, g in self.components)

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        logs = np.stack([math.log(w) + g.logpdf(x) for w, g in self.components])
        return logsumexp(logs, axis=0)


def _check(*gs):
    for g in gs:
        if not isinstance(g, Gaussian1D):
            raise DomainError(f"expected Gaussian1D, got {type(g).__name__}")


def gibbs_entropy(g):
    """Differential entropy ``1/2 + 1/2 ln(2 pi var)``; independent of the mean."""
    _check(g)
    return 0.5 + 0.5 * (_LOG_2PI + math.log(g.variance))


def conditional_entropy(f, g):
    """``H_c(f|g)`` for Gaussians ``f``, ``g``; zero iff ``f == g``."""
    _check(f, g)
    ratio = f.variance / g.variance
    return 0.5 * math.log(ratio) + 0.5 * (1.0 - ratio) - (f.mean - g.mean) ** 2 / (2.0 * g.variance)


def cross_log_expectation(f, g):
    """``int f ln g`` in closed form."""
    _check(f, g)
    return -0.5 * (_LOG_2PI + math.log(g.variance)) - (f.variance + (f.mean - g.mean) ** 2) / (2.0 * g.variance)


def entropy_bridge_residual(f, fstar):
    """``H_G(f) - [H_c(f|f*) - int f ln f*]``, which vanishes identically."""
    return gibbs_entropy(f) - (conditional_entropy(f, fstar) - cross_log_expectation(f, fstar))


def h_ne(f, fstar):
    """Non-equilibrium entropy candidate ``H_c(f|f*) + H_G(f*)``."""
    return conditional_entropy(f, fstar) + gibbs_entropy(fstar)


def mixture_conditional_entropy(mix, fstar, quad_tol=1e-10):
    """``H_c`` of a Gaussian mixture against ``fstar`` by adaptive quadrature.

    The integration window extends 10 standard deviations past the mixture
    (and past every component), where the neglected mass is below 1e-22.
    By Jensen the result dominates ``sum_i w_i H_c(g_i|fstar)``.
    """
    if not isinstance(mix, GaussianMixture):
        raise DomainError("mix must be a GaussianMixture")
    _check(fstar)
    if not quad_tol > 0:
        raise DomainError("quad_tol must be positive")
    m, s = mix.mean, math.sqrt(mix.variance)
    lo = min([m - 10 * s] + [g.mean - 10 * g.std for _, g in mix.components])
    hi = max([m + 10 * s] + [g.mean + 10 * g.std for _, g in mix.components])

    def integrand(x):
        lf = mix.logpdf(x)
        return -np.exp(lf) * (lf - fstar.logpdf(x))

    breaks = [g.mean for _, g in mix.components]
    value, _ = adaptive_gl(integrand, lo, hi, quad_tol, breaks=breaks)
    return value
