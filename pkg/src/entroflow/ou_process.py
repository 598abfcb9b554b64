"""Exact Gaussian analytics for ``dx = a x dt + sigma dw`` (no delay)."""

import enum
import math
from dataclasses import dataclass

import numpy as np

from .curves import EntropyCurve
from .errors import DomainError, NoStationaryDensity
from .gaussian_entropy import Gaussian1D, conditional_entropy, gibbs_entropy

SERIES_SWITCH = 1e-5


@dataclass(frozen=True)
class OUParams:
    a: float
    sigma: float

    def __post_init__(self):
        a, s = float(self.a), float(self.sigma)
        if not math.isfinite(a):
            raise DomainError("a must be finite")
        if not (math.isfinite(s) and s > 0):
            raise DomainError(f"sigma must be positive, got {self.sigma!r}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "sigma", s)


class Trend(enum.Enum):
    INCREASING = "Increasing"
    CONSTANT = "Constant"
    DECREASING = "Decreasing"


def _growth(a, t):
    # int_0^t exp(2 a r) dr, with a Taylor branch where expm1(x)/x loses digits
    x = 2.0 * a * t
    small = np.abs(x) < SERIES_SWITCH
    safe = np.where(small, 1.0, x)
    return np.where(small, t * (1.0 + x / 2.0 + x * x / 6.0), t * np.expm1(safe) / safe)


def ou_variance(p, t):
    """``sigma^2 int_0^t e^{2ar} dr``; scalar in, scalar out."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise DomainError("t must be non-negative")
    v = p.sigma ** 2 * _growth(p.a, t_arr)
    return float(v) if v.ndim == 0 else v


def ou_transition(p, x0, t):
    if not t > 0:
        raise DomainError("transition density needs t > 0 (t = 0 is a point mass)")
    return Gaussian1D(math.exp(p.a * t) * x0, ou_variance(p, t))


def stationary_variance(p):
    if p.a >= 0:
        raise NoStationaryDensity(f"no stationary density for a = {p.a} >= 0")
    return -p.sigma ** 2 / (2.0 * p.a)


def ou_stationary(p):
    return Gaussian1D(0.0, stationary_variance(p))


def ou_entropy_curve(p, init, grid):
    """Law of x(t) from a Gaussian initial law, with ``H_G`` and ``H_c``.

    The variance is written as ``s*^2 + (s0^2 - s*^2) e^{2at}`` so a
    stationary start stays exactly stationary.
    """
    fstar = ou_stationary(p)
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise DomainError("grid must be a non-empty 1-D array")
    if grid[0] != 0.0 or np.any(np.diff(grid) <= 0):
        raise DomainError("grid must start at 0 and be strictly increasing")
    decay = np.exp(p.a * grid)
    mean = decay * init.mean
    var = fstar.variance + (init.variance - fstar.variance) * decay * decay
    laws = [Gaussian1D(m, v) for m, v in zip(mean, var)]
    h_g = [gibbs_entropy(g) for g in laws]
    h_c = [conditional_entropy(g, fstar) for g in laws]
    return EntropyCurve(grid, mean, var, h_g, h_c)


def ou_gibbs_trend(p, init_variance):
    """Sign of ``dH_G/dt`` for a centred Gaussian start: fixed for all t."""
    if not init_variance > 0:
        raise DomainError("init_variance must be positive")
    star = stationary_variance(p)
    if abs(init_variance - star) <= 1e-12 * star:
        return Trend.CONSTANT
    return Trend.INCREASING if init_variance < star else Trend.DECREASING
