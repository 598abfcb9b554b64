"""Exact Gaussian laws of ``dx = (a x + b x(t - tau)) dt + sigma dw``.

With a deterministic history phi the state is ``x(t) = S_t phi(0) + y(t)``
where ``y(t) = sigma int_0^t X(t - q) dw(q)`` is centred Gaussian, so every
law here is determined by the fundamental solution X.
"""

import math
from dataclasses import dataclass

import numpy as np

from .curves import EntropyCurve
from .dde_kernel import (
    FundamentalSolution,
    Stability,
    cumulative_xx,
    hayes_report,
    integrate_xx,
    solution_map,
    solution_segment,
)
from .errors import DomainError, NoStationaryDensity
from .gaussian_entropy import Gaussian1D, conditional_entropy, gibbs_entropy
from .quadrature import piecewise_gl

CRITICAL_BAND = 1e-10


def _fs(p, horizon, F=None):
    if F is not None and F.params == p and F.horizon >= horizon:
        return F
    return FundamentalSolution(p, max(horizon, p.tau))


def _need_noise(p):
    if not p.sigma > 0:
        raise DomainError("this quantity needs sigma > 0")


def sdde_variance(p, t, F=None):
    """``upsilon(t) = sigma^2 int_0^t X(q)^2 dq``."""
    _need_noise(p)
    if t < 0:
        raise DomainError("t must be non-negative")
    return p.sigma ** 2 * integrate_xx(_fs(p, t, F), 0.0, t)


def variance_rate(p, t, F=None):
    """``d upsilon / dt = sigma^2 X(t)^2`` (exact, no differencing)."""
    return p.sigma ** 2 * _fs(p, t, F)(t) ** 2


def covariance(p, t, s1, s2, F=None):
    """``r_t(s1, s2) = cov(x(t + s1), x(t + s2))`` for s1, s2 in [-tau, 0]."""
    for s in (s1, s2):
        if not -p.tau <= s <= 0:
            raise DomainError("s1, s2 must lie in [-tau, 0]")
    lo = t + min(s1, s2)
    if lo <= 0:
        return 0.0
    lag = abs(s2 - s1)
    return p.sigma ** 2 * integrate_xx(_fs(p, lo + lag, F), 0.0, lo, lag)


@dataclass(frozen=True)
class PairLaw:
    """Joint Gaussian law of ``(x(t), x(t - tau))``."""

    t: float
    mean: tuple
    cov: np.ndarray
    degenerate: bool

    @property
    def det(self):
        c = self.cov
        return 0.0 if self.degenerate else c[0, 0] * c[1, 1] - c[0, 1] * c[1, 0]

    def conditional(self, x):
        """Mean and variance of ``x(t - tau)`` given ``x(t) = x``."""
        v, r, w = self.cov[0, 0], self.cov[0, 1], self.cov[1, 1]
        if not v > 0:
            raise DomainError("x(t) has zero variance; conditioning undefined")
        return self.mean[1] + r / v * (x - self.mean[0]), w - r * r / v


def pair_law(p, init, t, F=None):
    if t < 0:
        raise DomainError("t must be non-negative")
    F = _fs(p, t, F)
    m0 = solution_map(p, init, t, F)
    m1 = solution_segment(p, init, t, -p.tau, F)
    v = covariance(p, t, 0.0, 0.0, F) if p.sigma > 0 else 0.0
    if t > p.tau and p.sigma > 0:
        r = covariance(p, t, -p.tau, 0.0, F)
        w = covariance(p, t, -p.tau, -p.tau, F)
    else:
        r = w = 0.0
    cov = np.array([[v, r], [r, w]])
    cov.setflags(write=False)
    return PairLaw(float(t), (m0, m1), cov, degenerate=not (t > p.tau and p.sigma > 0))


def conditional_mean(p, init, x, t, F=None):
    """``m_|(x, t) = S_t phi(-tau) + r_t(-tau, 0) / upsilon(t) (x - S_t phi(0))``."""
    if not t > 0:
        raise DomainError("conditional mean needs t > 0")
    _need_noise(p)
    return pair_law(p, init, t, F).conditional(x)[0]


# --- stationary law --------------------------------------------------------


@dataclass(frozen=True)
class StationaryLaw:
    """Stationary variance and autocovariance on ``[0, tau]``."""

    K0: float
    K_tau: float
    l: float
    regime: str
    tau: float
    sigma: float

    def g(self, t):
        t = np.asarray(t, dtype=float)
        if self.regime == "hyperbolic":
            return np.cosh(self.l * t), np.sinh(self.l * t) / self.l
        if self.regime == "trigonometric":
            return np.cos(self.l * t), np.sin(self.l * t) / self.l
        return np.ones_like(t), t

    def K(self, t):
        t_arr = np.asarray(t, dtype=float)
        if np.any(t_arr < 0) or np.any(t_arr > self.tau * (1 + 1e-12)):
            raise DomainError("closed-form autocovariance is only valid on [0, tau]")
        g1, g2 = self.g(t_arr)
        out = self.K0 * g1 - 0.5 * self.sigma ** 2 * g2
        return float(out) if out.ndim == 0 else out

    @property
    def density(self):
        return Gaussian1D(0.0, self.K0)

    def ibv_residual(self, p):
        """``2 a K(0) + 2 b K(tau) + sigma^2``; zero for a true stationary law."""
        return 2 * p.a * self.K0 + 2 * p.b * self.K_tau + p.sigma ** 2


def _require_stable(p):
    rep = hayes_report(p)
    if rep.stability is not Stability.STABLE:
        raise NoStationaryDensity(
            f"no stationary solution: parameters are {rep.stability.value} "
            f"(1-a*tau={rep.c1:.6g}, -(a+b)*tau={rep.c2:.6g}, third={rep.c3:.6g})")
    return rep


def stationary_law(p):
    _require_stable(p)
    _need_noise(p)
    d = p.a * p.a - p.b * p.b
    if abs(d) < CRITICAL_BAND:
        regime, l = "critical", 0.0
    elif d > 0:
        regime, l = "hyperbolic", math.sqrt(d)
    else:
        regime, l = "trigonometric", math.sqrt(-d)
    half = 0.5 * p.sigma ** 2
    law = StationaryLaw(1.0, 0.0, l, regime, p.tau, p.sigma)
    g1, g2 = (float(v) for v in law.g(p.tau))
    k0 = half * (p.b * g2 - 1.0) / (p.b * g1 + p.a)
    k_tau = k0 * g1 - half * g2
    return StationaryLaw(k0, k_tau, l, regime, p.tau, p.sigma)


# --- entropy curves --------------------------------------------------------


def _check_grid(grid, allow_zero=False):
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise DomainError("grid must be a non-empty 1-D array")
    if np.any(np.diff(grid) <= 0):
        raise DomainError("grid must be strictly increasing")
    if grid[0] < 0 or (grid[0] == 0 and not allow_zero):
        raise DomainError("grid must be positive (the law at t = 0 is a point mass)")
    return grid


def entropy_curve_point(p, phi, grid):
    """Entropies of x(t) started from a deterministic history ``phi``."""
    grid = _check_grid(grid)
    _require_stable(p)
    star = stationary_law(p).density
    F = _fs(p, grid[-1])
    var = p.sigma ** 2 * cumulative_xx(F, grid)
    mean = np.array([solution_map(p, phi, t, F) for t in grid])
    laws = [Gaussian1D(m, v) for m, v in zip(mean, var)]
    return EntropyCurve(grid, mean, var,
                        [gibbs_entropy(g) for g in laws],
                        [conditional_entropy(g, star) for g in laws])


def history_variance(p, sigma_bar, t, F=None):
    """Variance of ``S_t xi(0)`` for the Brownian history ``xi = sigma_bar W(. + tau)``.

    Each history ``1_[r,0]`` evolves to ``X(t - r) - a int_t^{t-r} X``, so
    the variance is ``sigma_bar^2 int_0^tau [X(t+v) - a int_t^{t+v} X]^2 dv``;
    for ``a = 0`` this is ``sigma_bar^2 int_t^{t+tau} X^2``.
    """
    F = _fs(p, t + p.tau, F)
    if p.a == 0:
        return sigma_bar ** 2 * integrate_xx(F, t, t + p.tau)
    base = F.antiderivative(t)

    def integrand(v):
        return (F(t + v) - p.a * (F.antiderivative(t + v) - base)) ** 2

    breaks = F.breakpoints(t, t + p.tau, 0.0)
    breaks = [q - t for q in breaks]
    return sigma_bar ** 2 * piecewise_gl(integrand, 0.0, p.tau, breaks, F.max_piece)


def brownian_state_variance(p, sigma_bar, grid, F=None):
    """Variance of x(t) on a grid for the Brownian history plus noise."""
    grid = _check_grid(grid, allow_zero=True)
    F = _fs(p, grid[-1] + p.tau, F)
    ups = p.sigma ** 2 * cumulative_xx(F, grid) if p.sigma > 0 else np.zeros_like(grid)
    if p.a == 0 and p.sigma > 0:
        ups_ahead = p.sigma ** 2 * cumulative_xx(F, grid + p.tau)
        k = sigma_bar ** 2 / p.sigma ** 2
        return k * ups_ahead + (1.0 - k) * ups
    hist = np.array([history_variance(p, sigma_bar, t, F) for t in grid])
    return hist + ups


def entropy_curve_brownian(p, sigma_bar, grid):
    """Entropies of x(t) for a Brownian initial history (centred Gaussian law).

    ``H_c`` is against the stationary law when one exists. At marginal
    parameters without noise the reference is the unit Gaussian, matching
    the persistent oscillation of ``x' = b x(t - tau)`` on the boundary.
    """
    if not sigma_bar > 0:
        raise DomainError("sigma_bar must be positive")
    grid = _check_grid(grid, allow_zero=True)
    stab = hayes_report(p).stability
    if stab is Stability.UNSTABLE:
        raise NoStationaryDensity("parameters are Unstable; the law of x(t) does not settle")
    var = brownian_state_variance(p, sigma_bar, grid)
    laws = [Gaussian1D(0.0, v) for v in var]
    h_g = [gibbs_entropy(g) for g in laws]
    star = None
    if stab is Stability.STABLE and p.sigma > 0:
        star = stationary_law(p).density
    elif stab is Stability.MARGINAL and p.sigma == 0:
        star = Gaussian1D(0.0, 1.0)
    h_c = None if star is None else [conditional_entropy(g, star) for g in laws]
    return EntropyCurve(grid, np.zeros_like(grid), var, h_g, h_c)


def entropy_lower_bound(p, mu0, t):
    """Jensen lower bound on ``H_c`` for a finite mixture of deterministic histories."""
    if not mu0:
        raise DomainError("mu0 must contain at least one history")
    weights = [float(w) for w, _ in mu0]
    if any(w <= 0 for w in weights) or abs(math.fsum(weights) - 1.0) > 1e-12:
        raise DomainError("weights must be positive and sum to 1")
    if not t > 0:
        raise DomainError("t must be positive")
    k0 = stationary_law(p).K0
    F = _fs(p, t)
    ups = sdde_variance(p, t, F)
    ratio = ups / k0
    second = math.fsum(w * solution_map(p, phi, t, F) ** 2 for w, phi in mu0)
    return 0.5 * math.log(ratio) + 0.5 * (1.0 - ratio) - second / (2.0 * k0)


def fpe_residual(p, phi, t, h):
    """``d upsilon/dt - (2 a upsilon + 2 b r_t(-tau, 0) + sigma^2)`` by central differences.

    Holds for t > tau, where the pair law has a density. ``phi`` does not
    enter the variance and is accepted for interface symmetry.
    """
    _need_noise(p)
    if h < 1e-8:
        raise DomainError(f"step h = {h} below 1e-8; roundoff would dominate")
    if not t - h > p.tau:
        raise DomainError("need t - h > tau")
    F = _fs(p, t + h)
    s2 = p.sigma ** 2
    # upsilon(t+h) - upsilon(t-h), integrated directly to avoid cancellation
    d_ups = s2 * integrate_xx(F, t - h, t + h) / (2.0 * h)
    ups = s2 * integrate_xx(F, 0.0, t)
    r = s2 * integrate_xx(F, 0.0, t - p.tau, p.tau)
    return d_ups - (2 * p.a * ups + 2 * p.b * r + s2)
