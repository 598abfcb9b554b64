"""Deterministic machinery for ``x'(t) = a x(t) + b x(t - tau)``.

The fundamental solution X (X = 0 on [-tau, 0), X(0) = 1) is stored by its
values at the nodes ``j * tau``. On ``[k tau, (k+1) tau)`` it is

    X(k tau + u) = e^{a u} * sum_m X((k - m) tau) (b u)^m / m!,

which is the method-of-steps recursion written in closed form and is
algebraically the same as the classical alternating series
``sum_k e^{a(t - k tau)} b^k (t - k tau)^k / k!``. Unlike that series it
does not cancel catastrophically when ``|b| t`` is large.
"""

import enum
import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import _kernels
from .errors import DomainError
from .quadrature import gauss_legendre, piecewise_gl, piecewise_nodes

MAX_INTERVALS = 10**6
MARGINAL_TOL = 1e-9


@dataclass(frozen=True)
class DelayParams:
    a: float
    b: float
    tau: float
    sigma: float = 0.0

    def __post_init__(self):
        vals = [float(getattr(self, k)) for k in ("a", "b", "tau", "sigma")]
        if not all(math.isfinite(v) for v in vals):
            raise DomainError("delay parameters must be finite")
        a, b, tau, sigma = vals
        if not tau > 0:
            raise DomainError(f"tau must be positive, got {tau!r}")
        if sigma < 0:
            raise DomainError(f"sigma must be non-negative, got {sigma!r}")
        for k, v in zip(("a", "b", "tau", "sigma"), vals):
            object.__setattr__(self, k, v)


# --- initial histories -----------------------------------------------------


@dataclass(frozen=True)
class PointHistory:
    """Constant history ``phi == c`` on ``[-tau, 0]``."""

    c: float

    def __call__(self, s):
        return np.full_like(np.asarray(s, dtype=float), float(self.c))

    def knots(self):
        return ()


@dataclass(frozen=True)
class TabulatedHistory:
    """Piecewise-linear history through ``(knots[i], values[i])``."""

    knots: tuple
    values: tuple

    def __post_init__(self):
        k = np.asarray(self.knots, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if k.ndim != 1 or k.shape != v.shape or k.size < 2:
            raise DomainError("history needs matching 1-D knots/values with at least 2 points")
        if np.any(np.diff(k) <= 0):
            raise DomainError("history knots must be strictly increasing")
        if not (np.all(np.isfinite(k)) and np.all(np.isfinite(v))):
            raise DomainError("history knots/values must be finite")
        object.__setattr__(self, "knots", tuple(k.tolist()))
        object.__setattr__(self, "values", tuple(v.tolist()))

    def check_span(self, tau):
        lo, hi = self.knots[0], self.knots[-1]
        if abs(lo + tau) > 1e-12 * max(1.0, tau) or abs(hi) > 1e-12 * max(1.0, tau):
            raise DomainError(f"history knots must span exactly [-tau, 0] = [{-tau}, 0], got [{lo}, {hi}]")

    def __call__(self, s):
        return np.interp(s, self.knots, self.values)


@dataclass(frozen=True)
class BrownianHistory:
    """Random history ``xi(s) = sigma_bar W(s + tau)``, W a standard Wiener process."""

    sigma_bar: float

    def __post_init__(self):
        sb = float(self.sigma_bar)
        if not (math.isfinite(sb) and sb > 0):
            raise DomainError(f"sigma_bar must be positive, got {self.sigma_bar!r}")
        object.__setattr__(self, "sigma_bar", sb)


def _deterministic(init, p):
    if isinstance(init, BrownianHistory):
        raise DomainError("Brownian history is random; use the sdde_gaussian routines")
    if isinstance(init, TabulatedHistory):
        init.check_span(p.tau)
    elif not isinstance(init, PointHistory):
        raise DomainError(f"unsupported initial condition {type(init).__name__}")
    return init


# --- fundamental solution --------------------------------------------------


def _max_piece(p, factor=1.0):
    rate = factor * (2.0 * abs(p.a) + abs(p.b))
    return p.tau if rate == 0 else min(p.tau, 4.0 / rate)


class FundamentalSolution:
    """Evaluable fundamental solution on ``[-tau, horizon]``; immutable."""

    def __init__(self, params, horizon):
        if not horizon > 0:
            raise DomainError("horizon must be positive")
        n_int = horizon / params.tau
        if n_int > MAX_INTERVALS:
            raise DomainError(f"horizon/tau = {n_int:.3g} exceeds the {MAX_INTERVALS} interval limit")
        self.params = params
        self.horizon = float(horizon)
        n_nodes = int(math.floor(n_int)) + 2
        self.m_max = min(n_nodes, int(math.ceil(2 * math.e * abs(params.b) * params.tau)) + 60)
        nodes = _kernels.fundamental_nodes(params.a, params.b, params.tau, n_nodes, self.m_max)
        nodes.setflags(write=False)
        self.nodes = nodes
        self._cum = None

    def __repr__(self):
        return f"FundamentalSolution({self.params!r}, horizon={self.horizon!r})"

    def _check(self, t):
        top = np.max(t, initial=-np.inf)
        if top > self.horizon * (1 + 1e-12) + 1e-300:
            raise DomainError(f"t = {top} beyond horizon {self.horizon}")

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        self._check(t_arr)
        p = self.params
        out = _kernels.fundamental_eval(t_arr, self.nodes, p.a, p.b, p.tau, self.m_max)
        return float(out) if out.ndim == 0 else out

    @property
    def max_piece(self):
        return _max_piece(self.params)

    def breakpoints(self, lo, hi, shift=0.0):
        """Points in (lo, hi) where ``X(q + shift)`` is not smooth."""
        tau = self.params.tau
        j0 = math.ceil((lo + shift) / tau)
        j1 = math.floor((hi + shift) / tau)
        return [j * tau - shift for j in range(max(j0, 0), j1 + 1)]

    def _n_sub(self):
        return max(1, math.ceil(self.params.tau / self.max_piece))

    def _cumulative(self):
        # int_0^{j tau} X for every node j inside the horizon
        if self._cum is None:
            tau = self.params.tau
            top = min(self.nodes.shape[0] - 1, int(math.floor(self.horizon / tau)))
            n_sub = self._n_sub()
            edges = np.arange(top * n_sub + 1) * (tau / n_sub)
            nodes, weights = piecewise_nodes(edges)
            pieces = (self(nodes) * weights).sum(axis=1).reshape(top, n_sub).sum(axis=1)
            self._cum = np.concatenate([[0.0], np.cumsum(pieces)])
        return self._cum

    def antiderivative(self, s):
        """``int_0^s X(q) dq`` for ``0 <= s <= horizon`` (vectorised)."""
        s_arr = np.asarray(s, dtype=float)
        if np.any(s_arr < 0):
            raise DomainError("antiderivative needs s >= 0")
        self._check(s_arr)
        cum = self._cumulative()
        tau = self.params.tau
        flat = s_arr.reshape(-1)
        k = np.minimum(np.floor(flat / tau).astype(int), cum.shape[0] - 1)
        k = np.where(k * tau > flat, k - 1, k)
        left = k * tau
        x, w = gauss_legendre()
        n_sub = self._n_sub()
        step = (flat - left) / n_sub
        total = cum[k].copy()
        for i in range(n_sub):
            lo = left + i * step
            nodes = lo[:, None] + 0.5 * step[:, None] * (x + 1.0)
            total += 0.5 * step * (self(nodes) @ w)
        out = total.reshape(s_arr.shape)
        return float(out) if out.ndim == 0 else out

    def integral(self, lo, hi):
        if hi < lo:
            raise DomainError("integral needs lo <= hi")
        lo_c, hi_c = max(lo, 0.0), max(hi, 0.0)
        return piecewise_gl(self, lo_c, hi_c, self.breakpoints(lo_c, hi_c), self.max_piece)


def fundamental_solution(p, horizon):
    return FundamentalSolution(p, horizon)


def direct_series(p, t):
    """Literal alternating-series value of X(t); reference only (cancels for large |b| t)."""
    if t < 0:
        return 0.0
    k_max = _kernels._interval_index(t, p.tau)
    terms = []
    for k in range(k_max + 1):
        s = t - k * p.tau
        terms.append(math.exp(p.a * s) * (p.b * s) ** k / math.factorial(k))
    return math.fsum(terms)


def _ensure(p, F, horizon):
    if F is None or F.params != p or F.horizon < horizon:
        F = FundamentalSolution(p, max(horizon, p.tau))
    return F


def integrate_xx(F, t_lo, t_hi, lag=0.0):
    """``int_{t_lo}^{t_hi} X(q) X(q + lag) dq`` split at every kink."""
    if lag < 0:
        raise DomainError("lag must be non-negative")
    if not 0 <= t_lo <= t_hi:
        raise DomainError("need 0 <= t_lo <= t_hi")
    if t_hi + lag > F.horizon * (1 + 1e-12):
        raise DomainError(f"t_hi + lag = {t_hi + lag} beyond horizon {F.horizon}")
    if t_hi == t_lo:
        return 0.0
    breaks = F.breakpoints(t_lo, t_hi) + F.breakpoints(t_lo, t_hi, shift=lag)
    return piecewise_gl(lambda q: F(q) * F(q + lag), t_lo, t_hi, breaks, _max_piece(F.params, 2.0))


def cumulative_xx(F, grid, lag=0.0):
    """``int_0^t X(q) X(q + lag) dq`` at every point of a sorted grid."""
    grid = np.asarray(grid, dtype=float)
    if grid.size and (grid[0] < 0 or np.any(np.diff(grid) < 0)):
        raise DomainError("grid must be sorted and non-negative")
    pts = np.concatenate([[0.0], grid])
    pieces = [integrate_xx(F, lo, hi, lag) for lo, hi in zip(pts[:-1], pts[1:])]
    return np.cumsum(pieces)


def solution_map(p, init, t, F=None):
    """``S_t phi(0) = X(t) phi(0) + b int_{-tau}^0 X(t - r - tau) phi(r) dr``."""
    init = _deterministic(init, p)
    if t < 0:
        raise DomainError("t must be non-negative")
    phi0 = float(init(0.0))
    if t == 0:
        return phi0
    F = _ensure(p, F, t)
    tau = p.tau
    if isinstance(init, PointHistory):
        return phi0 * (F(t) + p.b * F.integral(max(0.0, t - tau), t))
    hi = min(0.0, t - tau)
    breaks = list(init.knots) + [t - (j + 1) * tau for j in range(int(t / tau) + 2)]
    conv = piecewise_gl(lambda r: F(t - r - tau) * init(r), -tau, hi, breaks, F.max_piece)
    return phi0 * F(t) + p.b * conv


def solution_segment(p, init, t, s, F=None):
    """``S_t phi(s) = x(t + s)`` for ``s`` in ``[-tau, 0]``."""
    if not -p.tau <= s <= 0:
        raise DomainError("s must lie in [-tau, 0]")
    if t + s < 0:
        return float(_deterministic(init, p)(t + s))
    return solution_map(p, init, t + s, F)


# --- stability -------------------------------------------------------------


class Stability(enum.Enum):
    STABLE = "Stable"
    UNSTABLE = "Unstable"
    MARGINAL = "Marginal"


@dataclass(frozen=True)
class HayesReport:
    """Hayes conditions written so each is satisfied when positive.

    ``c1 = 1 - a tau``, ``c2 = -(b tau + a tau)``,
    ``c3 = b tau + a tau cos(kappa) + kappa sin(kappa)``.
    """

    stability: Stability
    kappa: float
    c1: float
    c2: float
    c3: float


def hayes_kappa(a_tau):
    """Root of ``kappa = a tau tan(kappa)`` in (0, pi); pi/2 when a tau = 0."""
    if a_tau == 0:
        return math.pi / 2
    if a_tau >= 1:
        return 0.0  # the root has collapsed onto 0
    f = lambda k: a_tau * np.sinc(k / math.pi) - math.cos(k)  # noqa: E731
    lo, hi = (0.0, math.pi / 2) if a_tau > 0 else (math.pi / 2, math.pi)
    f_lo, f_hi = f(lo), f(hi)
    if f_lo * f_hi > 0:
        # |a tau| tiny: the root sits within rounding of pi/2
        return lo if abs(f_lo) < abs(f_hi) else hi
    return brentq(f, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps)


def _classify(conds, tol):
    if any(c < -tol for c in conds):
        return Stability.UNSTABLE
    if any(abs(c) <= tol for c in conds):
        return Stability.MARGINAL
    return Stability.STABLE


def hayes_report(p, tol=MARGINAL_TOL, resolution=None):
    """Classify ``(a, b, tau)`` against the Hayes stability wedge.

    ``resolution`` optionally gives ``(da, db, dtau)`` input uncertainties;
    if the classification differs anywhere on that box the result is
    Marginal.
    """
    a_tau, b_tau = p.a * p.tau, p.b * p.tau
    kappa = hayes_kappa(a_tau)
    c1 = 1.0 - a_tau
    c2 = -(b_tau + a_tau)
    c3 = b_tau + a_tau * math.cos(kappa) + kappa * math.sin(kappa)
    stability = _classify((c1, c2, c3), tol)
    if resolution is not None and any(r > 0 for r in resolution):
        seen = {stability}
        for signs in itertools.product((-1, 1), repeat=3):
            tau = p.tau + signs[2] * resolution[2]
            if tau <= 0:
                continue
            corner = DelayParams(p.a + signs[0] * resolution[0], p.b + signs[1] * resolution[1], tau)
            seen.add(hayes_report(corner, tol).stability)
        if len(seen) > 1:
            stability = Stability.MARGINAL
    return HayesReport(stability, kappa, c1, c2, c3)


def hayes_stable(p, tol=MARGINAL_TOL, resolution=None):
    return hayes_report(p, tol, resolution).stability
