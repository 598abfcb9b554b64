"""Seeded Monte Carlo ensembles for the linear SDE and SDDE.

Trajectory ``i`` draws all of its normals from a Philox stream keyed by
``(master_seed, i)``, and trajectories are processed in fixed-size blocks
written into a preallocated array, so results do not depend on how many
worker threads run the blocks.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from ._backend import resolve_threads
from .dde_kernel import BrownianHistory, DelayParams, PointHistory, TabulatedHistory
from .errors import DomainError, SimulationError
from .gaussian_entropy import Gaussian1D, conditional_entropy
from .ou_process import OUParams, ou_variance

BLOCK_SIZE = 256
BLOWUP_GUARD = 1e100
_MASK64 = (1 << 64) - 1


def _grid_index(t, dt, what):
    k = round(t / dt)
    if abs(k * dt - t) > 1e-9 * max(1.0, abs(t)):
        raise DomainError(f"{what} = {t} is not on the dt = {dt} grid")
    return k


@dataclass(frozen=True)
class SimConfig:
    """Ensemble specification.

    ``output_times`` default to 101 evenly spaced grid times on [0, t_max].
    ``n_bins`` (optional) adds a histogram per output time.
    """

    params: object
    init: object
    dt: float
    t_max: float
    n_traj: int
    master_seed: int
    output_times: tuple = None
    n_bins: int = None

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise DomainError("dt must be positive")
        if not self.t_max > 0:
            raise DomainError("t_max must be positive")
        if int(self.n_traj) != self.n_traj or self.n_traj < 2:
            raise DomainError("n_traj must be an integer >= 2")
        if int(self.master_seed) != self.master_seed:
            raise DomainError("master_seed must be an integer")
        n_steps = _grid_index(self.t_max, self.dt, "t_max")
        if isinstance(self.params, DelayParams):
            lag = _grid_index(self.params.tau, self.dt, "tau")
            if lag < 1:
                raise DomainError("tau must be at least one step")
            if not isinstance(self.init, (PointHistory, TabulatedHistory, BrownianHistory)):
                raise DomainError("SDDE runs need a Point, Tabulated or Brownian history")
            if isinstance(self.init, TabulatedHistory):
                self.init.check_span(self.params.tau)
        elif isinstance(self.params, OUParams):
            if not isinstance(self.init, (PointHistory, Gaussian1D)):
                raise DomainError("OU runs need a PointHistory or Gaussian1D initial law")
        else:
            raise DomainError("params must be DelayParams or OUParams")
        if self.output_times is None:
            times = tuple(k * self.dt for k in np.unique(np.round(np.linspace(0, n_steps, 101)).astype(int)))
        else:
            times = tuple(float(t) for t in self.output_times)
        steps = [_grid_index(t, self.dt, "output time") for t in times]
        if any(s < 0 or s > n_steps for s in steps) or any(np.diff(steps) <= 0):
            raise DomainError("output times must be increasing and inside [0, t_max]")
        if self.n_bins is not None and int(self.n_bins) < 1:
            raise DomainError("n_bins must be positive")
        object.__setattr__(self, "n_traj", int(self.n_traj))
        object.__setattr__(self, "master_seed", int(self.master_seed))
        object.__setattr__(self, "output_times", times)

    @property
    def output_steps(self):
        return np.array([round(t / self.dt) for t in self.output_times], dtype=np.int64)

    @property
    def lag(self):
        return round(self.params.tau / self.dt)


@dataclass(frozen=True)
class EnsembleSummary:
    """Per-output-time sample moments; ``samples`` has shape (n_traj, n_out)."""

    times: np.ndarray
    mean: np.ndarray
    variance: np.ndarray
    mean_se: np.ndarray
    variance_se: np.ndarray
    n_traj: int
    histograms: tuple = None
    samples: np.ndarray = field(default=None, repr=False, compare=False)

    def rows(self):
        for i, t in enumerate(self.times):
            yield {"t": float(t), "mean": float(self.mean[i]), "variance": float(self.variance[i]),
                   "mean_se": float(self.mean_se[i]), "variance_se": float(self.variance_se[i])}


def trajectory_stream(master_seed, index):
    """Counter-based generator for one trajectory."""
    key = np.array([master_seed & _MASK64, index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _fill_normals(cfg, b0, b1, n_draw):
    z = np.empty((b1 - b0, n_draw))
    for row, i in enumerate(range(b0, b1)):
        trajectory_stream(cfg.master_seed, i).standard_normal(out=z[row])
    return z


def _run_blocks(cfg, work):
    samples = np.empty((cfg.n_traj, len(cfg.output_times)))
    blocks = [(b, min(b + BLOCK_SIZE, cfg.n_traj)) for b in range(0, cfg.n_traj, BLOCK_SIZE)]
    threads = min(resolve_threads(), len(blocks))

    def job(bounds):
        b0, b1 = bounds
        bad_i, bad_k = work(b0, b1, samples[b0:b1])
        if bad_i >= 0:
            raise SimulationError(
                f"trajectory {b0 + bad_i} exceeded |x| > {BLOWUP_GUARD:g} at t = {bad_k * cfg.dt:g}")

    if threads <= 1:
        for bounds in blocks:
            job(bounds)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(job, blocks))
    return samples


def summarize(samples, times, n_bins=None):
    """Order-independent moments (exactly rounded sums) of each column."""
    n = samples.shape[0]
    mean = np.empty(samples.shape[1])
    var = np.empty_like(mean)
    var_se = np.empty_like(mean)
    for j in range(samples.shape[1]):
        col = samples[:, j]
        m = math.fsum(col) / n
        dev = col - m
        m2 = math.fsum(dev * dev)
        m4 = math.fsum(dev ** 4) / n
        mean[j], var[j] = m, m2 / (n - 1)
        # standard error of the unbiased sample variance (general distribution)
        var_se[j] = math.sqrt(max(m4 - var[j] ** 2 * (n - 3) / (n - 1), 0.0) / n)
    hists = None
    if n_bins:
        hists = tuple(np.histogram(samples[:, j], bins=n_bins) for j in range(samples.shape[1]))
        hists = tuple((edges, counts) for counts, edges in hists)
    return EnsembleSummary(np.asarray(times, dtype=float), mean, var, np.sqrt(var / n), var_se,
                           n, hists, samples)


def simulate_ou_exact(cfg):
    """Exact-transition sampling: ``x_{k+1} = e^{a dt} x_k + N(0, upsilon(dt))``."""
    p = cfg.params
    if not isinstance(p, OUParams):
        raise DomainError("simulate_ou_exact needs OUParams")
    n_steps = int(cfg.output_steps[-1])
    decay = math.exp(p.a * cfg.dt)
    sd = math.sqrt(ou_variance(p, cfg.dt))
    random_start = isinstance(cfg.init, Gaussian1D)
    out_idx = cfg.output_steps

    def work(b0, b1, out):
        z = _fill_normals(cfg, b0, b1, n_steps + int(random_start))
        if random_start:
            x0 = cfg.init.mean + cfg.init.std * z[:, 0]
            noise = np.ascontiguousarray(z[:, 1:])
        else:
            x0 = np.full(b1 - b0, float(cfg.init.c))
            noise = z
        return _kernels.ou_block(x0, noise, decay, sd, out_idx, BLOWUP_GUARD, out)

    return summarize(_run_blocks(cfg, work), cfg.output_times, cfg.n_bins)


def _history_block(cfg, z_hist, nb):
    lag = cfg.lag
    init = cfg.init
    if isinstance(init, BrownianHistory):
        hist = np.zeros((nb, lag + 1))
        np.cumsum(init.sigma_bar * math.sqrt(cfg.dt) * z_hist, axis=1, out=hist[:, 1:])
        return hist
    s = -cfg.params.tau + np.arange(lag + 1) * cfg.dt
    s[-1] = 0.0
    return np.broadcast_to(np.asarray(init(s), dtype=float), (nb, lag + 1)).copy()


def simulate_sdde_em(cfg):
    """Euler-Maruyama with a delay buffer of ``tau/dt`` steps."""
    p = cfg.params
    if not isinstance(p, DelayParams):
        raise DomainError("simulate_sdde_em needs DelayParams")
    n_steps = int(cfg.output_steps[-1])
    brownian = isinstance(cfg.init, BrownianHistory)
    n_hist = cfg.lag if brownian else 0
    sig_sqdt = p.sigma * math.sqrt(cfg.dt)
    out_idx = cfg.output_steps

    def work(b0, b1, out):
        z = _fill_normals(cfg, b0, b1, n_hist + n_steps)
        hist = _history_block(cfg, z[:, :n_hist], b1 - b0)
        noise = np.ascontiguousarray(z[:, n_hist:])
        return _kernels.em_block(hist, noise, p.a, p.b, cfg.dt, sig_sqdt, out_idx, BLOWUP_GUARD, out)

    return summarize(_run_blocks(cfg, work), cfg.output_times, cfg.n_bins)


def em_scheme_variance(p, dt, n_steps):
    """Exact variance of the Euler-Maruyama iterate from a deterministic history.

    ``x_k - E x_k = sigma sqrt(dt) sum_j G_{k-1-j} xi_j`` with ``G`` the
    scheme's discrete fundamental solution, so no sampling noise enters.
    Returns the variance at steps ``0..n_steps``.
    """
    lag = _grid_index(p.tau, dt, "tau")
    g = _kernels.em_green(p.a, p.b, dt, lag, n_steps)
    return np.concatenate([[0.0], p.sigma ** 2 * dt * np.cumsum(g * g)])


# --- entropy estimators ----------------------------------------------------


def _as_samples(samples, n_min):
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < n_min:
        raise DomainError(f"need at least {n_min} samples, got {x.size}")
    return x


def estimate_entropy_gaussian_plugin(samples):
    """``1/2 + 1/2 ln(2 pi s^2)`` with the unbiased sample variance."""
    x = _as_samples(samples, 2)
    s2 = float(np.var(x, ddof=1))
    if not s2 > 0:
        raise DomainError("zero sample variance; entropy is -inf")
    return 0.5 + 0.5 * math.log(2 * math.pi * s2)


def estimate_entropy_histogram(samples, n_bins=100):
    """Plug-in histogram entropy ``-sum p_i ln(p_i / width)``.

    Equal-width bins over the sample range; biased low by O(width^2).
    """
    if n_bins < 10:
        raise DomainError("n_bins must be >= 10")
    x = _as_samples(samples, 1000)
    counts, edges = np.histogram(x, bins=n_bins)
    width = edges[1] - edges[0]
    if not width > 0:
        raise DomainError("samples have zero range")
    p = counts[counts > 0] / x.size
    return -math.fsum(p * np.log(p / width))


def estimate_conditional_entropy(samples, fstar):
    """Gaussian plug-in ``H_c``: fit mean and variance, then use the closed form."""
    x = _as_samples(samples, 1000)
    s2 = float(np.var(x, ddof=1))
    if not s2 > 0:
        raise DomainError("zero sample variance")
    return conditional_entropy(Gaussian1D(float(np.mean(x)), s2), fstar)
