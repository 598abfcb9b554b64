"""Verification batteries behind ``entroflow verify``.

Each suite yields ``Check`` records; the report text contains no timings or
thread counts so that it is reproducible byte for byte.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .dde_kernel import (
    BrownianHistory,
    DelayParams,
    FundamentalSolution,
    PointHistory,
    Stability,
    direct_series,
    hayes_stable,
    integrate_xx,
)
from .gaussian_entropy import Gaussian1D, entropy_bridge_residual
from .mc_sim import SimConfig, simulate_ou_exact, simulate_sdde_em
from .ou_process import OUParams, ou_variance
from .sdde_gaussian import brownian_state_variance, fpe_residual, stationary_law

SUITES = ("identities", "mc-vs-analytic", "fpe-residual")


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    measured: float
    tolerance: float

    def line(self):
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag} {self.name} measured={self.measured!r} tol={self.tolerance!r}"


def _check(name, measured, tol):
    return Check(name, bool(abs(measured) < tol), float(measured), float(tol))


def steps_reference(a, b, tau, n_intervals, u_eval):
    """X by the method of steps, integrating ``X(j tau + u)`` for all j jointly."""
    starts = [1.0]
    sol = None
    for _ in range(n_intervals):
        def rhs(u, y):
            d = a * y
            d[1:] += b * y[:-1]
            return d

        sol = solve_ivp(rhs, (0.0, tau), np.array(starts), method="DOP853", rtol=1e-13,
                        atol=1e-16, t_eval=np.concatenate([u_eval, [tau]]))
        starts = [1.0] + list(sol.y[:, -1])
    return sol.y[:, :-1]


def random_stable(rng, bound=2.0, margin=0.1):
    """Stable-wedge parameters with every Hayes value above ``margin``.

    The margin keeps X decayed by 200 tau so truncated integrals are meaningful.
    """
    while True:
        a, b = rng.uniform(-bound, bound, 2)
        tau = rng.uniform(0.2, 2.0)
        p = DelayParams(a, b, tau, rng.uniform(0.1, 2.0))
        if hayes_stable(p, tol=margin) is Stability.STABLE:
            return p


def identities(seed):
    rng = np.random.default_rng(seed)
    for i in range(5):
        p = random_stable(rng)
        law = stationary_law(p)
        yield _check(f"ibv[{i}] a={p.a:.6f} b={p.b:.6f} tau={p.tau:.6f}", law.ibv_residual(p), 1e-10)
        F = FundamentalSolution(p, 200 * p.tau)
        tail = p.sigma ** 2 * integrate_xx(F, 0.0, 200 * p.tau)
        yield _check(f"K0-vs-integral[{i}]", (law.K0 - tail) / law.K0, 1e-6)
    for i in range(5):
        f = Gaussian1D(rng.normal(0, 3), rng.uniform(0.1, 5))
        g = Gaussian1D(rng.normal(0, 3), rng.uniform(0.1, 5))
        yield _check(f"bridge[{i}]", entropy_bridge_residual(f, g), 1e-12)
    u = np.linspace(0.0, 1.0, 21)[:-1]
    for i in range(5):
        a, b = rng.uniform(-3, 3, 2)
        tau = rng.uniform(0.1, 1.0)
        p = DelayParams(a, b, tau)
        ref = steps_reference(a, b, tau, 10, u * tau)
        got = FundamentalSolution(p, 10 * tau)((np.arange(10)[:, None] + u) * tau)
        scale = max(1.0, float(np.abs(ref).max()))
        yield _check(f"series-vs-steps[{i}]", float(np.abs(got - ref).max()) / scale, 1e-10)
        t = 2.5 * tau
        yield _check(f"series-vs-direct-sum[{i}]", (FundamentalSolution(p, t)(t) - direct_series(p, t)), 1e-12)


def fpe_table(seed):
    rng = np.random.default_rng(seed)
    cases = [DelayParams(0.0, -1.0, 1.0, 1.0)] + [random_stable(rng) for _ in range(4)]
    for i, p in enumerate(cases):
        for mult in (1.5, 2.0, 5.0):
            # O(h^2) central-difference budget
            for h, tol in ((1e-3, 1e-4), (1e-4, 1e-6)):
                res = fpe_residual(p, PointHistory(1.0), mult * p.tau, h)
                yield _check(f"fpe[{i}] t={mult}tau h={h:g}", res, tol)


def mc_vs_analytic(seed, n_traj=100_000, dt=1e-3):
    p = DelayParams(0.0, -1.0, 1.0, 0.25)
    times = (1.0, 2.0, 4.0)
    ens = simulate_sdde_em(SimConfig(p, BrownianHistory(1.0), dt, 4.0, n_traj, seed, output_times=times))
    exact = brownian_state_variance(p, 1.0, np.array(times))
    for j, t in enumerate(times):
        z = (ens.variance[j] - exact[j]) / ens.variance_se[j]
        yield _check(f"sdde-variance t={t:g} (z-score)", z, 5.0)
    q = OUParams(-1.0, math.sqrt(2.0))
    ens = simulate_ou_exact(SimConfig(q, PointHistory(0.0), dt, 1.0, n_traj, seed, output_times=(1.0,)))
    z = (ens.variance[0] - ou_variance(q, 1.0)) / ens.variance_se[0]
    yield _check("ou-exact-variance t=1 (z-score)", z, 5.0)


def run_suite(name, seed=42, **kwargs):
    if name == "identities":
        return list(identities(seed))
    if name == "fpe-residual":
        return list(fpe_table(seed))
    if name == "mc-vs-analytic":
        return list(mc_vs_analytic(seed, **kwargs))
    raise ValueError(f"unknown suite {name!r}; choose from {SUITES}")


def render(name, checks):
    lines = [f"suite {name}"] + [c.line() for c in checks]
    n_pass = sum(c.passed for c in checks)
    lines.append(f"SUMMARY {n_pass}/{len(checks)} passed")
    return "\n".join(lines) + "\n"
