"""Independent reference computations used only by the test-suite."""

import math

import numpy as np
from scipy.integrate import quad, solve_ivp


def steps_fundamental(a, b, tau, n_intervals, u_eval, rtol=1e-13, atol=1e-16):
    """X on [0, n_intervals*tau] by the method of steps with an ODE integrator.

    ``Y_j(u) = X(j tau + u)`` for u in [0, tau] obeys ``Y_0' = a Y_0`` and
    ``Y_j' = a Y_j + b Y_{j-1}``, with ``Y_j(0) = Y_{j-1}(tau)``. Round r
    integrates the stacked system (Y_0..Y_r) jointly. Returns an array of
    shape (n_intervals, len(u_eval)).
    """
    starts = [1.0]
    for r in range(n_intervals):
        def rhs(u, y):
            d = a * y
            d[1:] += b * y[:-1]
            return d

        sol = solve_ivp(rhs, (0.0, tau), np.array(starts), method="DOP853",
                        rtol=rtol, atol=atol, t_eval=np.concatenate([u_eval, [tau]]))
        starts = [1.0] + list(sol.y[:, -1])
    return sol.y[:, :-1]


def quad_entropy(mean, var):
    f = lambda x: _pdf(x, mean, var) * -_logpdf(x, mean, var)
    s = math.sqrt(var)
    return quad(f, mean - 12 * s, mean + 12 * s, epsabs=1e-14, epsrel=1e-13, limit=200)[0]


def quad_conditional(m1, v1, m2, v2):
    f = lambda x: -_pdf(x, m1, v1) * (_logpdf(x, m1, v1) - _logpdf(x, m2, v2))
    s = math.sqrt(v1)
    return quad(f, m1 - 12 * s, m1 + 12 * s, epsabs=1e-14, epsrel=1e-13, limit=200)[0]


def quad_cross(m1, v1, m2, v2):
    f = lambda x: _pdf(x, m1, v1) * _logpdf(x, m2, v2)
    s = math.sqrt(v1)
    return quad(f, m1 - 12 * s, m1 + 12 * s, epsabs=1e-14, epsrel=1e-13, limit=200)[0]


def _logpdf(x, m, v):
    return -0.5 * math.log(2 * math.pi * v) - (x - m) ** 2 / (2 * v)


def _pdf(x, m, v):
    return math.exp(_logpdf(x, m, v))


def steps_solution(a, b, tau, phi, n_intervals, rtol=1e-13, atol=1e-16):
    """x(j tau), j = 1..n_intervals, for x' = a x + b x(t - tau) with history ``phi``.

    Same stacking as :func:`steps_fundamental`, with the history entering as
    the forcing of the first block ``Y_0' = a Y_0 + b phi(u - tau)``. The
    solver restarts at every history knot so kinks never sit inside a step.
    """
    knots = phi.knots() if callable(phi.knots) else phi.knots
    cuts = sorted({0.0, tau} | {k + tau for k in knots if 0.0 < k + tau < tau})

    def rhs(u, y):
        d = a * y
        d[0] += b * float(phi(u - tau))
        d[1:] += b * y[:-1]
        return d

    y = np.array([float(phi(0.0))])
    ends = []
    for r in range(n_intervals):
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            y = solve_ivp(rhs, (lo, hi), y, method="DOP853", rtol=rtol, atol=atol).y[:, -1]
        ends.append(y[-1])
        y = np.concatenate([[float(phi(0.0))], y])
    return np.array(ends)
