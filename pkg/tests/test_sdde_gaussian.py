import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from entroflow import (
    DelayParams,
    DomainError,
    FundamentalSolution,
    Gaussian1D,
    GaussianMixture,
    NoStationaryDensity,
    OUParams,
    PointHistory,
    Stability,
    brownian_state_variance,
    conditional_entropy,
    conditional_mean,
    covariance,
    entropy_curve_brownian,
    entropy_curve_point,
    entropy_lower_bound,
    fpe_residual,
    hayes_stable,
    integrate_xx,
    is_non_monotone,
    mixture_conditional_entropy,
    ou_variance,
    pair_law,
    sdde_variance,
    solution_map,
    stationary_law,
)
from entroflow.sdde_gaussian import history_variance, variance_rate

FIG = DelayParams(0.0, -1.0, 1.0, 0.25)


@st.composite
def stable_params(draw, bound=2.0, margin=0.05):
    a = draw(st.floats(-bound, bound))
    b = draw(st.floats(-bound, bound))
    tau = draw(st.floats(0.2, 1.5))
    sigma = draw(st.floats(0.1, 2.0))
    p = DelayParams(a, b, tau, sigma)
    assume(hayes_stable(p, tol=margin) is Stability.STABLE)
    return p


def test_variance_examples():
    p = DelayParams(0.0, -1.0, 1.0, 1.0)
    assert sdde_variance(p, 0.0) == 0.0
    assert sdde_variance(p, 1.0) == pytest.approx(1.0, abs=1e-14)
    q = DelayParams(-1.0, 0.0, 1.0, math.sqrt(2.0))
    assert sdde_variance(q, 1.0) == pytest.approx(ou_variance(OUParams(-1.0, math.sqrt(2.0)), 1.0), rel=1e-13)


def test_variance_needs_noise():
    with pytest.raises(DomainError):
        sdde_variance(DelayParams(0.0, -1.0, 1.0), 1.0)


def test_pair_law_degenerate_before_tau():
    pl = pair_law(FIG, PointHistory(1.0), 0.5)
    assert pl.degenerate and pl.det == 0.0
    pl = pair_law(FIG, PointHistory(1.0), 2.0)
    assert not pl.degenerate and pl.det > 0


@settings(max_examples=20, deadline=None)
@given(stable_params(), st.floats(1.05, 5.0))
def test_strict_cauchy_schwarz(p, frac):
    t = frac * p.tau
    r = covariance(p, t, -p.tau, 0.0)
    assert r * r < sdde_variance(p, t - p.tau) * sdde_variance(p, t)
    # r_t(-tau, -tau) is upsilon(t - tau)
    assert covariance(p, t, -p.tau, -p.tau) == pytest.approx(sdde_variance(p, t - p.tau), rel=1e-12)


def test_conditional_mean_examples():
    phi = PointHistory(1.0)
    # before tau the two coordinates are uncorrelated
    assert conditional_mean(FIG, phi, 5.0, 0.6) == pytest.approx(float(phi(0.6 - 1.0)))
    p = DelayParams(0.0, -1.0, 1.0, 1.0)
    x0 = solution_map(p, phi, 2.0)
    assert conditional_mean(p, phi, x0, 2.0) == pytest.approx(solution_map(p, phi, 1.0), abs=1e-14)
    # 2-D Gaussian conditioning built from independent pieces
    v = sdde_variance(p, 2.0)
    r = p.sigma ** 2 * integrate_xx(FundamentalSolution(p, 3.0), 0.0, 1.0, 1.0)
    expect = solution_map(p, phi, 1.0) + r / v * (1.0 - x0)
    assert conditional_mean(p, phi, 1.0, 2.0) == pytest.approx(expect, abs=1e-13)


def test_stationary_value():
    law = stationary_law(FIG)
    tail = FIG.sigma ** 2 * integrate_xx(FundamentalSolution(FIG, 200.0), 0.0, 200.0)
    assert law.K0 == pytest.approx(tail, rel=1e-6)
    assert law.K0 == pytest.approx(0.1065066, abs=1e-6)
    assert abs(law.ibv_residual(FIG)) < 1e-10


def test_stationary_ou_limit():
    law = stationary_law(DelayParams(-1.0, -1e-8, 1.0, math.sqrt(2.0)))
    assert law.K0 == pytest.approx(1.0, abs=1e-7)


def test_stationary_requires_stable():
    with pytest.raises(NoStationaryDensity):
        stationary_law(DelayParams(0.0, -1.0, math.pi / 2, 1.0))
    with pytest.raises(NoStationaryDensity):
        stationary_law(DelayParams(0.5, 0.0, 1.0, 1.0))


@settings(max_examples=25, deadline=None)
@given(stable_params())
def test_stationary_identities(p):
    law = stationary_law(p)
    assert abs(law.ibv_residual(p)) < 1e-10 * max(1.0, law.K0)
    assert law.K(0.0) == law.K0
    h = 1e-5
    slope = (-3 * law.K(0.0) + 4 * law.K(h) - law.K(2 * h)) / (2 * h)
    assert slope == pytest.approx(-0.5 * p.sigma ** 2, abs=1e-6 * max(1.0, law.K0))
    # near the wedge edge X decays slowly, so take the horizon where it has died out
    T = 200 * p.tau
    F = FundamentalSolution(p, 2000 * p.tau)
    while np.abs(F(np.linspace(T - 10 * p.tau, T, 200))).max() > 1e-7 and T < 2000 * p.tau:
        T *= 2
    ups = p.sigma ** 2 * integrate_xx(F, 0.0, min(T, 2000 * p.tau))
    assert ups == pytest.approx(law.K0, rel=1e-6)


def test_slow_decay_case():
    p = DelayParams(-0.8125, -1.65625, 1.375, 1.0)
    F = FundamentalSolution(p, 2000 * p.tau)
    assert integrate_xx(F, 0.0, 2000 * p.tau) == pytest.approx(stationary_law(p).K0, rel=1e-12)


@pytest.mark.parametrize("eps", [1e-4, 1e-6])
def test_regime_continuity(eps):
    # a^2 - b^2 crosses zero: the three closed forms must agree in the limit
    a = -1.0
    for sign in (-1, 1):
        b = -(1.0 + sign * eps)
        lo = stationary_law(DelayParams(a, b, 0.7, 1.0))
        crit = stationary_law(DelayParams(a, -1.0, 0.7, 1.0))
        assert crit.regime == "critical"
        assert lo.K0 == pytest.approx(crit.K0, abs=1e-6 + 10 * eps)
        assert lo.K(0.7) == pytest.approx(crit.K(0.7), abs=1e-6 + 10 * eps)


@settings(max_examples=15, deadline=None)
@given(stable_params())
def test_variance_increases_to_K0(p):
    grid = np.linspace(0.01, 30 * p.tau, 200)
    c = entropy_curve_point(p, PointHistory(0.0), grid)
    assert np.all(np.diff(c.variance) >= 0)  # flat only once saturated at K0 to rounding
    assert np.all(np.diff(c.variance)[c.variance[1:] < 0.999 * c.variance[-1]] > 0)
    assert np.all(c.variance < stationary_law(p).K0 * (1 + 1e-12))


def test_point_curve_damped_example():
    p = DelayParams(0.0, -1.0, 1.1, 0.25)
    grid = np.linspace(0, 6 * 1.1, 2001)[1:]
    c = entropy_curve_point(p, PointHistory(1.0), grid)
    assert np.all(np.diff(c.h_g) > 0)
    assert np.all(c.h_c <= 0)
    assert is_non_monotone(c.h_c[grid < 1.1 * 1.1])
    later = entropy_curve_point(p, PointHistory(1.0), np.array([80.0]))
    assert abs(later.h_c[0]) < 1e-6


@settings(max_examples=10, deadline=None)
@given(stable_params(), st.floats(-3, 3))
def test_cond_entropy_first_term_nonnegative(p, c0):
    grid = np.linspace(0.05, 8 * p.tau, 100)
    k0 = stationary_law(p).K0
    ups = p.sigma ** 2 * np.array([integrate_xx(FundamentalSolution(p, t), 0, t) for t in grid])
    rate = np.array([variance_rate(p, t) for t in grid])
    assert np.all(rate / (2 * ups) * (1 - ups / k0) >= 0)
    c = entropy_curve_point(p, PointHistory(c0), grid)
    assert np.all(c.h_c <= 0)


@settings(max_examples=10, deadline=None)
@given(stable_params(), st.floats(0.2, 3.0), st.floats(0.0, 4.0))
def test_brownian_variance_reduction(p, sigma_bar, frac):
    q = DelayParams(0.0, p.b, p.tau, p.sigma)
    t = frac * q.tau
    F = FundamentalSolution(q, t + 2 * q.tau)
    closed = brownian_state_variance(q, sigma_bar, np.array([t]), F)[0]
    ups = lambda s: q.sigma ** 2 * integrate_xx(F, 0.0, s)  # noqa: E731
    direct = sigma_bar ** 2 * integrate_xx(F, t, t + q.tau) + ups(t)
    assert closed == pytest.approx(direct, abs=1e-10)


def test_history_variance_general_a():
    # each indicator history 1_[r,0] evolves to X(t-r) - a int_t^{t-r} X; check by quadrature in r
    p = DelayParams(-0.6, -0.8, 0.9, 0.3)
    F = FundamentalSolution(p, 5.0)
    t = 1.7
    resp = lambda v: F(t + v) - p.a * F.integral(t, t + v)  # noqa: E731
    ref = 1.3 ** 2 * quad(lambda v: resp(v) ** 2, 0, p.tau, epsabs=1e-14, limit=200,
                          points=[q * p.tau - t for q in range(1, 6) if 0 < q * p.tau - t < p.tau])[0]
    assert history_variance(p, 1.3, t, F) == pytest.approx(ref, abs=1e-12)


def test_brownian_coefficient_collapse():
    grid = np.linspace(0, 3, 31)
    got = brownian_state_variance(FIG, FIG.sigma, grid)
    F = FundamentalSolution(FIG, 4.0)
    ref = [FIG.sigma ** 2 * integrate_xx(F, 0.0, t + 1.0) for t in grid]
    assert got == pytest.approx(ref, abs=1e-14)


def test_brownian_figure_curve():
    grid = np.linspace(0, 6, 2000)
    c = entropy_curve_brownian(DelayParams(0.0, -1.0, 1.0, 0.25), 1.0, grid)
    assert is_non_monotone(c.h_g) and is_non_monotone(c.h_c)


def test_marginal_oscillation():
    p = DelayParams(0.0, -1.0, math.pi / 2, 0.0)
    grid = np.linspace(0, 30, 3000)
    c = entropy_curve_brownian(p, 1.0, grid)
    v = c.variance
    assert c.h_c == pytest.approx(0.5 * np.log(v) + 0.5 * (1 - v), abs=1e-14)
    late = c.h_c[grid > 5]
    assert late.min() < -0.05 and late.max() > -0.01


def test_brownian_unstable_raises():
    with pytest.raises(NoStationaryDensity):
        entropy_curve_brownian(DelayParams(0.0, 1.0, 1.0, 0.25), 1.0, [0.0, 1.0])


def test_lower_bound_examples():
    phi = PointHistory(1.0)
    c = entropy_curve_point(FIG, phi, np.array([2.0]))
    assert entropy_lower_bound(FIG, [(1.0, phi)], 2.0) == pytest.approx(c.h_c[0], abs=1e-14)
    assert abs(entropy_lower_bound(FIG, [(1.0, phi)], 60.0)) < 1e-6
    # the state law from a two-point history mixture is a two-Gaussian mixture
    ups = sdde_variance(FIG, 2.0)
    m = solution_map(FIG, phi, 2.0)
    mix = GaussianMixture(((0.5, Gaussian1D(m, ups)), (0.5, Gaussian1D(-m, ups))))
    exact = mixture_conditional_entropy(mix, stationary_law(FIG).density)
    bound = entropy_lower_bound(FIG, [(0.5, phi), (0.5, PointHistory(-1.0))], 2.0)
    assert bound <= exact + 1e-10


def test_fpe_examples():
    p = DelayParams(0.0, -1.0, 1.0, 1.0)
    assert abs(fpe_residual(p, PointHistory(1.0), 2.0, 1e-4)) < 1e-6
    q = DelayParams(-1.0, 0.0, 1.0, math.sqrt(2.0))
    assert abs(fpe_residual(q, PointHistory(1.0), 2.0, 1e-4)) < 1e-8
    r1 = fpe_residual(p, PointHistory(1.0), 1.5, 1e-2)
    r2 = fpe_residual(p, PointHistory(1.0), 1.5, 5e-3)
    assert r1 / r2 == pytest.approx(4.0, rel=0.05)
    with pytest.raises(DomainError):
        fpe_residual(p, PointHistory(1.0), 1.0, 1e-3)
