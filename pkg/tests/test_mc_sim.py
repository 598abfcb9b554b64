import math

import numpy as np
import pytest

from entroflow import (
    BrownianHistory,
    DelayParams,
    DomainError,
    Gaussian1D,
    OUParams,
    PointHistory,
    SimConfig,
    SimulationError,
    TabulatedHistory,
    estimate_conditional_entropy,
    estimate_entropy_gaussian_plugin,
    estimate_entropy_histogram,
    ou_entropy_curve,
    ou_variance,
    sdde_variance,
    simulate_ou_exact,
    simulate_sdde_em,
    solution_map,
)
from entroflow.mc_sim import em_scheme_variance, trajectory_stream

SQ2 = math.sqrt(2.0)


def test_config_validation():
    p = DelayParams(0.0, -1.0, 1.0, 0.25)
    with pytest.raises(DomainError):
        SimConfig(p, PointHistory(1.0), 0.3, 3.0, 100, 1)  # tau not a multiple of dt
    with pytest.raises(DomainError):
        SimConfig(p, PointHistory(1.0), 0.01, 3.0, 1, 1)
    with pytest.raises(DomainError):
        SimConfig(p, Gaussian1D(0, 1), 0.01, 3.0, 10, 1)
    with pytest.raises(DomainError):
        SimConfig(OUParams(-1, 1), PointHistory(0.0), 0.01, 1.0, 10, 1, output_times=(0.5, 0.25))
    cfg = SimConfig(p, PointHistory(1.0), 0.01, 3.0, 10, 1)
    assert cfg.lag == 100 and len(cfg.output_times) == 101


def test_streams_are_keyed_by_index():
    a = trajectory_stream(42, 7).standard_normal(5)
    b = trajectory_stream(42, 7).standard_normal(5)
    c = trajectory_stream(42, 8).standard_normal(5)
    assert np.array_equal(a, b) and not np.array_equal(a, c)


@pytest.mark.parametrize("threads", ["1", "3"])
def test_thread_count_does_not_change_results(monkeypatch, threads):
    p = DelayParams(-0.2, -1.0, 0.5, 0.4)
    cfg = SimConfig(p, BrownianHistory(1.0), 0.01, 2.0, 1000, 99, output_times=(0.5, 1.0, 2.0))
    monkeypatch.setenv("ENTROFLOW_THREADS", "1")
    ref = simulate_sdde_em(cfg)
    monkeypatch.setenv("ENTROFLOW_THREADS", threads)
    got = simulate_sdde_em(cfg)
    assert np.array_equal(ref.samples, got.samples)
    assert np.array_equal(ref.variance, got.variance) and np.array_equal(ref.mean, got.mean)


def test_noiseless_ou_is_deterministic():
    p = OUParams(-0.7, 1e-300)
    cfg = SimConfig(p, PointHistory(2.0), 0.01, 1.0, 4, 3, output_times=(0.0, 0.5, 1.0))
    out = simulate_ou_exact(cfg)
    assert out.samples == pytest.approx(np.tile(2.0 * np.exp(-0.7 * np.array([0, 0.5, 1.0])), (4, 1)),
                                        rel=1e-13)


def test_noiseless_em_exact_first_interval():
    p = DelayParams(0.0, -1.0, 1.0, 0.0)
    # dyadic dt: every partial sum 1 - k dt is representable, so the result is exact
    cfg = SimConfig(p, PointHistory(1.0), 2.0 ** -10, 1.0, 2, 0, output_times=(1.0,))
    assert np.all(simulate_sdde_em(cfg).samples == 0.0)
    cfg = SimConfig(p, PointHistory(1.0), 1e-3, 1.0, 2, 0, output_times=(1.0,))
    assert np.all(np.abs(simulate_sdde_em(cfg).samples) < 1e-13)


def test_ou_exact_variance():
    # exact transitions, so a coarse dt is as good as a fine one
    p = OUParams(-1.0, SQ2)
    out = simulate_ou_exact(SimConfig(p, PointHistory(0.0), 0.05, 1.0, 100_000, 7, output_times=(1.0,)))
    assert abs(out.variance[0] - ou_variance(p, 1.0)) < 5 * out.variance_se[0]


def test_ou_stationary_start_stays_flat():
    p = OUParams(-1.0, SQ2)
    out = simulate_ou_exact(SimConfig(p, Gaussian1D(0, 1), 0.05, 3.0, 20_000, 11,
                                      output_times=(0.0, 1.0, 2.0, 3.0)))
    assert np.all(np.abs(out.variance - 1.0) < 5 * out.variance_se)


def test_em_mean_tracks_solution_map():
    p = DelayParams(0.0, -1.0, 1.1, 0.25)
    dt = 0.01
    times = (0.55, 1.1, 2.2, 3.3)
    noisy = simulate_sdde_em(SimConfig(p, PointHistory(1.0), dt, 3.3, 20_000, 5, output_times=times))
    clean = simulate_sdde_em(SimConfig(DelayParams(0.0, -1.0, 1.1, 0.0), PointHistory(1.0), dt, 3.3, 2, 5,
                                       output_times=times))
    exact = np.array([solution_map(p, PointHistory(1.0), t) for t in times])
    # the ensemble mean is the noiseless scheme; that scheme is O(dt) from the exact map
    assert np.all(np.abs(noisy.mean - clean.samples[0]) < 5 * noisy.mean_se)
    assert np.all(np.abs(clean.samples[0] - exact) < dt)


def test_em_variance_matches_scheme_green_function():
    p = DelayParams(0.0, -1.0, 1.0, 0.25)
    dt = 0.01
    out = simulate_sdde_em(SimConfig(p, PointHistory(1.0), dt, 3.0, 40_000, 8, output_times=(1.0, 2.0, 3.0)))
    exact = em_scheme_variance(p, dt, 300)[[100, 200, 300]]
    assert np.all(np.abs(out.variance - exact) < 5 * out.variance_se)


def test_weak_order_one():
    p = DelayParams(-0.3, -1.0, 1.0, 1.0)
    ref = sdde_variance(p, 2.0)
    errs = [abs(em_scheme_variance(p, dt, round(2.0 / dt))[-1] - ref) for dt in (4e-3, 2e-3, 1e-3)]
    for e1, e2 in zip(errs, errs[1:]):
        assert e1 / e2 == pytest.approx(2.0, rel=0.05)


def test_tabulated_history_sampled_on_grid():
    p = DelayParams(0.0, -1.0, 1.0, 0.0)
    knots = np.linspace(-1, 0, 3)
    cfg = SimConfig(p, TabulatedHistory(knots, [0.0, 1.0, 1.0]), 0.25, 0.25, 2, 0, output_times=(0.25,))
    # x(0.25) = x(0) + b * phi(-1) * dt = 1
    assert simulate_sdde_em(cfg).samples[0, 0] == 1.0


def test_blowup_is_reported():
    p = DelayParams(50.0, 0.0, 0.01, 1.0)
    cfg = SimConfig(p, PointHistory(1.0), 0.01, 20.0, 4, 0)
    with pytest.raises(SimulationError, match="trajectory 0"):
        simulate_sdde_em(cfg)


def test_histograms_count_everything():
    p = OUParams(-1.0, 1.0)
    out = simulate_ou_exact(SimConfig(p, PointHistory(0.5), 0.1, 1.0, 3000, 2, output_times=(0.5, 1.0),
                                      n_bins=40))
    for edges, counts in out.histograms:
        assert counts.sum() == 3000 and len(edges) == 41
    assert np.all(out.variance >= 0)
    rows = list(out.rows())
    assert [r["t"] for r in rows] == [0.5, 1.0]


# --- estimators -----------------------------------------------------------


@pytest.fixture(scope="module")
def normals():
    return np.random.default_rng(2024).standard_normal(1_000_000)


def test_gaussian_plugin(normals):
    h = estimate_entropy_gaussian_plugin(normals)
    assert h == pytest.approx(0.5 + 0.5 * math.log(2 * math.pi), abs=0.01)
    assert estimate_entropy_gaussian_plugin(2 * normals) - h == pytest.approx(math.log(2), abs=1e-12)
    with pytest.raises(DomainError):
        estimate_entropy_gaussian_plugin(np.ones(10))


def test_histogram_estimator(normals):
    h = estimate_entropy_histogram(normals, 100)
    assert h == pytest.approx(1.4189, abs=0.02)
    assert abs(h - estimate_entropy_gaussian_plugin(normals)) < 0.03
    u = np.random.default_rng(3).uniform(0, 1, 1_000_000)
    assert abs(estimate_entropy_histogram(u, 100)) < 0.01
    with pytest.raises(DomainError):
        estimate_entropy_histogram(normals[:999])
    with pytest.raises(DomainError):
        estimate_entropy_histogram(normals, 5)


def test_histogram_agrees_on_sdde_output():
    p = DelayParams(0.0, -1.0, 1.0, 0.25)
    out = simulate_sdde_em(SimConfig(p, BrownianHistory(1.0), 0.01, 2.0, 50_000, 13, output_times=(2.0,)))
    x = out.samples[:, 0]
    assert abs(estimate_entropy_histogram(x, 100) - estimate_entropy_gaussian_plugin(x)) < 0.03


def test_conditional_estimator_identity(normals):
    # H_c of the plug-in fit is O(1/n) with mean and spread near 1/n
    n = 100_000
    val = estimate_conditional_entropy(normals[:n], Gaussian1D(0, 1))
    assert val <= 0 and abs(val) < 3 * 3.0 / n


def test_conditional_estimator_ou_transient():
    p = OUParams(-1.0, SQ2)
    t = (0.5, 1.0)
    out = simulate_ou_exact(SimConfig(p, Gaussian1D(0, 0.5), 0.05, 1.0, 100_000, 21, output_times=t))
    exact = ou_entropy_curve(p, Gaussian1D(0, 0.5), np.array([0.0, 0.5, 1.0])).h_c[1:]
    for j in range(2):
        v, se = out.variance[j], out.variance_se[j]
        est = estimate_conditional_entropy(out.samples[:, j], Gaussian1D(0, 1.0))
        # propagate the variance SE through dH_c/dv = (1/v - 1)/2
        assert abs(est - exact[j]) < 5 * abs(0.5 * (1 / v - 1)) * se + 5e-4


def test_conditional_estimator_large_t():
    from entroflow import stationary_law

    p = DelayParams(-0.5, -0.5, 0.5, 1.0)
    out = simulate_sdde_em(SimConfig(p, PointHistory(2.0), 0.01, 30.0, 20_000, 4, output_times=(30.0,)))
    assert abs(estimate_conditional_entropy(out.samples[:, 0], stationary_law(p).density)) < 0.01
