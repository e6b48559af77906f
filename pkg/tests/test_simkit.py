"""Seeded Monte Carlo kit: sampling contracts, estimators, searches."""

import math

import numpy as np
import pytest

from stratcomm.equilibrium import solve_noiseless
from stratcomm.gausslin import LinearScheme, SideInfoModel, scheme_costs
from stratcomm.simkit import (
    GridSpec,
    SimConfig,
    ace_max_correlation,
    deviation_search,
    empirical_decoder,
    estimate_costs,
    sample,
    verification_report,
)


def test_sample_is_deterministic(golden_model):
    cfg = SimConfig(seed=42, n=5000, chunk=512)
    t1 = sample(golden_model, cfg)
    t2 = sample(golden_model, cfg)
    assert t1.columns == ("X", "theta")
    assert np.array_equal(t1.data, t2.data)


def test_sample_prefix_stable_in_n(golden_model):
    # chunk substreams are independent, so asking for more rows must not
    # change the rows already drawn
    short = sample(golden_model, SimConfig(seed=7, n=1000, chunk=256))
    long = sample(golden_model, SimConfig(seed=7, n=3000, chunk=256))
    assert np.array_equal(long.data[:1000], short.data)


def test_sample_covariance_calibrated(si_correlated):
    n = 200_000
    table = sample(si_correlated, SimConfig(seed=3, n=n))
    emp = table.data.T @ table.data / n
    cov = si_correlated.covariance()
    # second-moment stderr is roughly sqrt((k_ii k_jj + k_ij^2)/n)
    for i in range(3):
        for j in range(3):
            se = math.sqrt((cov[i, i] * cov[j, j] + cov[i, j] ** 2) / n)
            assert abs(emp[i, j] - cov[i, j]) <= 5.0 * se


def test_sample_validation(golden_model):
    with pytest.raises(ValueError):
        sample(golden_model, SimConfig(seed=0, n=0))
    with pytest.raises(ValueError):
        sample(golden_model, SimConfig(seed=0, n=10, chunk=0))


def test_estimate_costs_agrees_with_closed_form(golden_model):
    report = solve_noiseless(golden_model)
    scheme = LinearScheme(
        enc_gain=1.0,
        enc_theta_weight=report.alpha,
        dec_y_weight=report.kappa,
    )
    cfg = SimConfig(seed=11, n=400_000)
    table = sample(golden_model, cfg)
    est = estimate_costs(table, scheme, 0.0, cfg)
    assert abs(est.costs.d_e - report.costs.d_e) <= 4.0 * est.stderr_e
    assert abs(est.costs.d_d - report.costs.d_d) <= 4.0 * est.stderr_d


def test_estimate_costs_with_channel_noise_and_w(si_correlated):
    from stratcomm.gausslin import best_decoder

    enc = LinearScheme(enc_gain=0.8, enc_theta_weight=0.5)
    solved, exact = best_decoder(si_correlated, enc, channel_noise_var=0.7)
    cfg = SimConfig(seed=13, n=400_000)
    table = sample(si_correlated, cfg)
    est = estimate_costs(table, solved, 0.7, cfg)
    assert abs(est.costs.d_e - exact.d_e) <= 4.0 * est.stderr_e
    assert abs(est.costs.d_d - exact.d_d) <= 4.0 * est.stderr_d


def test_deviation_search_finds_nothing_at_equilibrium(golden_model):
    report = solve_noiseless(golden_model)
    baseline = LinearScheme(enc_gain=1.0, enc_theta_weight=report.alpha)
    grid = GridSpec.around(report.alpha)
    out = deviation_search(golden_model, 0.0, baseline, grid)
    assert out.improvement <= 1e-9
    assert out.baseline_d_e == pytest.approx(report.costs.d_e, abs=1e-12)


def test_deviation_search_exposes_bad_baselines(golden_model):
    # a deliberately wrong weight leaves room the search must find
    baseline = LinearScheme(enc_gain=1.0, enc_theta_weight=-1.0)
    out = deviation_search(golden_model, 0.0, baseline, GridSpec.around(0.0))
    assert out.improvement > 0.1
    assert out.best_d_e < out.baseline_d_e


def test_grid_spec_around_shapes():
    grid = GridSpec.around(0.5, half_width=1.0, n_alpha=11, sigma_t2_max=2.0, n_sigma=5)
    assert grid.alphas.shape == (11,)
    assert grid.sigma_t2s.shape == (5,)
    assert grid.alphas[0] == pytest.approx(-0.5)
    assert grid.alphas[-1] == pytest.approx(1.5)
    assert grid.sigma_t2s[0] == 0.0


def test_ace_recovers_gaussian_correlation():
    rng = np.random.default_rng(101)
    n = 100_000
    x = rng.standard_normal(n)
    y = 0.7 * x + math.sqrt(1.0 - 0.49) * rng.standard_normal(n)
    report = ace_max_correlation(x, y)
    assert report.estimate == pytest.approx(0.7, abs=0.02)
    # for jointly Gaussian pairs the optimal transforms are linear
    assert report.identity_corr_x >= 0.99
    assert report.identity_corr_y >= 0.99


def test_ace_finds_nonlinear_dependence():
    rng = np.random.default_rng(103)
    x = rng.standard_normal(50_000)
    y = x * x  # zero linear correlation, perfect functional dependence
    report = ace_max_correlation(x, y)
    assert abs(np.corrcoef(x, y)[0, 1]) < 0.02
    assert report.estimate > 0.95
    assert report.identity_corr_x < 0.9  # transform is far from linear


def test_ace_input_validation():
    x = np.zeros(100)
    with pytest.raises(ValueError):
        ace_max_correlation(x, x)


def test_empirical_decoder_tracks_conditional_mean(golden_model):
    report = solve_noiseless(golden_model)
    cfg = SimConfig(seed=17, n=200_000, bins=48)
    table = sample(golden_model, cfg)
    x = table.column("X")
    theta = table.column("theta")
    y = x + report.alpha * theta
    check = empirical_decoder(y, x, cfg, report.kappa)
    assert check.max_deviation < 0.03
    assert check.counts.sum() == cfg.n


def test_verification_report_is_plain_arithmetic():
    out = verification_report(1.05, 0.02, 1.0)
    assert out["z_score"] == pytest.approx(2.5)
    assert out["closed_form"] == 1.0


def test_sim_config_chunk_is_part_of_the_contract(golden_model):
    a = sample(golden_model, SimConfig(seed=5, n=2000, chunk=500))
    b = sample(golden_model, SimConfig(seed=5, n=2000, chunk=1000))
    assert not np.array_equal(a.data, b.data)
