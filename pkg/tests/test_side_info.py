"""Receiver side information: equilibria, rate limits, exact matching.

The frozen weight 0.460190 below comes from a direct covariance-conditioning
grid search written independently of this package (600001-point grid).
"""

import math
from dataclasses import replace

import numpy as np
import pytest

from stratcomm.equilibrium import best_alpha, solve_noiseless
from stratcomm.errors import InfeasibleInterval, NoRoot, ZeroRate
from stratcomm.gausslin import SideInfoModel, cross_moment
from stratcomm.noisy_channel import ChannelSpec, capacity
from stratcomm.side_info import (
    BoundHit,
    beta_of_rate,
    feasible_rho_xw_interval,
    find_matched_rho_xw,
    match_condition,
    match_sweep,
    match_sweep_csv,
    si_rate,
    si_rd_point,
    solve_noiseless_si,
    solve_noisy_si_linear,
    transmitter_si_invariance,
)

# Same sign of the matching residual across the whole feasible interval,
# so no matched geometry exists (found by scripted search, then verified).
NO_ROOT_MODEL = SideInfoModel(1.0, 0.6, 0.5, 0.0, -0.45, 1.0)
NO_ROOT_CHANNEL = ChannelSpec(power=0.5, noise_var=1.0)

ORACLE_MODEL = SideInfoModel(1.0, 0.2, 1.0, 0.7, -0.5, 1.0)
ORACLE_BETA = 0.460190


def test_reduces_to_plain_game_when_w_is_independent(si_uncorrelated):
    report = solve_noiseless_si(si_uncorrelated)
    plain = solve_noiseless(si_uncorrelated.pair_part())
    assert report.alpha_si == pytest.approx(plain.alpha, abs=1e-9)
    assert report.dec_w == pytest.approx(0.0, abs=1e-9)
    # d_e is stationary at the optimum, d_d is not, so the searched weight's
    # residual error shows up linearly in d_d only
    assert report.costs.d_e == pytest.approx(plain.costs.d_e, abs=1e-12)
    assert report.costs.d_d == pytest.approx(plain.costs.d_d, abs=1e-9)


def test_side_information_helps_the_receiver(si_correlated):
    with_w = solve_noiseless_si(si_correlated)
    without = solve_noiseless(si_correlated.pair_part())
    assert with_w.costs.d_d < without.costs.d_d


def test_transmitting_w_changes_nothing(si_correlated):
    report = transmitter_si_invariance(si_correlated, (-2.0, -0.5, 0.0, 1.0, 3.0))
    assert report.max_abs_deviation <= 1e-12


def test_decoder_weights_are_the_conditional_mean(si_correlated):
    # residual of the solved decoder is uncorrelated with both observations
    from stratcomm.gausslin import LinearScheme, best_decoder

    report = solve_noiseless_si(si_correlated)
    enc = LinearScheme(enc_gain=1.0, enc_theta_weight=report.alpha_si)
    solved, _ = best_decoder(si_correlated, enc, 0.0)
    err = {"x": 1.0, "xhat": -1.0}
    assert cross_moment(si_correlated, solved, 0.0, err, {"y": 1.0}) == pytest.approx(0.0, abs=1e-12)
    assert cross_moment(si_correlated, solved, 0.0, err, {"w": 1.0}) == pytest.approx(0.0, abs=1e-12)


def test_rate_limit_reproduces_rate(si_correlated):
    for rate in (0.3, 1.0, 2.0, 6.0):
        point = si_rd_point(si_correlated, rate)
        assert si_rate(si_correlated, point.beta, point.sigma_s2) == pytest.approx(
            rate, abs=1e-9
        )


def test_zero_rate_point_is_w_only_estimation(si_correlated):
    point = si_rd_point(si_correlated, 0.0)
    assert point.beta == 0.0
    assert math.isinf(point.sigma_s2)
    # W-only receiver: residual variance sigma^2 (1 - rho_xw^2 / r_w)
    assert point.costs.d_d == pytest.approx(1.0 - 0.4**2, abs=1e-12)
    with pytest.raises(ZeroRate):
        si_rd_point(si_correlated, -0.5)
    with pytest.raises(ZeroRate):
        beta_of_rate(si_correlated, 0.0)


def test_costs_decrease_with_rate(si_correlated):
    rates = (0.0, 0.5, 1.0, 2.0, 4.0, 8.0)
    points = [si_rd_point(si_correlated, rate) for rate in rates]
    d_e = [p.costs.d_e for p in points]
    assert all(a > b for a, b in zip(d_e, d_e[1:]))


def test_weight_equals_plain_root_when_w_is_independent(si_uncorrelated):
    alpha = best_alpha(si_uncorrelated.pair_part())
    for rate in (0.25, 0.5, 1.0, 2.0, 4.0, 8.0):
        beta, _ = beta_of_rate(si_uncorrelated, rate)
        assert beta == pytest.approx(alpha, abs=1e-8)


def test_weight_is_rate_free_even_with_correlated_w(si_correlated):
    # The conditional-variance rate elimination cancels out of the argmin:
    # the weight of the noiseless game solves every rate-limited one too.
    alpha_si = solve_noiseless_si(si_correlated).alpha_si
    baseline, _ = beta_of_rate(si_correlated, 0.5)
    for rate in (0.5, 2.0, 4.0, 30.0):
        beta, _ = beta_of_rate(si_correlated, rate)
        assert beta == pytest.approx(baseline, abs=1e-8)
        assert beta == pytest.approx(alpha_si, abs=1e-8)


def test_weight_matches_independent_grid_oracle():
    beta, _ = beta_of_rate(ORACLE_MODEL, 2.0)
    assert beta == pytest.approx(ORACLE_BETA, abs=1e-4)


def test_noise_variance_carries_the_rate_dependence(si_correlated):
    _, s_low = beta_of_rate(si_correlated, 0.5)
    _, s_high = beta_of_rate(si_correlated, 4.0)
    assert s_low > 100.0 * s_high


def test_linear_play_meets_power_budget(si_correlated):
    ch = ChannelSpec(power=2.5, noise_var=1.5)
    scheme, _ = solve_noisy_si_linear(si_correlated, ch)
    sent = cross_moment(si_correlated, scheme, ch.noise_var, {"u": 1.0}, {"u": 1.0})
    assert sent == pytest.approx(ch.power, abs=1e-12)


def test_matched_geometry_closes_the_gap():
    base = SideInfoModel(1.0, 0.0, 1.0, 0.0, -0.30, 1.0)
    ch = ChannelSpec(power=3.0, noise_var=1.0)
    root = find_matched_rho_xw(base, ch)
    matched_model = replace(base, rho_x_w=root)
    report = match_condition(matched_model, ch)
    assert report.matched
    assert report.residual <= 1e-6
    assert abs(report.gap) <= 1e-6
    assert report.rate == pytest.approx(capacity(ch), abs=1e-15)
    # at the matched root the rate-limited weight is the noiseless one
    assert report.beta == pytest.approx(
        solve_noiseless_si(matched_model).alpha_si, abs=1e-8
    )


def test_perturbed_geometry_reopens_the_gap():
    base = SideInfoModel(1.0, 0.0, 1.0, 0.0, -0.30, 1.0)
    ch = ChannelSpec(power=3.0, noise_var=1.0)
    root = find_matched_rho_xw(base, ch)
    lo, hi = feasible_rho_xw_interval(base)
    for shift in (-0.1, 0.1):
        rho = min(max(root + shift, lo + 1e-6), hi - 1e-6)
        report = match_condition(replace(base, rho_x_w=rho), ch)
        assert not report.matched
        assert report.gap > 1e-9


def test_gap_is_never_negative(si_correlated):
    for p in (0.5, 2.0, 8.0):
        report = match_condition(si_correlated, ChannelSpec(power=p, noise_var=1.0))
        assert report.gap >= -1e-9


def test_matching_trivial_when_theta_w_uncorrelated(si_uncorrelated):
    ch = ChannelSpec(power=1.0, noise_var=1.0)
    assert find_matched_rho_xw(si_uncorrelated, ch) == 0.0


def test_no_root_raises():
    with pytest.raises(NoRoot):
        find_matched_rho_xw(NO_ROOT_MODEL, NO_ROOT_CHANNEL)


def test_feasible_interval_brackets_positive_definiteness():
    m = SideInfoModel(1.0, 0.2, 1.0, 0.0, -0.3, 1.0)
    lo, hi = feasible_rho_xw_interval(m)
    assert lo < hi
    for rho, ok in ((lo + 1e-6, True), (hi - 1e-6, True), (lo - 1e-3, False), (hi + 1e-3, False)):
        cov = replace(m, rho_x_w=rho).covariance()
        assert bool(np.linalg.eigvalsh(cov).min() > 0.0) is ok


def test_feasible_interval_can_be_empty():
    # theta-W minor is negative: no rho_x_w restores positive definiteness
    broken = SideInfoModel(1.0, 0.2, 0.5, 0.0, 0.8, 1.0)
    with pytest.raises(InfeasibleInterval):
        feasible_rho_xw_interval(broken)


def test_bound_hit_warns():
    tight = SideInfoModel(1.0, 0.2, 1.0, 0.4, -0.3, 1.0)
    import stratcomm.side_info as si_mod

    original = si_mod.SEARCH_BOUND
    si_mod.SEARCH_BOUND = 0.2
    try:
        with pytest.warns(BoundHit):
            solve_noiseless_si(tight)
    finally:
        si_mod.SEARCH_BOUND = original


def test_si_rate_validates_noise():
    m = SideInfoModel(1.0, 0.2, 1.0, 0.4, -0.3, 1.0)
    assert si_rate(m, 0.5, math.inf) == 0.0
    with pytest.raises(ZeroRate):
        si_rate(m, 0.5, 0.0)


def test_match_sweep_brackets_the_root(tmp_path):
    model = SideInfoModel(
        sigma_x2=1.0,
        rho_x_theta=0.0,
        r_theta=1.0,
        rho_x_w=0.0,
        rho_theta_w=-0.30,
        r_w=1.0,
    )
    ch = ChannelSpec(power=3.0, noise_var=1.0)
    header, rows = match_sweep(model, ch, points=21)
    assert header == ("rho_x_w", "rate_bits", "beta", "residual", "gap")
    assert len(rows) == 21
    lo, hi = feasible_rho_xw_interval(model)
    assert all(lo < row[0] < hi for row in rows)
    assert all(row[1] == pytest.approx(1.0, abs=1e-12) for row in rows)  # capacity
    assert all(row[4] >= -1e-9 for row in rows)
    # the diagnostic dips toward zero near the matched geometry and not at
    # the interval ends
    root = find_matched_rho_xw(model, ch)
    residuals = [row[3] for row in rows]
    nearest = min(rows, key=lambda row: abs(row[0] - root))
    assert nearest[3] < residuals[0] / 3.0
    assert nearest[3] < residuals[-1] / 3.0

    path = tmp_path / "matching.csv"
    match_sweep_csv(model, ch, str(path), points=21)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "rho_x_w,rate_bits,beta,residual,gap"
    parsed = [tuple(float(c) for c in line.split(",")) for line in lines[1:]]
    assert parsed == [tuple(row) for row in rows]


def test_match_sweep_validates_grid():
    model = SideInfoModel(1.0, 0.2, 1.0, 0.0, -0.3, 1.0)
    with pytest.raises(ValueError):
        match_sweep(model, ChannelSpec(power=1.0, noise_var=1.0), points=1)
