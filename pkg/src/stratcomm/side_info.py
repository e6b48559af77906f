"""Receiver side information: equilibria, rate limits, and exact matching.

The receiver observes W jointly Gaussian with (X, theta) in addition to the
transmitted signal.  Three structural facts drive this module, each verified
numerically elsewhere in the package:

* side information at the transmitter is worthless: adding any multiple of W
  to the transmitted signal leaves both equilibrium costs unchanged, because
  the receiver can subtract it exactly;
* under a rate limit the relevant information measure is
  I(X, theta; Y) - I(Y; W), i.e. only the part of Y not predictable from W
  costs rate; eliminating the test-channel noise through that measure makes
  the rate enter the encoder cost only as a beta-free multiplier, so the
  minimizing theta-weight does not move with the rate (the noise variance
  carries all of the rate dependence);
* over a noisy channel, uncoded linear transmission is exactly optimal iff
  the source-to-W geometry satisfies a single scalar matching condition,
  found here by a bracketed root search.

Encoder weights are searched on a bounded interval (default [-10, 10]) with
a dense grid followed by golden-section refinement; hitting the bound emits
a :class:`BoundHit` warning rather than failing.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from ._csvio import write_rows
from ._optim import grid_then_golden, parabolic_polish
from .errors import InfeasibleInterval, NoRoot, ZeroRate
from .gausslin import (
    CostPair,
    LinearScheme,
    SideInfoModel,
    best_decoder,
    require_valid,
)
from .noisy_channel import ChannelSpec, capacity, validate_channel

SEARCH_BOUND = 10.0
_GRID_POINTS = 2001
_REFINE_TOL = 1e-10


class BoundHit(UserWarning):
    """An encoder-weight search ended on the boundary of its interval."""


@dataclass(frozen=True)
class SiEquilibriumReport:
    """Noiseless equilibrium with receiver side information."""

    alpha_si: float
    dec_y: float
    dec_w: float
    costs: CostPair


@dataclass(frozen=True)
class SiRdPoint:
    """One point of the rate-limited curve with side information."""

    rate: float
    beta: float
    sigma_s2: float
    costs: CostPair


@dataclass(frozen=True)
class InvarianceReport:
    """Costs of the equilibrium encoder augmented by b*W, per b."""

    b_values: tuple[float, ...]
    costs: tuple[CostPair, ...]
    max_abs_deviation: float


@dataclass(frozen=True)
class MatchReport:
    rate: float
    beta: float
    residual: float
    matched: bool
    gap: float


def _params(m: SideInfoModel) -> tuple[float, float, float, float, float, float]:
    return (m.sigma_x2, m.rho_x_theta, m.r_theta, m.rho_x_w, m.rho_theta_w, m.r_w)


def _test_channel_costs(m: SideInfoModel, beta, sigma_s2):
    """Vectorized (d_e, d_d) of Y = X + beta*theta + S with decoding on (Y, W).

    Explicit 2x2 normal equations so whole search grids evaluate at once.
    Array-shaped ``beta``/``sigma_s2`` broadcast; the final reported numbers
    always come from the exact scalar path in :mod:`stratcomm.gausslin`.
    """
    s2, rxt, rt, rxw, rtw, rw = _params(m)
    beta = np.asarray(beta, float)
    ss = np.asarray(sigma_s2, float)
    b0 = 1.0 + beta**2 * rt + 2.0 * beta * rxt
    q = rxw + beta * rtw
    var_y = b0 + ss / s2
    det = var_y * rw - q * q
    p = 1.0 + beta * rxt
    w_y = (p * rw - q * rxw) / det
    w_w = (var_y * rxw - q * p) / det
    d_d = s2 * (1.0 - (w_y * p + w_w * rxw))
    p_theta = rxt + beta * rt
    e_theta_err = s2 * (rxt - (w_y * p_theta + w_w * rtw))
    d_e = d_d + 2.0 * e_theta_err + s2 * rt
    return d_e, d_d


def _conditional_signal_ratio(m: SideInfoModel, beta) -> np.ndarray:
    """Var(X + beta*theta | W) / sigma_x2; strictly positive for valid models."""
    _, rxt, rt, rxw, rtw, rw = _params(m)
    beta = np.asarray(beta, float)
    b0 = 1.0 + beta**2 * rt + 2.0 * beta * rxt
    q = rxw + beta * rtw
    return np.maximum(b0 - q * q / rw, 0.0)


def solve_noiseless_si(m: SideInfoModel) -> SiEquilibriumReport:
    """Equilibrium over encoders Y = X + alpha*theta with decoding on (Y, W).

    Encoder noise is not injected (it is strictly harmful, as in the no-W
    game); the scalar weight is found by grid-plus-golden search of the
    exact encoder cost.
    """
    require_valid(m)

    def d_e_grid(alphas: np.ndarray) -> np.ndarray:
        return _test_channel_costs(m, alphas, np.zeros_like(alphas))[0]

    def d_e_scalar(alpha: float) -> float:
        return float(_test_channel_costs(m, alpha, 0.0)[0])

    alpha, _, hit = grid_then_golden(
        d_e_scalar, -SEARCH_BOUND, SEARCH_BOUND, _GRID_POINTS, _REFINE_TOL, f_grid=d_e_grid
    )
    if hit:
        warnings.warn(
            f"encoder weight search ended at the bound +-{SEARCH_BOUND}", BoundHit
        )
    else:
        alpha, _ = parabolic_polish(d_e_scalar, alpha, -SEARCH_BOUND, SEARCH_BOUND)
    scheme = LinearScheme(enc_gain=1.0, enc_theta_weight=alpha)
    solved, costs = best_decoder(m, scheme, channel_noise_var=0.0)
    return SiEquilibriumReport(
        alpha_si=alpha,
        dec_y=solved.dec_y_weight,
        dec_w=solved.dec_w_weight,
        costs=costs,
    )


def transmitter_si_invariance(m: SideInfoModel, b_values) -> InvarianceReport:
    """Show that transmitting b*W alongside the signal changes nothing.

    For each b the encoder sends X + alpha_si*theta + b*W and the receiver
    best-responds on (Y, W); the costs are compared against b = 0.  The
    deviation is zero in exact arithmetic because the receiver can cancel
    the W component of Y before decoding.
    """
    report = solve_noiseless_si(m)
    base = LinearScheme(enc_gain=1.0, enc_theta_weight=report.alpha_si)
    costs = []
    for b in b_values:
        _, pair = best_decoder(m, replace(base, enc_si_weight=float(b)), 0.0)
        costs.append(pair)
    ref = report.costs
    max_dev = 0.0
    for pair in costs:
        max_dev = max(max_dev, abs(pair.d_e - ref.d_e), abs(pair.d_d - ref.d_d))
    return InvarianceReport(
        b_values=tuple(float(b) for b in b_values),
        costs=tuple(costs),
        max_abs_deviation=float(max_dev),
    )


def si_rate(m: SideInfoModel, beta: float, sigma_s2: float) -> float:
    """Effective rate I(X, theta; Y) - I(Y; W) of a test channel, in bits.

    Equals 0.5*log2(Var(Y | W) / sigma_s2): only the component of Y that the
    receiver cannot already predict from W consumes rate.  Passing
    sigma_s2 = +inf returns 0.
    """
    require_valid(m)
    if not sigma_s2 > 0.0:
        raise ZeroRate("sigma_s2 must be positive (use +inf for the zero-rate point)")
    if math.isinf(sigma_s2):
        return 0.0
    ratio = float(_conditional_signal_ratio(m, beta)) * m.sigma_x2 / sigma_s2
    return 0.5 * math.log2(1.0 + ratio)


def _sigma_s2_for_rate(m: SideInfoModel, beta, rate: float):
    """Noise variance putting the test channel exactly at ``rate`` bits."""
    t = 2.0 ** (2.0 * rate) - 1.0
    return m.sigma_x2 * _conditional_signal_ratio(m, beta) / t


def beta_of_rate(m: SideInfoModel, rate: float) -> tuple[float, float]:
    """Optimal (beta, sigma_s2) of the rate-limited game with side information.

    For every candidate beta the test-channel noise variance is pinned by
    the rate constraint and the exact encoder cost is minimized over beta
    by search.  Because the pinned noise is proportional to Var(Y | W),
    the search lands on the same weight at every rate (the zero-noise
    weight of :func:`solve_noiseless_si`); the returned sigma_s2 is where
    the rate actually bites.
    """
    require_valid(m)
    if rate <= 0.0:
        raise ZeroRate(f"rate must be positive, got {rate!r}")

    def d_e_grid(betas: np.ndarray) -> np.ndarray:
        ss = _sigma_s2_for_rate(m, betas, rate)
        return _test_channel_costs(m, betas, ss)[0]

    def d_e_scalar(beta: float) -> float:
        ss = float(_sigma_s2_for_rate(m, beta, rate))
        return float(_test_channel_costs(m, beta, ss)[0])

    beta, _, hit = grid_then_golden(
        d_e_scalar, -SEARCH_BOUND, SEARCH_BOUND, _GRID_POINTS, _REFINE_TOL, f_grid=d_e_grid
    )
    if hit:
        warnings.warn(
            f"theta-weight search ended at the bound +-{SEARCH_BOUND}", BoundHit
        )
    else:
        beta, _ = parabolic_polish(d_e_scalar, beta, -SEARCH_BOUND, SEARCH_BOUND)
    return beta, float(_sigma_s2_for_rate(m, beta, rate))


def si_rd_point(m: SideInfoModel, rate: float) -> SiRdPoint:
    """Costs of the rate-limited game at ``rate`` bits.

    Rate 0 returns the W-only point: the receiver estimates from side
    information alone.  For positive rates the solved test channel is
    re-evaluated through the exact covariance path.
    """
    require_valid(m)
    if rate < 0.0:
        raise ZeroRate(f"rate must be nonnegative, got {rate!r}")
    if rate == 0.0:
        _, costs = best_decoder(m, LinearScheme(enc_gain=0.0), 0.0)
        return SiRdPoint(rate=0.0, beta=0.0, sigma_s2=math.inf, costs=costs)
    beta, sigma_s2 = beta_of_rate(m, rate)
    scheme = LinearScheme(enc_gain=1.0, enc_theta_weight=beta, enc_noise_var=sigma_s2)
    _, costs = best_decoder(m, scheme, channel_noise_var=0.0)
    return SiRdPoint(rate=rate, beta=beta, sigma_s2=sigma_s2, costs=costs)


def solve_noisy_si_linear(m: SideInfoModel, ch: ChannelSpec) -> tuple[LinearScheme, CostPair]:
    """Uncoded linear transmission over the noisy channel, with W decoding.

    Scales the noiseless-equilibrium signal X + alpha_si*theta to the power
    budget.  In general this is an achievable scheme, not the optimum; it is
    exactly optimal when the matching condition of
    :func:`match_condition` holds.
    """
    require_valid(m)
    validate_channel(ch)
    report = solve_noiseless_si(m)
    alpha = report.alpha_si
    b0 = 1.0 + 2.0 * alpha * m.rho_x_theta + alpha**2 * m.r_theta
    gain = math.sqrt(ch.power / (m.sigma_x2 * b0))
    encoder = LinearScheme(enc_gain=gain, enc_theta_weight=alpha)
    solved, costs = best_decoder(m, encoder, channel_noise_var=ch.noise_var)
    return solved, costs


def match_condition(m: SideInfoModel, ch: ChannelSpec, tol: float = 1e-6) -> MatchReport:
    """Test whether uncoded linear transmission is exactly optimal here.

    At the channel-capacity rate R the optimal test channel has
    theta-weight beta(R); linear transmission is optimal iff the signal
    X + beta(R)*theta is uncorrelated with W, i.e. the residual
    |rho_x_w + rho_theta_w * beta(R)| vanishes.  ``gap`` reports the
    achieved minus bound encoder cost, which is nonnegative always and
    zero exactly at matched geometries.
    """
    rate = capacity(ch)
    beta, _ = beta_of_rate(m, rate)
    residual = abs(m.rho_x_w + m.rho_theta_w * beta)
    _, lin_costs = solve_noisy_si_linear(m, ch)
    bound = si_rd_point(m, rate)
    gap = lin_costs.d_e - bound.costs.d_e
    return MatchReport(
        rate=rate,
        beta=beta,
        residual=float(residual),
        matched=bool(residual <= tol),
        gap=float(gap),
    )


def match_sweep(
    m: SideInfoModel, ch: ChannelSpec, points: int = 51
) -> tuple[tuple[str, ...], list[tuple]]:
    """Matching diagnostic on a grid across the feasible rho_x_w range.

    Returns (header, rows) with columns rho_x_w, rate_bits, beta, residual,
    gap; the grid covers the interior of the feasibility interval (the
    endpoints themselves are singular and excluded).
    """
    if points < 2:
        raise ValueError(f"points: need at least two grid points, got {points!r}")
    validate_channel(ch)
    lo, hi = feasible_rho_xw_interval(m)
    grid = np.linspace(lo, hi, points + 2)[1:-1]
    rows = []
    for value in grid:
        report = match_condition(replace(m, rho_x_w=float(value)), ch)
        rows.append((float(value), report.rate, report.beta, report.residual, report.gap))
    return ("rho_x_w", "rate_bits", "beta", "residual", "gap"), rows


def match_sweep_csv(m: SideInfoModel, ch: ChannelSpec, path: str, points: int = 51) -> None:
    """Write :func:`match_sweep` rows as a repr-exact CSV file."""
    header, rows = match_sweep(m, ch, points)
    write_rows(path, header, rows)


def feasible_rho_xw_interval(m: SideInfoModel) -> tuple[float, float]:
    """Open interval of rho_x_w keeping the model positive definite.

    All other entries are held fixed.  The determinant of the normalized
    covariance is a downward parabola in rho_x_w, so feasibility is the
    interval between its roots.
    """
    _, rxt, rt, _, rtw, rw = _params(m)
    a = -rt
    b = 2.0 * rxt * rtw
    c = rt * rw - rtw**2 - rxt**2 * rw
    disc = b * b - 4.0 * a * c
    if disc <= 0.0:
        raise InfeasibleInterval(
            "no value of rho_x_w makes the covariance positive definite"
        )
    root = math.sqrt(disc)
    lo = (-b + root) / (2.0 * a)  # a < 0: this is the smaller root
    hi = (-b - root) / (2.0 * a)
    return lo, hi


def find_matched_rho_xw(m: SideInfoModel, ch: ChannelSpec, f_tol: float = 1e-8) -> float:
    """Solve the matching condition for rho_x_w by bisection.

    Treats rho_x_w as free (the given model supplies every other entry) and
    finds the fixed point rho = -rho_theta_w * beta(R; rho) at the
    channel-capacity rate.  Raises :class:`NoRoot` when the residual does
    not change sign across the feasible interval.
    """
    validate_channel(ch)
    if m.rho_theta_w == 0.0:
        return 0.0
    rate = capacity(ch)
    lo, hi = feasible_rho_xw_interval(m)
    pad = 1e-9 * max(hi - lo, 1.0)
    lo, hi = lo + pad, hi - pad
    if not lo < hi:
        raise InfeasibleInterval("feasible rho_x_w interval is empty after shrinking")

    def residual(rho: float) -> float:
        model = replace(m, rho_x_w=rho)
        beta, _ = beta_of_rate(model, rate)
        return rho + m.rho_theta_w * beta

    f_lo, f_hi = residual(lo), residual(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if math.copysign(1.0, f_lo) == math.copysign(1.0, f_hi):
        raise NoRoot(
            f"matching residual has the same sign at both ends of "
            f"[{lo:.6g}, {hi:.6g}] ({f_lo:.3g}, {f_hi:.3g})"
        )
    mid, f_mid = lo, f_lo
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = residual(mid)
        if abs(f_mid) <= f_tol:
            return mid
        if math.copysign(1.0, f_mid) == math.copysign(1.0, f_lo):
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
        if hi - lo < 1e-14:
            break
    if abs(f_mid) <= f_tol:
        return mid
    raise NoRoot(f"bisection stalled with residual {f_mid:.3g} > {f_tol:.3g}")
