"""The game over an average-power-limited additive white Gaussian channel.

Uncoded linear transmission is optimal here: the transmitter scales the
noiseless equilibrium signal X + alpha*theta to meet the power budget
exactly, and the achieved encoder cost coincides with the strategic
rate-distortion bound evaluated at the channel capacity.  The matching is
exact (inner and outer bounds meet), which the tests verify to tight
tolerance on sampled models.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .equilibrium import best_alpha
from .gausslin import CostPair, LinearScheme, SourcePairModel, best_decoder, require_valid
from .strategic_rd import rd_point


@dataclass(frozen=True)
class ChannelSpec:
    """Average transmit power budget and channel noise variance."""

    power: float
    noise_var: float


def validate_channel(ch: ChannelSpec) -> None:
    if not (math.isfinite(ch.power) and ch.power > 0.0):
        raise ValueError("power: must be positive and finite")
    if not (math.isfinite(ch.noise_var) and ch.noise_var > 0.0):
        raise ValueError("noise_var: must be positive and finite")


def capacity(ch: ChannelSpec) -> float:
    """Channel capacity 0.5*log2(1 + power/noise_var) in bits."""
    validate_channel(ch)
    return 0.5 * math.log2(1.0 + ch.power / ch.noise_var)


def solve_noisy(model: SourcePairModel, ch: ChannelSpec) -> tuple[LinearScheme, CostPair]:
    """Equilibrium over the power-limited channel.

    The theta-weight is channel-independent (identical to the noiseless
    equilibrium); only the gain depends on the budget, saturating it:
    E{U^2} = power exactly.  Costs are exact covariance propagation with
    the best-response decoder.
    """
    require_valid(model)
    validate_channel(ch)
    alpha = best_alpha(model)
    b = 1.0 + 2.0 * alpha * model.rho + alpha**2 * model.r
    gain = math.sqrt(ch.power / (model.sigma_x2 * b))
    encoder = LinearScheme(enc_gain=gain, enc_theta_weight=alpha)
    solved, costs = best_decoder(model, encoder, channel_noise_var=ch.noise_var)
    return solved, costs


def opta_bound(model: SourcePairModel, ch: ChannelSpec) -> float:
    """Best encoder cost attainable by any coding scheme over this channel.

    Source-channel separation gives the outer bound: the strategic
    rate-distortion cost at the channel capacity.  :func:`solve_noisy`
    achieves it, so the bound is tight.
    """
    return rd_point(model, capacity(ch)).costs.d_e


@dataclass(frozen=True)
class PowerSweepRow:
    p_over_n: float
    capacity_bits: float
    d_e: float
    d_d: float
    gain: float


def power_sweep(
    model: SourcePairModel, p_over_n_values, noise_var: float = 1.0
) -> list[PowerSweepRow]:
    """Evaluate the noisy equilibrium across transmit-power budgets."""
    rows = []
    for ratio in p_over_n_values:
        ch = ChannelSpec(power=float(ratio) * noise_var, noise_var=noise_var)
        scheme, costs = solve_noisy(model, ch)
        rows.append(
            PowerSweepRow(
                p_over_n=float(ratio),
                capacity_bits=capacity(ch),
                d_e=costs.d_e,
                d_d=costs.d_d,
                gain=scheme.enc_gain,
            )
        )
    return rows
