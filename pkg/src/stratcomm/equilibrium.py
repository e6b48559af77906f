"""Leader-follower equilibrium of the noiseless signaling game.

The transmitter commits to a disclosure rule before the receiver moves, the
receiver best-responds with the conditional mean, and both costs are
quadratic.  Within linear rules Y = X + alpha*theta + T the transmitter's
problem reduces to maximizing a single rational function of alpha (the
alignment term E{(2*theta + X) * Xhat}); its stationary points are the two
roots of a quadratic, and the equilibrium picks the root with the larger
objective.  Injecting encoder noise (T) only hurts, so the equilibrium is
deterministic and linear.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt
from typing import Iterable, Sequence

from .errors import DegenerateDenominator
from .gausslin import (
    CostPair,
    LinearScheme,
    SourcePairModel,
    best_decoder,
    require_valid,
)

# Below this |r + rho| the closed-form root is evaluated by series to avoid
# 0/0 cancellation.
_SERIES_CUTOFF = 1e-6


@dataclass(frozen=True)
class EquilibriumReport:
    """Solved noiseless equilibrium.

    ``a_aux`` is the discriminant-root sqrt(1 + 4*(r + rho)) that appears
    throughout the closed forms; it is reported because downstream
    regression checks are written in terms of it.
    """

    alpha: float
    kappa: float
    costs: CostPair
    a_aux: float


@dataclass(frozen=True)
class LimitReport:
    """d_d evaluated along a model path, with an extrapolated limit."""

    d_d: tuple[float, ...]
    extrapolated: float


def objective_j(model: SourcePairModel, alpha: float, sigma_t2: float = 0.0) -> float:
    """Alignment term E{(2*theta + X) * Xhat} under best-response decoding.

    The transmitter's cost is E{(X + theta)^2} minus this quantity, so the
    equilibrium disclosure weight maximizes it.  Adding encoder noise
    ``sigma_t2`` only inflates the denominator, which is why the noiseless
    scheme is optimal.
    """
    require_valid(model)
    if sigma_t2 < 0.0:
        raise ValueError("sigma_t2: must be nonnegative")
    rho, r, s2 = model.rho, model.r, model.sigma_x2
    denom = 1.0 + r * alpha**2 + 2.0 * alpha * rho + sigma_t2 / s2
    if denom <= 1e-12:
        raise DegenerateDenominator(
            f"objective denominator {denom:.3g} is not positive at alpha={alpha!r}"
        )
    return s2 * (1.0 + alpha * rho) * (1.0 + 2.0 * alpha * r + alpha * rho + 2.0 * rho) / denom


def a_aux(model: SourcePairModel) -> float:
    """sqrt(1 + 4*(r + rho)); always real for valid models since r > rho^2."""
    return sqrt(1.0 + 4.0 * (model.r + model.rho))


def best_alpha(model: SourcePairModel) -> float:
    """Equilibrium disclosure weight.

    The stationarity condition has two roots (-1 +- sqrt(1+4*(r+rho))) /
    (2*(r+rho)); the winner is decided by explicit comparison of the
    objective, with ties broken toward the smaller |alpha|.  Near
    r + rho = 0 the quotient degenerates and the series
    1 - (r+rho) + 2*(r+rho)^2 is used instead.
    """
    require_valid(model)
    s = model.r + model.rho
    if abs(s) < _SERIES_CUTOFF:
        return 1.0 - s + 2.0 * s * s
    a = sqrt(1.0 + 4.0 * s)
    roots = ((-1.0 + a) / (2.0 * s), (-1.0 - a) / (2.0 * s))
    j0, j1 = (objective_j(model, root) for root in roots)
    if j0 > j1:
        return roots[0]
    if j1 > j0:
        return roots[1]
    return min(roots, key=abs)


def solve_noiseless(model: SourcePairModel) -> EquilibriumReport:
    """Full noiseless equilibrium: weights plus exact costs.

    Costs come from covariance propagation of the solved scheme, not from
    algebraic shortcut formulas; see :func:`analytic_costs` for the
    shortcut used as an independent regression check.
    """
    alpha = best_alpha(model)
    encoder = LinearScheme(enc_gain=1.0, enc_theta_weight=alpha)
    solved, costs = best_decoder(model, encoder, channel_noise_var=0.0)
    return EquilibriumReport(
        alpha=alpha,
        kappa=solved.dec_y_weight,
        costs=costs,
        a_aux=a_aux(model),
    )


def analytic_costs(model: SourcePairModel) -> CostPair:
    """Closed-form shortcut for the equilibrium costs.

    Derived independently of the covariance path, so the two routes
    cross-check each other.  Degenerates when r + rho approaches 0 or the
    d_d denominator vanishes; callers should stay away from those
    boundaries (the solver itself does not use this function).
    """
    require_valid(model)
    rho, r, s2 = model.rho, model.r, model.sigma_x2
    s = r + rho
    a = a_aux(model)
    if abs(a - 1.0) < 1e-9:
        raise DegenerateDenominator("shortcut forms degenerate as r + rho -> 0")
    denom = a * (2.0 * r + a * rho + rho)
    if abs(denom) < 1e-12:
        raise DegenerateDenominator("d_d shortcut denominator vanishes")
    d_e = s2 * (1.0 + (a - 3.0) * s / (a - 1.0))
    d_d = s2 * (r - rho**2) * (a - 1.0) / denom
    return CostPair(d_e=d_e, d_d=d_d)


def corollary_limits(models: Iterable[SourcePairModel] | Sequence[SourcePairModel]) -> LimitReport:
    """Evaluate d_d along a model path and extrapolate its limit.

    The path is whatever the caller parametrizes (growing r, rho -> 1,
    r -> rho^2, ...).  Aitken delta-squared acceleration is applied to the
    last three values when stable; otherwise the last value is reported.
    """
    values = tuple(solve_noiseless(m).costs.d_d for m in models)
    if not values:
        raise ValueError("models: need at least one model on the path")
    extrapolated = values[-1]
    if len(values) >= 3:
        x0, x1, x2 = values[-3], values[-2], values[-1]
        d1, d2 = x1 - x0, x2 - x1
        denom = d2 - d1
        # Accelerate only while the tail still contracts with a steady
        # sign (0 < d2/d1 < 1); anything else means the sequence is not
        # settling geometrically and the raw last value is safer.
        if abs(denom) > 1e-15 * max(1.0, abs(x2)) and d1 != 0.0:
            ratio = d2 / d1
            if 0.0 < ratio < 1.0:
                extrapolated = x2 - d2 * d2 / denom
    return LimitReport(d_d=values, extrapolated=float(extrapolated))
