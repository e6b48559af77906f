"""Rate-limited disclosure: the strategic rate-distortion curve.

The transmitter commits to a forward test channel Y = X + beta*theta + S
with S ~ N(0, sigma_s2) independent of the source; the receiver sees Y at
mutual-information rate R and best-responds with the conditional mean.  For
a fixed rate the optimal theta-weight beta is the same root that solves the
unconstrained game, so the whole curve is swept by scaling sigma_s2 alone.
Rates are in bits throughout; use :func:`bits_to_nats` / :func:`nats_to_bits`
at the boundary if another unit is needed.

The module also carries two model-free evaluators used to validate the
Gaussian closed forms: exact mutual-information/cost accounting on finite
instances, and optimal scalar quantizers (Lloyd iteration) whose simulated
performance must land between neighboring points of the curve.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri

from ._csvio import write_rows
from .equilibrium import best_alpha
from .errors import InvalidDistribution, ZeroRate
from .gausslin import (
    CostPair,
    LinearScheme,
    SourcePairModel,
    best_decoder,
    require_valid,
)
from . import simkit

_LN2 = math.log(2.0)


def bits_to_nats(rate_bits: float) -> float:
    return rate_bits * _LN2


def nats_to_bits(rate_nats: float) -> float:
    return rate_nats / _LN2


@dataclass(frozen=True)
class RdPoint:
    """One point of the strategic rate-distortion curve.

    ``sigma_s2`` is +inf at rate 0 (no information crosses the channel);
    recomputing the rate from (beta, sigma_s2) reproduces ``rate``.
    """

    rate: float
    costs: CostPair
    beta: float
    sigma_s2: float


def _effective_var_ratio(model: SourcePairModel, beta: float) -> float:
    # Var(X + beta*theta) / sigma_x2
    return 1.0 + beta**2 * model.r + 2.0 * beta * model.rho


def rd_test_channel(model: SourcePairModel, rate: float) -> tuple[float, float]:
    """Optimal test channel (beta, sigma_s2) at a strictly positive rate.

    beta does not depend on the rate; sigma_s2 is set so the mutual
    information I(X, theta; Y) equals ``rate`` bits exactly.
    """
    require_valid(model)
    if rate <= 0.0:
        raise ZeroRate(f"rate must be positive, got {rate!r}")
    beta = best_alpha(model)
    b = _effective_var_ratio(model, beta)
    sigma_s2 = model.sigma_x2 * b / (2.0 ** (2.0 * rate) - 1.0)
    return beta, sigma_s2


def rate_of_test_channel(model: SourcePairModel, beta: float, sigma_s2: float) -> float:
    """Mutual information I(X, theta; Y) in bits for a given test channel."""
    require_valid(model)
    if sigma_s2 <= 0.0:
        raise ZeroRate("sigma_s2 must be positive (use +inf for the zero-rate point)")
    b = _effective_var_ratio(model, beta)
    return 0.5 * math.log2(1.0 + model.sigma_x2 * b / sigma_s2)


def rd_point(model: SourcePairModel, rate: float) -> RdPoint:
    """Costs on the strategic rate-distortion curve at ``rate`` bits.

    Rate 0 returns the no-information point exactly.  For positive rates
    the costs are evaluated by covariance propagation of the test channel
    under best-response decoding.
    """
    require_valid(model)
    if rate < 0.0:
        raise ZeroRate(f"rate must be nonnegative, got {rate!r}")
    if rate == 0.0:
        from .gausslin import no_information_costs

        return RdPoint(
            rate=0.0,
            costs=no_information_costs(model),
            beta=best_alpha(model),
            sigma_s2=math.inf,
        )
    beta, sigma_s2 = rd_test_channel(model, rate)
    scheme = LinearScheme(enc_gain=1.0, enc_theta_weight=beta, enc_noise_var=sigma_s2)
    _, costs = best_decoder(model, scheme, channel_noise_var=0.0)
    return RdPoint(rate=rate, costs=costs, beta=beta, sigma_s2=sigma_s2)


def rd_sweep(model: SourcePairModel, rates: np.ndarray) -> list[RdPoint]:
    """Evaluate the curve on a rate grid, preserving grid order."""
    return [rd_point(model, float(rate)) for rate in np.asarray(rates, float)]


def rd_sweep_csv(model: SourcePairModel, rates: np.ndarray, path: str) -> None:
    """Write the curve as CSV: rate_bits, d_e, d_d, beta, sigma_s2.

    Floats are repr-exact so re-reading a row reproduces it; a zero-rate
    row carries sigma_s2 = inf.
    """
    rows = [
        (p.rate, p.costs.d_e, p.costs.d_d, p.beta, p.sigma_s2)
        for p in rd_sweep(model, rates)
    ]
    write_rows(path, ("rate_bits", "d_e", "d_d", "beta", "sigma_s2"), rows)


# ---------------------------------------------------------------------------
# Finite instances: exact information/cost accounting with no Gaussian
# assumptions, used as an independent check of the closed forms above.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiscreteInstance:
    """A finite source pair with a finite noisy observation channel.

    ``joint_pmf[i, j]`` is P(X = x_i, theta = t_j); ``channel[i, j, k]`` is
    P(Y = y_k | X = x_i, theta = t_j); ``recon_grid`` lists the candidate
    reconstruction values.
    """

    joint_pmf: np.ndarray
    channel: np.ndarray
    recon_grid: np.ndarray


def validate_instance(inst: DiscreteInstance) -> None:
    pmf = np.asarray(inst.joint_pmf, float)
    channel = np.asarray(inst.channel, float)
    if pmf.ndim != 2:
        raise InvalidDistribution("joint_pmf: must be a 2-D table over (X, theta)")
    if channel.ndim != 3 or channel.shape[:2] != pmf.shape:
        raise InvalidDistribution("channel: must have shape (n_x, n_theta, n_y)")
    if (pmf < 0).any():
        raise InvalidDistribution("joint_pmf: negative mass")
    if abs(pmf.sum() - 1.0) > 1e-12:
        raise InvalidDistribution(f"joint_pmf: sums to {pmf.sum()!r}, not 1")
    if (channel < 0).any():
        raise InvalidDistribution("channel: negative probability")
    rows = channel.sum(axis=2)
    if np.abs(rows - 1.0).max() > 1e-12:
        raise InvalidDistribution("channel: each conditional row must sum to 1")
    if np.asarray(inst.recon_grid).ndim != 1 or len(inst.recon_grid) == 0:
        raise InvalidDistribution("recon_grid: must be a nonempty vector")


def quadratic_tables(
    x_grid: np.ndarray, theta_grid: np.ndarray, recon_grid: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Quadratic distortion tables for a finite instance.

    Returns (d_e, d_d) with d_e[i, j, k] = (x_i + t_j - c_k)^2 and
    d_d[i, k] = (x_i - c_k)^2.
    """
    x = np.asarray(x_grid, float)
    t = np.asarray(theta_grid, float)
    c = np.asarray(recon_grid, float)
    d_e = (x[:, None, None] + t[None, :, None] - c[None, None, :]) ** 2
    d_d = (x[:, None] - c[None, :]) ** 2
    return d_e, d_d


def discrete_triple(
    inst: DiscreteInstance,
    decoder: np.ndarray,
    d_e: np.ndarray,
    d_d: np.ndarray,
) -> tuple[float, CostPair]:
    """Exact (rate, costs) of a decoder on a finite instance.

    The rate is the mutual information I(X, theta; Y) in bits with the
    convention 0*log 0 = 0; the costs are exact expectations of the given
    distortion tables under the decoder map y -> recon index.
    """
    validate_instance(inst)
    pmf = np.asarray(inst.joint_pmf, float)
    channel = np.asarray(inst.channel, float)
    n_y = channel.shape[2]
    decoder = np.asarray(decoder)
    if decoder.shape != (n_y,) or not np.issubdtype(decoder.dtype, np.integer):
        raise ValueError("decoder: must map every Y index to a recon index")
    if decoder.min() < 0 or decoder.max() >= len(inst.recon_grid):
        raise ValueError("decoder: reconstruction index out of range")

    p_xty = pmf[:, :, None] * channel
    joint = p_xty.reshape(-1, n_y)
    p_source = joint.sum(axis=1)
    p_y = joint.sum(axis=0)
    mask = joint > 0.0
    denom = np.outer(p_source, p_y)
    mi = float(np.sum(joint[mask] * np.log2(joint[mask] / denom[mask])))

    cost_e = float(np.sum(p_xty * np.asarray(d_e, float)[:, :, decoder]))
    cost_d = float(np.sum(p_xty.sum(axis=1) * np.asarray(d_d, float)[:, decoder]))
    return mi, CostPair(d_e=cost_e, d_d=cost_d)


def discrete_best_response(inst: DiscreteInstance, d_d: np.ndarray) -> np.ndarray:
    """Receiver's exact best response on a finite instance.

    For every observable y the reconstruction minimizing the posterior
    expected d_d is chosen; ties resolve to the smallest reconstruction
    index, and zero-probability observations get the prior-optimal
    reconstruction.
    """
    validate_instance(inst)
    pmf = np.asarray(inst.joint_pmf, float)
    channel = np.asarray(inst.channel, float)
    d_d = np.asarray(d_d, float)
    p_xy = np.einsum("ij,ijk->ik", pmf, channel)
    cost = d_d.T @ p_xy  # (n_recon, n_y)
    decoder = np.argmin(cost, axis=0)
    p_y = p_xy.sum(axis=0)
    if (p_y == 0.0).any():
        prior_cost = d_d.T @ pmf.sum(axis=1)
        decoder = np.where(p_y == 0.0, int(np.argmin(prior_cost)), decoder)
    return decoder.astype(np.intp)


# ---------------------------------------------------------------------------
# Optimal scalar quantizers for Gaussian sources.
# ---------------------------------------------------------------------------


def _phi(z: np.ndarray) -> np.ndarray:
    return np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)


def _z_phi(z: np.ndarray) -> np.ndarray:
    # z * pdf(z) with the correct 0 limit at +-inf
    out = np.where(np.isinf(z), 0.0, z * _phi(np.where(np.isinf(z), 0.0, z)))
    return out


@dataclass(frozen=True)
class LloydMaxQuantizer:
    """Fixed point of the Lloyd iteration for a zero-mean Gaussian source."""

    thresholds: np.ndarray  # interior cell boundaries, ascending
    centroids: np.ndarray  # reconstruction levels, ascending
    source_var: float
    mse: float
    iterations: int

    def index(self, values: np.ndarray) -> np.ndarray:
        return np.searchsorted(self.thresholds, np.asarray(values, float))

    def quantize(self, values: np.ndarray) -> np.ndarray:
        return self.centroids[self.index(values)]

    def as_dict(self) -> dict:
        return {
            "levels": int(len(self.centroids)),
            "source_var": float(self.source_var),
            "mse": float(self.mse),
            "thresholds": [float(v) for v in self.thresholds],
            "centroids": [float(v) for v in self.centroids],
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True)


def lloyd_max(
    levels: int,
    source_var: float,
    residual_tol: float = 1e-10,
    max_iterations: int = 200_000,
) -> LloydMaxQuantizer:
    """Optimal ``levels``-point scalar quantizer for N(0, source_var).

    Plain Lloyd iteration on exact truncated-Gaussian moments: thresholds
    at centroid midpoints, centroids at cell conditional means, iterated to
    a fixed-point residual below ``residual_tol`` (standard-deviation
    units).  The result is exactly symmetric about 0 by construction.
    """
    if not 2 <= levels <= 4096:
        raise ValueError("levels: must lie in [2, 4096]")
    if source_var <= 0.0:
        raise ValueError("source_var: must be positive")
    # Work in standard units, rescale at the end.
    centroids = ndtri((np.arange(levels) + 0.5) / levels)
    iterations = 0
    for iterations in range(1, max_iterations + 1):
        thresholds = 0.5 * (centroids[1:] + centroids[:-1])
        lo = np.concatenate(([-np.inf], thresholds))
        hi = np.concatenate((thresholds, [np.inf]))
        mass = ndtr(hi) - ndtr(lo)
        first = _phi(lo) - _phi(hi)  # pdf(+-inf) is exactly 0
        new_centroids = first / mass
        new_centroids = 0.5 * (new_centroids - new_centroids[::-1])
        residual = float(np.max(np.abs(new_centroids - centroids)))
        centroids = new_centroids
        if residual <= residual_tol:
            break
    else:  # pragma: no cover - defensive
        raise RuntimeError("Lloyd iteration did not converge")

    thresholds = 0.5 * (centroids[1:] + centroids[:-1])
    lo = np.concatenate(([-np.inf], thresholds))
    hi = np.concatenate((thresholds, [np.inf]))
    mass = ndtr(hi) - ndtr(lo)
    first = _phi(lo) - _phi(hi)
    second = (ndtr(hi) - _z_phi(hi)) - (ndtr(lo) - _z_phi(lo))
    mse_std = float(np.sum(second - 2.0 * centroids * first + centroids**2 * mass))

    sd = math.sqrt(source_var)
    return LloydMaxQuantizer(
        thresholds=thresholds * sd,
        centroids=centroids * sd,
        source_var=float(source_var),
        mse=mse_std * source_var,
        iterations=iterations,
    )


@dataclass(frozen=True)
class EmpiricalTriple:
    """Simulated (rate, costs) of a concrete scalar codec."""

    rate_bits: float
    costs: CostPair
    stderr_e: float
    stderr_d: float


def empirical_triple(
    model: SourcePairModel,
    levels: int,
    n: int,
    seed: int,
    chunk: int = 2**16,
) -> EmpiricalTriple:
    """Simulate an achievable codec: quantize X + beta*theta, decode linearly.

    The effective signal V = X + beta*theta is quantized with the optimal
    ``levels``-point quantizer; the receiver plays the per-cell conditional
    mean of X, which for jointly Gaussian (X, V) is the linear factor
    Cov(X,V)/Var(V) times the cell centroid (truncated-moment identity).
    The resulting point is achievable at rate log2(levels), so it must lie
    on or above the strategic rate-distortion curve.
    """
    require_valid(model)
    if n < 10_000:
        raise ValueError("n: need at least 10000 samples")
    beta = best_alpha(model)
    b = _effective_var_ratio(model, beta)
    var_v = model.sigma_x2 * b
    quant = lloyd_max(levels, var_v)
    kappa = (1.0 + beta * model.rho) / b  # Cov(X, V) / Var(V)

    table = simkit.sample(model, simkit.SimConfig(seed=seed, n=n, chunk=chunk))
    x = table.column("X")
    theta = table.column("theta")
    v = x + beta * theta
    xhat = kappa * quant.quantize(v)
    sq_e = (x + theta - xhat) ** 2
    sq_d = (x - xhat) ** 2
    return EmpiricalTriple(
        rate_bits=math.log2(levels),
        costs=CostPair(d_e=float(sq_e.mean()), d_d=float(sq_d.mean())),
        stderr_e=float(sq_e.std(ddof=1) / math.sqrt(n)),
        stderr_d=float(sq_d.std(ddof=1) / math.sqrt(n)),
    )
