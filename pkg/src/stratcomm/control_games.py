"""When is the optimal control signal linear?  Canonical quadratic games.

A control game couples four zero-mean variables: the source X, the private
signal theta, the transmitted control U, and the reconstruction Xhat.  Both
players' stage costs are quadratic polynomials in these.  The toolkit makes
a linearity claim for exactly one family: controller cost reducible to

    (X + k*theta - Xhat)^2 + k1*U^2 + k2*U*X + k3*U*theta,   k1 > 0,

against a receiver that tracks X under squared error.  The decisive feature
is the absence of a U*Xhat product: once the control enters the cost jointly
with the reconstruction (as in the classical two-stage control problem with
cost (X + U - Xhat)^2, whose expansion contains -2*U*Xhat), nonlinear
strategies can dominate and this module refuses to solve rather than return
a misleading linear answer.

The canonicalizer is deliberately conservative: it pattern-matches the exact
tracking form and rejects anything else.  Linear monomials and constants are
dropped: every variable is zero mean, so they contribute nothing to either
expectation within the model class handled here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from ._optim import golden_min
from .errors import CrossTermPresent, NonCanonicalizable, Unbounded
from .gausslin import (
    CostPair,
    LinearScheme,
    SourcePairModel,
    best_decoder,
    cross_moment,
    require_valid,
)

_REL_TOL = 1e-9
_ABS_TOL = 1e-12
SEARCH_BOUND_ALPHA = 10.0

# JSON aliases: keys as they appear in objective tables elsewhere.
_KEY_ALIASES = {
    "x_hat2": "xhat2",
    "xx_hat": "x_xhat",
    "thetax_hat": "theta_xhat",
    "ux_hat": "u_xhat",
    "x_hat": "xhat",
}


@dataclass(frozen=True)
class QuadraticObjective:
    """Coefficient table of a quadratic polynomial in (X, theta, U, Xhat).

    Field names follow the monomials: ``x2`` multiplies X^2, ``x_theta``
    multiplies X*theta, ``x`` multiplies the linear term, ``const`` is the
    constant.  Missing monomials are zero.
    """

    x2: float = 0.0
    theta2: float = 0.0
    u2: float = 0.0
    xhat2: float = 0.0
    x_theta: float = 0.0
    x_u: float = 0.0
    x_xhat: float = 0.0
    theta_u: float = 0.0
    theta_xhat: float = 0.0
    u_xhat: float = 0.0
    x: float = 0.0
    theta: float = 0.0
    u: float = 0.0
    xhat: float = 0.0
    const: float = 0.0

    @staticmethod
    def from_dict(table: dict) -> "QuadraticObjective":
        """Build from a JSON monomial table; unknown keys are rejected."""
        known = {f.name for f in fields(QuadraticObjective)}
        values: dict[str, float] = {}
        for key, value in table.items():
            name = _KEY_ALIASES.get(key, key)
            if name not in known:
                raise NonCanonicalizable(f"objective table: unknown monomial '{key}'")
            if name in values:
                raise NonCanonicalizable(f"objective table: monomial '{key}' repeated")
            values[name] = float(value)
        return QuadraticObjective(**values)

    def to_dict(self) -> dict:
        return {
            f.name: float(getattr(self, f.name))
            for f in fields(self)
            if getattr(self, f.name) != 0.0
        }

    @staticmethod
    def from_square(
        x: float = 0.0,
        theta: float = 0.0,
        u: float = 0.0,
        xhat: float = 0.0,
        scale: float = 1.0,
    ) -> "QuadraticObjective":
        """Expand scale * (x*X + theta*theta_ + u*U + xhat*Xhat)^2."""
        return QuadraticObjective(
            x2=scale * x * x,
            theta2=scale * theta * theta,
            u2=scale * u * u,
            xhat2=scale * xhat * xhat,
            x_theta=2.0 * scale * x * theta,
            x_u=2.0 * scale * x * u,
            x_xhat=2.0 * scale * x * xhat,
            theta_u=2.0 * scale * theta * u,
            theta_xhat=2.0 * scale * theta * xhat,
            u_xhat=2.0 * scale * u * xhat,
        )

    def __add__(self, other: "QuadraticObjective") -> "QuadraticObjective":
        if not isinstance(other, QuadraticObjective):
            return NotImplemented
        return QuadraticObjective(
            **{
                f.name: getattr(self, f.name) + getattr(other, f.name)
                for f in fields(self)
            }
        )

    def scaled(self, factor: float) -> "QuadraticObjective":
        return QuadraticObjective(
            **{f.name: factor * getattr(self, f.name) for f in fields(self)}
        )


@dataclass(frozen=True)
class CanonicalForm:
    """Normalized controller cost (X + k*theta - Xhat)^2 + k1 U^2 + k2 UX + k3 U theta."""

    k1: float
    k2: float
    k3: float
    theta_weight: float


def has_ux_cross_term(phi: QuadraticObjective) -> bool:
    """True iff the cost couples U and Xhat directly."""
    return phi.u_xhat != 0.0


def _close(a: float, b: float) -> bool:
    return math.isclose(a, b, rel_tol=_REL_TOL, abs_tol=_ABS_TOL)


def canonicalize(phi_e: QuadraticObjective, phi_d: QuadraticObjective) -> CanonicalForm:
    """Reduce an objective pair to the canonical form, or refuse.

    Accepted shape (up to positive scaling, linear monomials and constants,
    which are dropped under the zero-mean convention):

    * controller: t * [(X + k*theta - Xhat)^2 + k1*U^2 + k2*U*X + k3*U*theta]
      with t > 0 and k1 > 0;
    * receiver: t' * (X - Xhat)^2 plus terms in U alone, with t' > 0.

    Raises :class:`CrossTermPresent` when either cost contains a U*Xhat
    product and :class:`NonCanonicalizable` for any other shape mismatch.
    """
    if has_ux_cross_term(phi_e):
        raise CrossTermPresent(
            "controller cost contains a U*Xhat product; no linearity claim is "
            "made for that family"
        )
    if has_ux_cross_term(phi_d):
        raise CrossTermPresent(
            "receiver cost contains a U*Xhat product; no linearity claim is "
            "made for that family"
        )

    td = phi_d.xhat2
    if td <= 0.0:
        raise NonCanonicalizable("receiver cost: Xhat^2 coefficient must be positive")
    checks_d = {
        "X^2 == Xhat^2": _close(phi_d.x2, td),
        "X*Xhat == -2*Xhat^2": _close(phi_d.x_xhat, -2.0 * td),
        "no theta^2 term": _close(phi_d.theta2, 0.0),
        "no X*theta term": _close(phi_d.x_theta, 0.0),
        "no theta*Xhat term": _close(phi_d.theta_xhat, 0.0),
        "no X*U term": _close(phi_d.x_u, 0.0),
        "no theta*U term": _close(phi_d.theta_u, 0.0),
    }
    bad = [name for name, ok in checks_d.items() if not ok]
    if bad:
        raise NonCanonicalizable(
            "receiver cost must be a positive multiple of (X - Xhat)^2 plus "
            "U-only terms; violated: " + ", ".join(bad)
        )

    te = phi_e.xhat2
    if te <= 0.0:
        raise NonCanonicalizable("controller cost: Xhat^2 coefficient must be positive")
    k = phi_e.x_theta / (2.0 * te)
    checks_e = {
        "X^2 == Xhat^2": _close(phi_e.x2, te),
        "X*Xhat == -2*Xhat^2": _close(phi_e.x_xhat, -2.0 * te),
        "theta^2 == k^2*Xhat^2": _close(phi_e.theta2, te * k * k),
        "theta*Xhat == -2*k*Xhat^2": _close(phi_e.theta_xhat, -2.0 * te * k),
    }
    bad = [name for name, ok in checks_e.items() if not ok]
    if bad:
        raise NonCanonicalizable(
            "controller cost must reduce to a positive multiple of "
            "(X + k*theta - Xhat)^2 plus U^2, U*X, U*theta terms; violated: "
            + ", ".join(bad)
        )
    k1 = phi_e.u2 / te
    if k1 <= 0.0:
        raise NonCanonicalizable(
            "controller cost: U^2 coefficient must be positive after "
            f"normalization (got {k1!r})"
        )
    return CanonicalForm(k1=k1, k2=phi_e.x_u / te, k3=phi_e.theta_u / te, theta_weight=k)


def expand_canonical(cf: CanonicalForm) -> tuple[QuadraticObjective, QuadraticObjective]:
    """Re-expand a canonical form into an objective pair (unit scaling)."""
    k = cf.theta_weight
    phi_e = QuadraticObjective.from_square(x=1.0, theta=k, xhat=-1.0) + QuadraticObjective(
        u2=cf.k1, x_u=cf.k2, theta_u=cf.k3
    )
    phi_d = QuadraticObjective.from_square(x=1.0, xhat=-1.0)
    return phi_e, phi_d


def classification_report(
    phi_e: QuadraticObjective, phi_d: QuadraticObjective
) -> dict:
    """JSON-ready linearity classification of an objective pair."""
    report: dict = {
        "controller_has_u_xhat_product": has_ux_cross_term(phi_e),
        "receiver_has_u_xhat_product": has_ux_cross_term(phi_d),
        "linear_solution_claimed": False,
        "canonical": None,
    }
    try:
        cf = canonicalize(phi_e, phi_d)
    except NonCanonicalizable as exc:
        report["reason"] = str(exc)
        return report
    report["linear_solution_claimed"] = True
    report["canonical"] = {
        "k1": cf.k1,
        "k2": cf.k2,
        "k3": cf.k3,
        "theta_weight": cf.theta_weight,
    }
    return report


def _tracking_cost_terms(
    model: SourcePairModel, alphas: np.ndarray, c2: np.ndarray, noise_var: float, k: float
) -> np.ndarray:
    """E{(X + k*theta - Xhat)^2} under best-response decoding, vectorized.

    ``c2`` is the squared encoder gain; the expression is even in the gain,
    which is what lets the solver search magnitudes only.
    """
    s2, rho, r = model.sigma_x2, model.rho, model.r
    b = 1.0 + 2.0 * alphas * rho + alphas**2 * r
    var_y = c2 * s2 * b + noise_var
    cov_xy2 = c2 * (s2 * (1.0 + alphas * rho)) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        d_d = np.where(var_y > 0.0, s2 - cov_xy2 / var_y, s2)
        kappa_c = np.where(var_y > 0.0, c2 * s2 * (1.0 + alphas * rho) / var_y, 0.0)
    e_theta_err = s2 * rho - kappa_c * s2 * (rho + alphas * r)
    return d_d + 2.0 * k * e_theta_err + k * k * s2 * r


def _objective_grid(
    model: SourcePairModel,
    cf: CanonicalForm,
    noise_var: float,
    alphas: np.ndarray,
    gains: np.ndarray,
) -> np.ndarray:
    """Full controller objective on a (gain, alpha) magnitude grid.

    The U*X and U*theta penalties are odd in the gain sign, so the grid
    carries their magnitude with the favorable sign; see
    :func:`solve_canonical` for the sign resolution.
    """
    s2, rho, r = model.sigma_x2, model.rho, model.r
    al = alphas[None, :]
    c = gains[:, None]
    c2 = c * c
    b = 1.0 + 2.0 * al * rho + al**2 * r
    track = _tracking_cost_terms(model, al, c2, noise_var, cf.theta_weight)
    lam = cf.k2 * s2 * (1.0 + al * rho) + cf.k3 * s2 * (rho + al * r)
    return track + cf.k1 * c2 * s2 * b - np.abs(lam) * c


def solve_canonical(
    model: SourcePairModel, cf: CanonicalForm, noise_var: float
) -> tuple[LinearScheme, float, float]:
    """Optimal linear control for a canonical game over a Gaussian channel.

    Minimizes the exact closed-form controller objective over encoders
    U = c*(X + alpha*theta) observed through noise of variance
    ``noise_var``, with the receiver best-responding in squared error.
    Nested one-dimensional searches (dense grid, then golden-section on
    both coordinates) refine the optimum to about 1e-8.  Returns the solved
    scheme plus the achieved controller and receiver expected costs.

    The objective is even in c except for the U*X / U*theta penalties,
    which are odd; the search runs over magnitudes and the sign of the
    reported gain is whichever makes the odd part favorable.
    """
    require_valid(model)
    if noise_var < 0.0:
        raise ValueError("noise_var: must be nonnegative")
    if cf.k1 <= 0.0:
        raise Unbounded(f"U^2 penalty k1 = {cf.k1!r} is not coercive")

    s2, rho, r = model.sigma_x2, model.rho, model.r
    k = cf.theta_weight
    alphas = np.linspace(-SEARCH_BOUND_ALPHA, SEARCH_BOUND_ALPHA, 2001)

    # Coercivity bound: at the optimum, k1*c^2*s2*b - |lam|*c cannot exceed
    # the value at c = 0, so the optimal magnitude is bounded by the larger
    # quadratic root, uniformly over alpha.
    b = 1.0 + 2.0 * alphas * rho + alphas**2 * r
    lam = np.abs(cf.k2 * s2 * (1.0 + alphas * rho) + cf.k3 * s2 * (rho + alphas * r))
    at_zero = float(np.max(_tracking_cost_terms(model, alphas, np.zeros_like(alphas), noise_var, k)))
    quad = cf.k1 * s2 * b
    c_max = float(np.max((lam + np.sqrt(lam * lam + 4.0 * quad * at_zero)) / (2.0 * quad)))
    c_max = 1.1 * c_max + 1e-6

    gains = np.linspace(0.0, c_max, 201)
    grid = _objective_grid(model, cf, noise_var, alphas, gains)
    flat = int(np.argmin(grid))
    gi, ai = np.unravel_index(flat, grid.shape)

    def inner(alpha: float) -> tuple[float, float]:
        def f(c: float) -> float:
            return float(
                _objective_grid(model, cf, noise_var, np.array([alpha]), np.array([c]))[0, 0]
            )

        cs = np.linspace(0.0, c_max, 65)
        vals = _objective_grid(model, cf, noise_var, np.array([alpha]), cs)[:, 0]
        j = int(np.argmin(vals))
        lo = cs[max(j - 1, 0)]
        hi = cs[min(j + 1, len(cs) - 1)]
        c_best, v_best = golden_min(f, lo, hi, tol=1e-10)
        if vals[j] < v_best:
            c_best, v_best = float(cs[j]), float(vals[j])
        return c_best, v_best

    def outer(alpha: float) -> float:
        return inner(alpha)[1]

    a_lo = alphas[max(ai - 1, 0)]
    a_hi = alphas[min(ai + 1, len(alphas) - 1)]
    alpha_best, _ = golden_min(outer, a_lo, a_hi, tol=1e-9)
    if outer(alpha_best) > grid[gi, ai]:
        alpha_best = float(alphas[ai])
    c_best, _ = inner(alpha_best)

    lam_best = cf.k2 * s2 * (1.0 + alpha_best * rho) + cf.k3 * s2 * (rho + alpha_best * r)
    sign = -1.0 if lam_best > 0.0 else 1.0
    scheme = LinearScheme(enc_gain=sign * c_best, enc_theta_weight=alpha_best)
    solved, _ = best_decoder(model, scheme, channel_noise_var=noise_var)

    track = cross_moment(
        model,
        solved,
        noise_var,
        {"x": 1.0, "theta": k, "xhat": -1.0},
        {"x": 1.0, "theta": k, "xhat": -1.0},
    )
    j_e = (
        track
        + cf.k1 * cross_moment(model, solved, noise_var, {"u": 1.0}, {"u": 1.0})
        + cf.k2 * cross_moment(model, solved, noise_var, {"u": 1.0}, {"x": 1.0})
        + cf.k3 * cross_moment(model, solved, noise_var, {"u": 1.0}, {"theta": 1.0})
    )
    j_d = cross_moment(
        model,
        solved,
        noise_var,
        {"x": 1.0, "xhat": -1.0},
        {"x": 1.0, "xhat": -1.0},
    )
    return solved, float(j_e), float(j_d)


def solve_objectives(
    model: SourcePairModel,
    phi_e: QuadraticObjective,
    phi_d: QuadraticObjective,
    noise_var: float,
) -> tuple[CanonicalForm, LinearScheme, float, float]:
    """Gatekeeping path from raw objectives to a solved linear scheme.

    Canonicalizes first (refusing cross-term games), then solves.  The
    returned expected costs are in the raw objectives' units, including the
    receiver's U-only terms (which never influence the solution itself).
    """
    cf = canonicalize(phi_e, phi_d)
    scheme, j_e, j_d = solve_canonical(model, cf, noise_var)
    u2 = cross_moment(model, scheme, noise_var, {"u": 1.0}, {"u": 1.0})
    raw_e = phi_e.xhat2 * j_e + phi_e.const
    raw_d = phi_d.xhat2 * j_d + phi_d.u2 * u2 + phi_d.const
    return cf, scheme, float(raw_e), float(raw_d)
