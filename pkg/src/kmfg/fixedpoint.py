"""Stationary measures and the scalar self-consistency map.

The stationary law of the optimally controlled oscillator is the Gibbs
density exp(-2 v / sigma^2) / Z of the value function v.  Feeding its
cos-moment back through the interaction strength gives the scalar map
F_kappa(gamma) = kappa * mu_gamma(cos); its fixed points classify the
stationary equilibria (gamma = 0 is the incoherent one, positive fixed
points are the self-organizing ones).
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import _fd
from .hjb import DEFAULT_TOL, ValueFn, solve_stationary_hjb
from .torus import Grid, Measure, Params, trig_moments

log = logging.getLogger(__name__)

FIXED_POINT_TOL = 1e-8
ZERO_ROOT_GUARD = 1e-4


@dataclass
class StationaryProfile:
    """Value function, Gibbs measure, and moments for one forcing amplitude."""

    gamma: float
    value: ValueFn
    mu: Measure
    z_norm: float
    a: float
    b: float


@dataclass
class BifurcationPoint:
    """Fixed points of F_kappa at a single interaction strength."""

    kappa: float
    fixed_points: list = field(default_factory=list)
    order_parameters: list = field(default_factory=list)

    @property
    def gamma_star(self):
        """Largest fixed point (0 when only the incoherent one exists)."""
        return max(self.fixed_points)


def gibbs_measure(vf, params):
    """Gibbs density exp(-2 v / sigma^2), normalized on the grid.

    Computed with the max-shift trick so large-amplitude value functions
    (deep synchronization) do not overflow.
    """
    v = vf.v.values
    expo = -2.0 * v / params.sigma**2
    shift = expo.max()
    weights = np.exp(expo - shift)
    return Measure.from_values(vf.grid, weights)


def gibbs_log_norm(vf, params):
    """log Z of the Gibbs density (finite even when Z itself overflows)."""
    v = vf.v.values
    expo = -2.0 * v / params.sigma**2
    shift = expo.max()
    return float(shift + np.log(vf.grid.h * np.exp(expo - shift).sum()))


def fp_flux_residual(vf, mu, params):
    """Sup norm of the discrete stationary transport residual of mu.

    Uses the exponentially fitted flux of the evolution scheme, for which the
    Gibbs density annihilates every face flux exactly.
    """
    lower, diag, upper = _fd.transport_coeffs(vf.v.values, params.sigma, vf.grid.h)
    div = _fd.apply_tridiag_periodic(lower, diag, upper, mu.density)
    return float(np.max(np.abs(div)))


def stationary_profile(gamma, params, grid, tol=DEFAULT_TOL, warm_start=None):
    """Solve the HJB equation and assemble the full stationary profile."""
    vf = solve_stationary_hjb(gamma, params, grid, tol=tol, warm_start=warm_start)
    mu = gibbs_measure(vf, params)
    a, b, _ = trig_moments(mu)
    z_norm = float(np.exp(np.clip(gibbs_log_norm(vf, params), -745.0, 709.0)))
    return StationaryProfile(float(gamma), vf, mu, z_norm, a, b)


def big_f(kappa, gamma, params, grid, warm_start=None):
    """Self-consistency map F_kappa(gamma) = kappa * mu_gamma(cos)."""
    if kappa < 0.0 or gamma < 0.0:
        raise ValueError("kappa and gamma must be nonnegative")
    prof = stationary_profile(gamma, params, grid, warm_start=warm_start)
    return kappa * prof.a


def slope_at_zero(kappa, params, grid, gamma0=1e-3):
    """Slope of F_kappa at the origin, estimated by Richardson extrapolation.

    F_kappa(gamma)/gamma is even in gamma (the map is odd by the half-turn
    symmetry), so combining gamma0 and gamma0/2 with weights (4, -1)/3
    cancels the quadratic correction.  The result equals kappa / kappa_c
    within discretization error.
    """
    s1 = big_f(kappa, gamma0, params, grid) / gamma0
    s2 = big_f(kappa, gamma0 / 2.0, params, grid) / (gamma0 / 2.0)
    return (4.0 * s2 - s1) / 3.0


def find_fixed_points(kappa, params, grid, scan_step=None):
    """Locate all fixed points of F_kappa on (0, kappa].

    Scans the residual r(gamma) = F_kappa(gamma) - gamma with the given step
    (default kappa/200), brackets every sign change, and refines each bracket
    by bisection until |r| <= 1e-8.  gamma = 0 is always included.

    The bifurcation is tangential at threshold, where root-finding is
    ill-conditioned: roots closer than 1e-4 to zero are not resolved, and no
    positive root is reported unless the scanned residual shows a positive
    excursion above the discretization noise floor (1e-6 * kappa); otherwise
    the tiny slope error of the discrete map would fabricate a near-origin
    root exactly at kappa = kappa_c.
    """
    point = BifurcationPoint(kappa=float(kappa), fixed_points=[0.0], order_parameters=[0.0])
    if kappa <= 0.0:
        return point
    if scan_step is None:
        scan_step = kappa / 200.0
    if scan_step <= 0.0:
        raise ValueError("scan_step must be positive")

    gammas = np.arange(scan_step, kappa + scan_step / 2.0, scan_step)
    if gammas.size == 0 or gammas[-1] < kappa:
        gammas = np.append(gammas, kappa)

    residuals = np.empty(gammas.size)
    warm = None
    profiles = {}
    for i, g in enumerate(gammas):
        prof = stationary_profile(g, params, grid, warm_start=warm)
        warm = prof.value.v.values
        profiles[g] = prof
        residuals[i] = kappa * prof.a - g

    if residuals.max() < max(1e-6 * kappa, 10.0 * FIXED_POINT_TOL):
        return point

    def r(g):
        return big_f(kappa, g, params, grid)

    brackets = []
    if residuals[0] < 0.0 and gammas[0] > ZERO_ROOT_GUARD:
        # a root may hide between the guard band and the first scan point
        r_lo = r(ZERO_ROOT_GUARD) - ZERO_ROOT_GUARD
        if r_lo > 0.0:
            brackets.append((ZERO_ROOT_GUARD, gammas[0]))
    for i in range(gammas.size - 1):
        if residuals[i] == 0.0:
            brackets.append((gammas[i], gammas[i]))
        elif residuals[i] * residuals[i + 1] < 0.0:
            brackets.append((gammas[i], gammas[i + 1]))
    if residuals[-1] == 0.0:
        brackets.append((gammas[-1], gammas[-1]))

    for lo, hi in brackets:
        if lo == hi:
            root = lo
        else:
            root = brentq(lambda g: r(g) - g, lo, hi, xtol=1e-13, rtol=1e-15)
        resid = r(root) - root
        if abs(resid) > FIXED_POINT_TOL:
            log.warning("fixed point at gamma=%.6f refined only to |r|=%.2e", root, abs(resid))
        prof = profiles.get(root) or stationary_profile(root, params, grid)
        _, _, g_order = trig_moments(prof.mu)
        point.fixed_points.append(float(root))
        point.order_parameters.append(float(g_order))
    return point


def bifurcation_scan(kappa_min, kappa_max, n_kappa, params, grid, scan_step=None):
    """Fixed points of F_kappa on a uniform kappa grid.

    Per-kappa failures are collected and logged, and the scan continues; a
    non-monotone largest fixed point is logged rather than raised.
    """
    if not (0.0 <= kappa_min < kappa_max):
        raise ValueError("need 0 <= kappa_min < kappa_max")
    points = []
    last_star = -np.inf
    for kappa in np.linspace(kappa_min, kappa_max, n_kappa):
        try:
            point = find_fixed_points(kappa, params.with_kappa(kappa), grid, scan_step)
        except Exception as exc:  # noqa: BLE001 - scan must survive one bad kappa
            log.warning("fixed-point search failed at kappa=%.4f: %s", kappa, exc)
            continue
        if point.gamma_star < last_star - 1e-8:
            log.warning(
                "largest fixed point decreased at kappa=%.4f (%.6f -> %.6f)",
                kappa, last_star, point.gamma_star,
            )
        last_star = point.gamma_star
        points.append(point)
    return points
