"""Stationary discounted HJB solver on the torus.

Solves beta*v - (sigma^2/2) v_xx + (1/2) v_x^2 = -gamma*cos(x) with periodic
boundary, by damped Newton iteration on the central-difference residual.
The solution is the value of the discounted control problem with quadratic
control cost and cosine forcing of amplitude gamma; the optimal feedback
drift is -v_x.
"""

from dataclasses import dataclass

import numpy as np

from . import _fd
from .errors import NonConvergence
from .torus import Grid, GridFn, Params

DEFAULT_TOL = 1e-10


@dataclass
class ValueFn:
    """Stationary value function and its derivative for one forcing amplitude."""

    grid: Grid
    v: GridFn
    v_x: GridFn
    gamma: float
    residual_norm: float


def hjb_residual(v, gamma, params, grid):
    """Discrete residual beta*v - (sigma^2/2) D2 v + (1/2)(D1 v)^2 + gamma*cos."""
    vx = _fd.d1(v, grid.h)
    return (
        params.beta * v
        - 0.5 * params.sigma**2 * _fd.d2(v, grid.h)
        + 0.5 * vx * vx
        + gamma * np.cos(grid.x)
    )


def _newton(v0, gamma, params, grid, tol, max_iter):
    v = v0.copy()
    res = hjb_residual(v, gamma, params, grid)
    norm = float(np.max(np.abs(res)))
    for it in range(max_iter):
        if norm <= tol:
            return v, norm
        vx = _fd.d1(v, grid.h)
        lower, diag, upper = _fd.newton_jacobian_rows(vx, params.beta, params.sigma, grid.h)
        step = _fd.solve_tridiag_periodic(lower, diag, upper, res)
        damp = 1.0
        for _ in range(30):
            v_new = v - damp * step
            res_new = hjb_residual(v_new, gamma, params, grid)
            norm_new = float(np.max(np.abs(res_new)))
            if np.isfinite(norm_new) and norm_new < norm:
                break
            damp *= 0.5
        else:
            raise NonConvergence(it + 1, norm)
        v, res, norm = v_new, res_new, norm_new
    if norm <= tol:
        return v, norm
    raise NonConvergence(max_iter, norm)


def solve_stationary_hjb(gamma, params, grid, tol=DEFAULT_TOL, max_iter=60, warm_start=None):
    """Solve the stationary HJB equation for forcing amplitude gamma >= 0.

    The Newton iteration is warm-started from the small-forcing linearization
    v = -2*gamma*cos(x)/(2*beta + sigma^2); for gamma > 10 a geometric
    continuation ladder is climbed so the iteration stays inside its basin as
    the solution steepens.  Raises :class:`NonConvergence` if damping is
    exhausted.

    The effective residual tolerance is max(tol, 1e-11 * gamma): the residual
    combines terms of size gamma/h^2, so a fixed absolute target is below the
    roundoff floor once gamma is large.
    """
    if gamma < 0.0:
        raise ValueError(f"gamma must be nonnegative, got {gamma}")
    if gamma == 0.0:
        zero = np.zeros(grid.n)
        return ValueFn(grid, GridFn(grid, zero), GridFn(grid, zero), 0.0, 0.0)
    tol = max(tol, 1e-11 * gamma)

    if warm_start is not None:
        ladder = [gamma]
        v = np.asarray(warm_start, dtype=float)
    else:
        ladder = [gamma]
        g = gamma
        while g > 10.0:
            g /= 3.0
            ladder.append(g)
        ladder.reverse()
        v = -2.0 * ladder[0] * np.cos(grid.x) / (2.0 * params.beta + params.sigma**2)

    for g in ladder:
        v, norm = _newton(v, g, params, grid, tol, max_iter)
    vx = _fd.d1(v, grid.h)
    return ValueFn(grid, GridFn(grid, v), GridFn(grid, vx), float(gamma), norm)


def drift_field(vf):
    """Optimal feedback drift -v_x of a stationary value function."""
    return GridFn(vf.grid, -vf.v_x.values)
