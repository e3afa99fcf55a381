"""Time-dependent Kuramoto mean-field game on a truncated horizon.

A solution is a fixed point of the forcing map: given a forcing curve
xi(t) = (gamma(t), eta(t)), solve the backward parabolic HJB equation with
running cost -gamma cos - eta sin and terminal value zero, push the initial
density forward with the optimal drift -v_x, and read off kappa times the
(cos, sin) moments of the flow.  Damped Picard iteration on xi converges to
the self-consistent forcing.

Discretization: the backward sweep treats diffusion implicitly and the
quadratic Hamiltonian explicitly; the forward sweep is Crank-Nicolson in
time with Rannacher start-up on an exponentially fitted flux, so the Gibbs
density of a frozen drift is an exact discrete steady state, mass is
conserved identically, and positivity is restored by implicit-Euler
sub-stepping whenever the trapezoid weights would undershoot.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from . import _fd
from .errors import CflViolation, PicardStagnation, StepRejected, WindowDegenerate
from .torus import Grid, Measure, Params, dist_to_uniform, trig_moments

log = logging.getLogger(__name__)

MAX_HALVINGS = 10


@dataclass
class Forcing:
    """Time-sampled forcing pair (gamma(t), eta(t)) on a uniform grid."""

    t: np.ndarray
    gamma: np.ndarray
    eta: np.ndarray

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.gamma = np.asarray(self.gamma, dtype=float)
        self.eta = np.asarray(self.eta, dtype=float)
        if not (self.t.shape == self.gamma.shape == self.eta.shape):
            raise ValueError("t, gamma, eta must have matching shapes")
        if self.t.size < 2:
            raise ValueError("need at least two time samples")
        steps = np.diff(self.t)
        if np.any(steps <= 0) or np.max(np.abs(steps - steps[0])) > 1e-9 * steps[0]:
            raise ValueError("time grid must be uniform and increasing")

    @property
    def dt(self):
        return float(self.t[1] - self.t[0])

    @property
    def horizon(self):
        return float(self.t[-1])

    def sup_norm(self):
        """max_t (|gamma| + |eta|)."""
        return float(np.max(np.abs(self.gamma) + np.abs(self.eta)))

    @classmethod
    def zero(cls, t):
        t = np.asarray(t, dtype=float)
        return cls(t, np.zeros_like(t), np.zeros_like(t))


@dataclass
class ValueField:
    """Backward value function v(t_m, x_j) and its space derivative."""

    grid: Grid
    t: np.ndarray
    v: np.ndarray
    v_x: np.ndarray


@dataclass
class MeasureFlow:
    """Forward flow of densities with per-slice trig moments.

    a, b are the cos/sin moments per slice; d is the moment distance to the
    uniform distribution.
    """

    grid: Grid
    t: np.ndarray
    densities: np.ndarray
    a: np.ndarray
    b: np.ndarray
    d: np.ndarray

    def measure_at(self, m):
        return Measure(self.grid, self.densities[m])


@dataclass
class MfgSolution:
    """Converged forcing with the fields it generates."""

    forcing: Forcing
    value: ValueField
    flow: MeasureFlow
    picard_residual: float
    iterations: int
    residual_history: list = field(default_factory=list)


def uniform_time_grid(horizon, dt):
    m = max(int(round(horizon / dt)), 2)
    return np.linspace(0.0, m * dt, m + 1)


def _backward_sweep(xi, params, grid, substeps, startup=2):
    """Predictor-corrector trapezoid march from the zero terminal slice.

    The diffusion and discount terms are implicit, the quadratic Hamiltonian
    enters through a semi-implicit predictor, giving second order in time;
    the first ``startup`` sub-steps stay first order to damp terminal-layer
    transients.  Returns None on blow-up so the caller can sub-step.
    """
    n, m_steps = grid.n, xi.t.size - 1
    dt = xi.dt / substeps
    cos_x, sin_x = np.cos(grid.x), np.sin(grid.x)
    visc = params.sigma**2 / 2.0 / grid.h**2
    diag_full = np.full(n, params.beta + 1.0 / dt + 2.0 * visc)
    off_full = np.full(n, -visc)
    diag_half = np.full(n, 1.0 / dt + 0.5 * (params.beta + 2.0 * visc))
    off_half = np.full(n, -0.5 * visc)

    def linear(v):
        return params.beta * v - 0.5 * params.sigma**2 * _fd.d2(v, grid.h)

    def hamilton(v):
        vx = _fd.d1(v, grid.h)
        return 0.5 * vx * vx

    v = np.zeros((m_steps + 1, n))
    cur = np.zeros(n)
    steps_done = 0
    for m in range(m_steps - 1, -1, -1):
        for s in range(substeps):
            theta_hi = (substeps - s) / substeps
            theta_lo = (substeps - 1 - s) / substeps
            g_hi = xi.gamma[m] + theta_hi * (xi.gamma[m + 1] - xi.gamma[m])
            e_hi = xi.eta[m] + theta_hi * (xi.eta[m + 1] - xi.eta[m])
            g_lo = xi.gamma[m] + theta_lo * (xi.gamma[m + 1] - xi.gamma[m])
            e_lo = xi.eta[m] + theta_lo * (xi.eta[m + 1] - xi.eta[m])
            ell_lo = -g_lo * cos_x - e_lo * sin_x
            ell_hi = -g_hi * cos_x - e_hi * sin_x

            pred = _fd.solve_tridiag_periodic(
                off_full, diag_full, off_full, cur / dt - hamilton(cur) + ell_lo
            )
            if steps_done < startup:
                new = pred
            else:
                rhs = (cur / dt - 0.5 * (linear(cur) + hamilton(cur) - ell_hi)
                       - 0.5 * (hamilton(pred) - ell_lo))
                new = _fd.solve_tridiag_periodic(off_half, diag_half, off_half, rhs)
            if not np.all(np.isfinite(new)) or np.max(np.abs(new)) > 1e12:
                return None
            cur = new
            steps_done += 1
        v[m] = cur
    return v


def solve_backward_hjb(xi, params, grid):
    """Solve the backward dynamic programming equation driven by xi.

    Marches from the zero terminal condition at the truncation horizon down
    to t = 0 with implicit diffusion and an explicit Hamiltonian.  If a sweep
    blows up the interval step is halved (up to 10 times) before
    :class:`StepRejected` is raised.
    """
    for attempt in range(MAX_HALVINGS + 1):
        v = _backward_sweep(xi, params, grid, 2**attempt)
        if v is not None:
            if attempt:
                log.info("backward sweep needed %d sub-steps per interval", 2**attempt)
            v_x = (np.roll(v, -1, axis=1) - np.roll(v, 1, axis=1)) / (2.0 * grid.h)
            return ValueField(grid, xi.t.copy(), v, v_x)
    raise StepRejected(f"backward sweep unstable after {MAX_HALVINGS} halvings")


def _implicit_euler_steps(f, v_from, v_to, params, grid, dt, n_sub):
    for s in range(n_sub):
        theta = (s + 1) / n_sub
        v_mid = (1.0 - theta) * v_from + theta * v_to
        lo, di, up = _fd.transport_coeffs(v_mid, params.sigma, grid.h)
        delta = dt / n_sub
        f = _fd.solve_tridiag_periodic(delta * lo, 1.0 + delta * di, delta * up, f)
    return f


def solve_forward_fp(vfield, mu0, params, rannacher=2):
    """Push mu0 forward with the drift -v_x of a solved value field.

    Mass is conserved to roundoff each step; positivity is kept by falling
    back to implicit-Euler sub-steps when the Crank-Nicolson weights
    undershoot (raises :class:`CflViolation` only if even those fail).
    """
    grid, t = vfield.grid, vfield.t
    if mu0.grid != grid:
        raise ValueError("mu0 grid does not match the value field")
    dt = float(t[1] - t[0])
    m_steps = t.size - 1
    dens = np.empty((m_steps + 1, grid.n))
    dens[0] = mu0.density
    f = mu0.density.copy()

    for m in range(m_steps):
        v0, v1 = vfield.v[m], vfield.v[m + 1]
        if m < rannacher:
            f_new = _implicit_euler_steps(f, v0, v1, params, grid, dt, 2)
        else:
            lo0, di0, up0 = _fd.transport_coeffs(v0, params.sigma, grid.h)
            half = dt / 2.0
            rhs = f - half * _fd.apply_tridiag_periodic(lo0, di0, up0, f)
            lo1, di1, up1 = _fd.transport_coeffs(v1, params.sigma, grid.h)
            f_new = _fd.solve_tridiag_periodic(half * lo1, 1.0 + half * di1, half * up1, rhs)
            if f_new.min() < -1e-12:
                f_new = _implicit_euler_steps(f, v0, v1, params, grid, dt, 4)
        if f_new.min() < -1e-12:
            raise CflViolation(
                f"negative density {f_new.min():.3e} at t={t[m + 1]:.3f} "
                "despite implicit sub-stepping"
            )
        np.clip(f_new, 0.0, None, out=f_new)
        f_new /= grid.h * f_new.sum()
        dens[m + 1] = f_new
        f = f_new

    cos_x, sin_x = np.cos(grid.x), np.sin(grid.x)
    a = grid.h * dens @ cos_x
    b = grid.h * dens @ sin_x
    sc = grid.h * dens @ (sin_x * cos_x)
    c2 = grid.h * dens @ (cos_x * cos_x) - 0.5
    d = np.max(np.abs(np.stack([a, b, sc, c2])), axis=0)
    return MeasureFlow(grid, t.copy(), dens, a, b, d)


def apply_T(xi, mu0, params, grid=None):
    """Moment response map: xi -> (E cos, E sin) of the optimally driven flow.

    Components lie in [-1, 1]; the game solutions are exactly the fixed
    points of kappa times this map.
    """
    grid = grid if grid is not None else mu0.grid
    vfield = solve_backward_hjb(xi, params, grid)
    flow = solve_forward_fp(vfield, mu0, params)
    return Forcing(xi.t.copy(), flow.a.copy(), flow.b.copy())


def default_horizon(params, tol):
    """Truncation horizon making the discounted tail e^{-beta T} 2 kappa/beta <= tol/10."""
    if params.kappa <= 0.0:
        return 10.0
    target = 20.0 * params.kappa / (params.beta * tol)
    return max(np.log(max(target, np.e)) / params.beta, 10.0)


def solve_mfg(mu0, params, horizon=None, tol=1e-7, dt=1e-2, omega=0.5,
              max_iter=300, stall_window=50, stall_factor=10.0):
    """Solve the game from mu0 by damped Picard iteration on the forcing.

    The iteration is xi <- (1 - omega) xi + omega * kappa * T(xi) starting
    from the heat-flow prediction kappa (a0, b0) e^{-sigma^2 t / 2}, stopped
    when sup_t |xi - kappa T(xi)| <= tol.  Raises
    :class:`PicardStagnation` with the residual history if the residual
    fails to shrink tenfold over ``stall_window`` iterations (uniqueness and
    contraction are not guaranteed above the critical interaction).
    """
    grid = mu0.grid
    kappa = params.kappa
    if horizon is None:
        horizon = default_horizon(params, tol)
    t = uniform_time_grid(horizon, dt)
    a0, b0, _ = trig_moments(mu0)
    decay = np.exp(-params.sigma**2 * t / 2.0)
    xi = Forcing(t, kappa * a0 * decay, kappa * b0 * decay)

    history = []
    for it in range(1, max_iter + 1):
        response = apply_T(xi, mu0, params, grid)
        target_g = kappa * response.gamma
        target_e = kappa * response.eta
        residual = float(np.max(np.abs(xi.gamma - target_g) + np.abs(xi.eta - target_e)))
        history.append(residual)
        if residual <= tol:
            vfield = solve_backward_hjb(xi, params, grid)
            flow = solve_forward_fp(vfield, mu0, params)
            return MfgSolution(xi, vfield, flow, residual, it, history)
        if len(history) > stall_window and history[-1] > history[-1 - stall_window] / stall_factor:
            raise PicardStagnation(history)
        xi = Forcing(
            t,
            (1.0 - omega) * xi.gamma + omega * target_g,
            (1.0 - omega) * xi.eta + omega * target_e,
        )
    raise PicardStagnation(history)


def estimate_decay_rate(flow, window):
    """Least-squares slope of -log d(mu_t) over a time window.

    Positive for flows relaxing to the uniform distribution; raises
    :class:`WindowDegenerate` when d vanishes numerically on the window.
    """
    t_a, t_b = window
    mask = (flow.t >= t_a - 1e-12) & (flow.t <= t_b + 1e-12)
    if mask.sum() < 2:
        raise WindowDegenerate(f"window [{t_a}, {t_b}] contains fewer than two samples")
    d = flow.d[mask]
    if np.any(d <= 1e-12):
        raise WindowDegenerate("distance to uniform vanishes on the window")
    slope = np.polyfit(flow.t[mask], -np.log(d), 1)[0]
    return float(slope)
