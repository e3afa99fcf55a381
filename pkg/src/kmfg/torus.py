"""Periodic-grid calculus on the torus.

Grids, sampled functions, probability densities, trigonometric moments,
translations, and the moment distance to the uniform distribution.  All
quadrature is the periodic rectangle rule, which is spectrally accurate for
smooth periodic integrands and coincides with the trapezoid rule on the
circle.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DegenerateAlignment

TWO_PI = 2.0 * np.pi


class Grid:
    """Uniform periodic grid with ``n`` cells, points ``x_j = 2*pi*j/n``.

    ``n`` must be an even integer >= 16 so that x = pi stays on-grid for
    symmetry checks.  Instances are immutable and safe to share between
    threads.
    """

    __slots__ = ("n", "h", "x")

    def __init__(self, n):
        n = int(n)
        if n < 16 or n % 2 != 0:
            raise ValueError(f"grid size must be an even integer >= 16, got {n}")
        self.n = n
        self.h = TWO_PI / n
        x = np.arange(n) * self.h
        x.setflags(write=False)
        self.x = x

    def __eq__(self, other):
        return isinstance(other, Grid) and other.n == self.n

    def __hash__(self):
        return hash(("Grid", self.n))

    def __repr__(self):
        return f"Grid(n={self.n})"

    def integrate(self, values):
        """Periodic rectangle rule: h * sum(values)."""
        return self.h * float(np.sum(values))

    def signed_x(self):
        """Grid coordinates wrapped to [-pi, pi)."""
        return (self.x + np.pi) % TWO_PI - np.pi


class GridFn:
    """Real-valued function sampled on a :class:`Grid`."""

    __slots__ = ("grid", "values")

    def __init__(self, grid, values):
        values = np.array(values, dtype=float)
        if values.shape != (grid.n,):
            raise ValueError(f"expected {grid.n} samples, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("function samples must be finite")
        values.setflags(write=False)
        self.grid = grid
        self.values = values

    def __repr__(self):
        return f"GridFn(n={self.grid.n})"


class Measure:
    """Probability density on the torus, sampled on a :class:`Grid`.

    The density is nonnegative and integrates to one (rectangle rule) within
    1e-12.  Use :meth:`from_values` to build a measure from unnormalized,
    possibly slightly negative samples.
    """

    __slots__ = ("grid", "density")

    MASS_TOL = 1e-12

    def __init__(self, grid, density):
        density = np.array(density, dtype=float)
        if density.shape != (grid.n,):
            raise ValueError(f"expected {grid.n} samples, got shape {density.shape}")
        if not np.all(np.isfinite(density)):
            raise ValueError("density must be finite")
        if np.any(density < 0.0):
            raise ValueError(f"density must be nonnegative (min {density.min():.3e})")
        mass = grid.h * density.sum()
        if abs(mass - 1.0) > self.MASS_TOL:
            raise ValueError(f"density mass {mass!r} is not 1 within {self.MASS_TOL}")
        density.setflags(write=False)
        self.grid = grid
        self.density = density

    def __repr__(self):
        return f"Measure(n={self.grid.n})"

    @classmethod
    def uniform(cls, grid):
        return cls(grid, np.full(grid.n, 1.0 / TWO_PI))

    @classmethod
    def from_values(cls, grid, values, clip_tol=1e-12):
        """Normalize nonnegative samples into a measure.

        Negative values down to ``-clip_tol * max`` are treated as roundoff
        and clipped to zero; anything more negative raises.
        """
        values = np.asarray(values, dtype=float)
        floor = -clip_tol * max(float(np.max(values)), 1.0)
        if np.any(values < floor):
            raise ValueError(f"density samples significantly negative (min {values.min():.3e})")
        values = np.clip(values, 0.0, None)
        mass = grid.h * values.sum()
        if mass <= 0.0:
            raise ValueError("cannot normalize a zero density")
        return cls(grid, values / mass)

    def mass_in_interval(self, lo, hi):
        """Mass carried by grid cells whose centers fall in [lo, hi] mod 2*pi."""
        pos = (self.grid.x - lo) % TWO_PI
        width = (hi - lo) % TWO_PI if (hi - lo) % TWO_PI != 0.0 else TWO_PI
        inside = pos <= width
        return self.grid.h * float(self.density[inside].sum())


@dataclass(frozen=True)
class Params:
    """Physical constants of the game.

    beta
        Discount rate (1/time), > 0.
    sigma
        Noise intensity, > 0.
    kappa
        Interaction strength, >= 0.

    The derived critical interaction ``kappa_c = beta*sigma^2 + sigma^4/2``
    separates the incoherent regime from self-organization, and
    ``rho = kappa_c / sigma^2 = beta + sigma^2/2`` is the discounted moment
    relaxation rate used by the linearized operators.
    """

    beta: float
    sigma: float
    kappa: float = 0.0

    def __post_init__(self):
        if not (self.beta > 0.0 and np.isfinite(self.beta)):
            raise ConfigError(f"beta must be positive, got {self.beta}")
        if not (self.sigma > 0.0 and np.isfinite(self.sigma)):
            raise ConfigError(f"sigma must be positive, got {self.sigma}")
        if not (self.kappa >= 0.0 and np.isfinite(self.kappa)):
            raise ConfigError(f"kappa must be nonnegative, got {self.kappa}")

    @property
    def kappa_c(self):
        return self.beta * self.sigma**2 + self.sigma**4 / 2.0

    @property
    def rho(self):
        return self.beta + self.sigma**2 / 2.0

    def with_kappa(self, kappa):
        return Params(self.beta, self.sigma, kappa)


def trig_moments(mu):
    """First trigonometric moments (a, b, g) of a measure.

    a = integral of cos, b = integral of sin, g = sqrt(a^2 + b^2) is the
    synchronization order parameter (0 for uniform, -> 1 for a point mass).
    """
    x, d = mu.grid.x, mu.density
    a = mu.grid.integrate(np.cos(x) * d)
    b = mu.grid.integrate(np.sin(x) * d)
    return a, b, float(np.hypot(a, b))


def translate(mu, z):
    """Push a measure forward by the rotation x -> x + z.

    The returned measure mu' satisfies int f(x) dmu' = int f(x+z) dmu for
    test functions, i.e. density'(x) = density(x - z).  On-grid shifts are
    exact cyclic rolls; off-grid shifts use periodic linear interpolation
    (positivity preserving) followed by renormalization.
    """
    grid = mu.grid
    cells = z / grid.h
    k = int(np.round(cells))
    if abs(cells - k) < 1e-9:
        return Measure(grid, np.roll(mu.density, k % grid.n))
    pos = (grid.x - z) % TWO_PI
    u = pos / grid.h
    j = np.floor(u).astype(int) % grid.n
    frac = u - np.floor(u)
    shifted = (1.0 - frac) * mu.density[j] + frac * mu.density[(j + 1) % grid.n]
    return Measure.from_values(grid, shifted)


def align(mu):
    """Rotate a measure so its sin-moment vanishes and its cos-moment is g(mu).

    Returns ``(aligned, z_star)`` with ``z_star = atan2(b, a)``; the aligned
    measure is ``translate(mu, -z_star)``.  Raises
    :class:`DegenerateAlignment` when g(mu) < 1e-12 (rotational degeneracy:
    every rotation looks the same).
    """
    a, b, g = trig_moments(mu)
    if g < 1e-12:
        raise DegenerateAlignment(f"order parameter {g:.3e} too small to align")
    z_star = float(np.arctan2(b, a))
    return translate(mu, -z_star), z_star


def dist_to_uniform(mu):
    """Moment distance to the uniform distribution.

    d(mu) = max(|mu(cos)|, |mu(sin)|, |mu(sin*cos)|, |mu(cos^2) - 1/2|).
    Zero exactly when the four moments vanish; controls the low harmonics
    that drive the mean-field coupling.
    """
    x, d = mu.grid.x, mu.density
    cx, sx = np.cos(x), np.sin(x)
    m1 = mu.grid.integrate(cx * d)
    m2 = mu.grid.integrate(sx * d)
    m3 = mu.grid.integrate(sx * cx * d)
    m4 = mu.grid.integrate(cx * cx * d) - 0.5
    return float(max(abs(m1), abs(m2), abs(m3), abs(m4)))


def running_cost(x, mu):
    """Mean misalignment cost 1 - a(mu) cos x - b(mu) sin x.

    Equals the average of 2*sin((x - y)/2)^2 over y ~ mu; takes values in
    [0, 2] for every probability measure.
    """
    a, b, _ = trig_moments(mu)
    return 1.0 - a * np.cos(x) - b * np.sin(x)


def min_translate_distance(mu, target, refine=64):
    """Smallest sup-density distance between mu and the translates of target.

    Scans all on-grid cyclic shifts of ``target`` and then refines around the
    best shift with interpolated off-grid translations.  Returns
    ``(distance, z_best)``.
    """
    grid = mu.grid
    if target.grid != grid:
        raise ValueError("measures must share a grid")
    d = mu.density
    best_k, best_val = 0, np.inf
    for k in range(grid.n):
        val = float(np.max(np.abs(np.roll(target.density, k) - d)))
        if val < best_val:
            best_k, best_val = k, val
    z0 = best_k * grid.h
    best_z = z0
    for z in np.linspace(z0 - grid.h, z0 + grid.h, refine):
        val = float(np.max(np.abs(translate(target, z).density - d)))
        if val < best_val:
            best_val, best_z = val, z
    return best_val, best_z % TWO_PI


def wrapped_gaussian(grid, center, std, n_wraps=8):
    """Gaussian bump wrapped around the torus, normalized on the grid."""
    x = grid.x
    vals = np.zeros(grid.n)
    for k in range(-n_wraps, n_wraps + 1):
        vals += np.exp(-0.5 * ((x - center - TWO_PI * k) / std) ** 2)
    return Measure.from_values(grid, vals)


def _indicator_cell_average(grid, intervals):
    lo_edges = grid.x - grid.h / 2.0
    hi_edges = grid.x + grid.h / 2.0
    out = np.zeros(grid.n)
    for a, b in intervals:
        out += np.clip(np.minimum(hi_edges, b) - np.maximum(lo_edges, a), 0.0, None)
        # cells wrap at x=0; account for the copy of the interval shifted by 2*pi
        out += np.clip(
            np.minimum(hi_edges, b - TWO_PI) - np.maximum(lo_edges, a - TWO_PI), 0.0, None
        )
    return out / grid.h


STANDARD_DENSITIES = ("uniform", "exp_cos", "exp_neg_sin", "two_cluster")


def standard_density(name, grid):
    """Named initial distributions used by the experiments and the CLI.

    uniform      1/(2*pi)
    exp_cos      proportional to exp(cos x)
    exp_neg_sin  proportional to exp(-sin x)
    two_cluster  normalized indicator of [pi/4, pi/4 + pi/10] u [pi, pi + pi/10]
    """
    if name == "uniform":
        return Measure.uniform(grid)
    if name == "exp_cos":
        return Measure.from_values(grid, np.exp(np.cos(grid.x)))
    if name == "exp_neg_sin":
        return Measure.from_values(grid, np.exp(-np.sin(grid.x)))
    if name == "two_cluster":
        intervals = [
            (np.pi / 4.0, np.pi / 4.0 + np.pi / 10.0),
            (np.pi, np.pi + np.pi / 10.0),
        ]
        return Measure.from_values(grid, _indicator_cell_average(grid, intervals))
    raise ConfigError(f"unknown density name {name!r}; choose from {STANDARD_DENSITIES}")
