"""Periodic finite-difference operators and banded linear algebra (internal).

Everything here works on plain arrays of length n indexed by the grid point
j, with wrap-around adjacency.  The transport operator uses exponentially
fitted (Scharfetter-Gummel) face fluxes so that the Gibbs density of the
drift potential is an exact discrete steady state.
"""

import numpy as np
from scipy.linalg import solve_banded


def d1(values, h):
    """Second-order central first difference, periodic."""
    return (np.roll(values, -1) - np.roll(values, 1)) / (2.0 * h)


def d2(values, h):
    """Second-order central second difference, periodic."""
    return (np.roll(values, -1) - 2.0 * values + np.roll(values, 1)) / (h * h)


def bernoulli(z):
    """B(z) = z / (exp(z) - 1), with the series branch near zero."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < 1e-8
    safe = np.where(small, 1.0, z)
    out = np.where(small, 1.0 - z / 2.0 + z * z / 12.0, safe / np.expm1(safe))
    return out


def transport_coeffs(v, sigma, h):
    """Tridiagonal rows of the drift-diffusion divergence operator L.

    The flux through face j+1/2 is D/h * (B(z_j) f_j - B(-z_j) f_{j+1}) with
    D = sigma^2/2 and z_j = 2 (v_{j+1} - v_j) / sigma^2, so that L f = 0 is
    solved exactly by f proportional to exp(-2 v / sigma^2).  Returns
    (lower, diag, upper) where row j of L reads
    lower_j * f_{j-1} + diag_j * f_j + upper_j * f_{j+1} (periodic indices).
    """
    dcoef = sigma * sigma / 2.0
    z = 2.0 * (np.roll(v, -1) - v) / (sigma * sigma)
    bp = bernoulli(z)
    bm = bernoulli(-z)
    scale = dcoef / (h * h)
    diag = scale * (bp + np.roll(bm, 1))
    upper = -scale * bm
    lower = -scale * np.roll(bp, 1)
    return lower, diag, upper


def apply_tridiag_periodic(lower, diag, upper, f):
    """y_j = lower_j f_{j-1} + diag_j f_j + upper_j f_{j+1}, periodic."""
    return lower * np.roll(f, 1) + diag * f + upper * np.roll(f, -1)


def solve_tridiag_periodic(lower, diag, upper, rhs):
    """Solve the periodic tridiagonal system A x = rhs.

    Row j of A is (lower_j, diag_j, upper_j) acting on (x_{j-1}, x_j,
    x_{j+1}) with wrap-around, i.e. corner entries A[0, n-1] = lower_0 and
    A[n-1, 0] = upper_{n-1}.  Uses the Sherman-Morrison correction of a
    strictly banded solve; supports a 1-D or 2-D (stacked columns) rhs.
    """
    n = diag.shape[0]
    alpha = lower[0]
    beta = upper[n - 1]
    gamma = -diag[0]

    bdiag = diag.copy()
    bdiag[0] = diag[0] - gamma
    bdiag[n - 1] = diag[n - 1] - alpha * beta / gamma

    ab = np.zeros((3, n))
    ab[0, 1:] = upper[:-1]
    ab[1, :] = bdiag
    ab[2, :-1] = lower[1:]

    u = np.zeros(n)
    u[0] = gamma
    u[n - 1] = beta

    rhs = np.asarray(rhs, dtype=float)
    single = rhs.ndim == 1
    cols = rhs.reshape(n, -1)
    stacked = np.column_stack([cols, u])
    sol = solve_banded((1, 1), ab, stacked)
    y, q = sol[:, :-1], sol[:, -1]

    vy = y[0, :] + (alpha / gamma) * y[n - 1, :]
    vq = q[0] + (alpha / gamma) * q[n - 1]
    x = y - np.outer(q, vy / (1.0 + vq))
    return x[:, 0] if single else x


def newton_jacobian_rows(v_x, beta, sigma, h):
    """Tridiagonal rows of beta*I - (sigma^2/2) D2 + diag(v_x) D1."""
    n = v_x.shape[0]
    visc = sigma * sigma / 2.0 / (h * h)
    adv = v_x / (2.0 * h)
    diag = np.full(n, beta + 2.0 * visc)
    upper = -visc + adv
    lower = -visc - adv
    return lower, diag, upper
