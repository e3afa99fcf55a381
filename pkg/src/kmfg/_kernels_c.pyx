# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Euler-Maruyama kernel for particle ensembles.

Mirrors kmfg._kernels_py.em_chunk operation for operation so both backends
produce identical phase trajectories from the same noise array.  Noise may
be float32 or float64 (increments are promoted to double before use); the
running-cost trigonometry uses single-precision libm calls, which keeps the
cost estimator bias around 1e-7, far below any Monte-Carlo standard error.
"""

from libc.math cimport cosf, exp, fmod, sinf

import numpy as np

cimport numpy as cnp

cnp.import_array()

DEF TWO_PI = 6.283185307179586

ctypedef fused noise_t:
    float
    double


def em_chunk(double[::1] phases,
             double[::1] cost,
             const double[:, ::1] vx_rows,
             const long[::1] row_lo,
             const double[::1] row_w,
             const double[::1] gamma,
             const double[::1] eta,
             const noise_t[:, ::1] noise,
             double h,
             double dt,
             double sigma_sqdt,
             double beta,
             double t0,
             double alpha_offset,
             bint accumulate):
    """Advance all phases over noise.shape[0] Euler steps, in place.

    The drift is -v_x interpolated linearly in x (periodic) and in t between
    the rows of vx_rows selected by row_lo/row_w.  When ``accumulate`` is set
    the per-particle discounted running cost
    exp(-beta t) * (-gamma cos x - eta sin x + alpha^2/2) * dt
    is added to ``cost`` using the pre-step state.
    """
    cdef Py_ssize_t n_steps = noise.shape[0]
    cdef Py_ssize_t n_part = phases.shape[0]
    cdef Py_ssize_t n_grid = vx_rows.shape[1]
    cdef Py_ssize_t n_rows = vx_rows.shape[0]
    cdef Py_ssize_t k, i, j, j1, r0, r1
    cdef double x, u, frac, vx, alpha, disc, g, e, w
    cdef bint with_eta, blend

    with nogil:
        for k in range(n_steps):
            r0 = row_lo[k]
            w = row_w[k]
            r1 = r0 + 1 if r0 + 1 < n_rows else r0
            blend = w != 0.0
            g = gamma[k]
            e = eta[k]
            with_eta = e != 0.0
            disc = exp(-beta * (t0 + k * dt)) * dt
            for i in range(n_part):
                x = phases[i]
                u = x / h
                j = <Py_ssize_t> u
                if j > n_grid - 1:
                    j = n_grid - 1
                frac = u - j
                j1 = j + 1
                if j1 == n_grid:
                    j1 = 0
                if blend:
                    vx = (1.0 - w) * ((1.0 - frac) * vx_rows[r0, j] + frac * vx_rows[r0, j1]) \
                        + w * ((1.0 - frac) * vx_rows[r1, j] + frac * vx_rows[r1, j1])
                else:
                    vx = (1.0 - frac) * vx_rows[r0, j] + frac * vx_rows[r0, j1]
                alpha = -vx + alpha_offset
                if accumulate:
                    if with_eta:
                        cost[i] += disc * (-g * <double> cosf(<float> x)
                                           - e * <double> sinf(<float> x)
                                           + 0.5 * alpha * alpha)
                    else:
                        cost[i] += disc * (-g * <double> cosf(<float> x)
                                           + 0.5 * alpha * alpha)
                x = x + dt * alpha + sigma_sqdt * <double> noise[k, i]
                x = fmod(x, TWO_PI)
                if x < 0.0:
                    x += TWO_PI
                phases[i] = x
