"""Pure-numpy Euler-Maruyama kernel, fallback for the compiled extension.

Expressions are written in the same operation order as the Cython kernel so
both backends produce identical phase trajectories from the same noise.
The cost trigonometry is evaluated in float32 to match the compiled path.
"""

import math

import numpy as np

TWO_PI = 6.283185307179586


def em_chunk(phases, cost, vx_rows, row_lo, row_w, gamma, eta, noise,
             h, dt, sigma_sqdt, beta, t0, alpha_offset, accumulate):
    """Advance all phases over noise.shape[0] Euler steps, in place."""
    n_steps = noise.shape[0]
    n_grid = vx_rows.shape[1]
    n_rows = vx_rows.shape[0]
    for k in range(n_steps):
        r0 = int(row_lo[k])
        w = float(row_w[k])
        r1 = r0 + 1 if r0 + 1 < n_rows else r0
        x = phases
        u = x / h
        j = u.astype(np.intp)
        np.minimum(j, n_grid - 1, out=j)
        frac = u - j
        j1 = j + 1
        j1[j1 == n_grid] = 0
        v0, v1 = vx_rows[r0], vx_rows[r1]
        vx = (1.0 - w) * ((1.0 - frac) * v0[j] + frac * v0[j1]) \
            + w * ((1.0 - frac) * v1[j] + frac * v1[j1])
        alpha = -vx + alpha_offset
        if accumulate:
            disc = math.exp(-beta * (t0 + k * dt)) * dt
            x32 = x.astype(np.float32)
            running = -gamma[k] * np.cos(x32).astype(np.float64)
            if eta[k] != 0.0:
                running -= eta[k] * np.sin(x32).astype(np.float64)
            cost += disc * (running + 0.5 * alpha * alpha)
        x = x + dt * alpha + sigma_sqdt * noise[k].astype(np.float64, copy=False)
        x = np.fmod(x, TWO_PI)
        x[x < 0.0] += TWO_PI
        phases[:] = x
