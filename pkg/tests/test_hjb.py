"""Stationary HJB solver: residuals, bounds, symmetry, refinement."""

import numpy as np
import pytest

from kmfg.errors import NonConvergence
from kmfg.hjb import drift_field, hjb_residual, solve_stationary_hjb
from kmfg.torus import Grid, Params

P = Params(beta=0.5, sigma=1.0)
GRID = Grid(256)


def signed(grid):
    return grid.signed_x()


class TestSolve:
    def test_zero_forcing_gives_zero(self):
        vf = solve_stationary_hjb(0.0, P, GRID)
        assert np.all(vf.v.values == 0.0)
        assert np.all(vf.v_x.values == 0.0)
        assert vf.residual_norm == 0.0

    @pytest.mark.parametrize("gamma", [0.1, 1.0, 2.0, 10.0, 100.0])
    def test_residual_below_tolerance(self, gamma):
        vf = solve_stationary_hjb(gamma, P, GRID)
        assert vf.residual_norm <= max(1e-10, 1e-11 * gamma)
        res = hjb_residual(vf.v.values, gamma, P, GRID)
        assert np.max(np.abs(res)) == pytest.approx(vf.residual_norm)

    def test_small_gamma_linearization(self):
        # v = -2 gamma cos/(2 beta + sigma^2) + h with |h| <= gamma^2/(2 beta^3)
        gamma = 0.01
        vf = solve_stationary_hjb(gamma, P, GRID)
        lin = -2.0 * gamma * np.cos(GRID.x) / (2.0 * P.beta + P.sigma**2)
        bound = gamma**2 / (2.0 * P.beta**3)
        assert np.max(np.abs(vf.v.values - lin)) <= bound

    def test_even_symmetry(self):
        vf = solve_stationary_hjb(1.469, P, GRID)
        v = vf.v.values
        mirrored = np.concatenate([[v[0]], v[:0:-1]])
        assert np.max(np.abs(v - mirrored)) <= 1e-8

    def test_monotone_in_cosine_ordering(self):
        # nondecreasing in |x| on [0, pi], strictly split at the antipode
        for gamma in (0.3, 1.469, 5.0):
            v = solve_stationary_hjb(gamma, P, GRID).v.values
            half = GRID.n // 2
            assert np.all(np.diff(v[: half + 1]) >= -1e-9)
            assert v[half] - v[0] > 0.0

    @pytest.mark.parametrize("gamma", [0.1, 1.0, 10.0, 100.0])
    def test_quadratic_upper_bound(self, gamma):
        vf = solve_stationary_hjb(gamma, P, GRID)
        x = signed(GRID)
        bound = -gamma / P.beta + np.sqrt(gamma) * (x**2 / 2.0 + P.sigma**2 / (2.0 * P.beta))
        assert np.all(vf.v.values <= bound + 1e-6)

    def test_grid_refinement_envelope(self):
        # second-order scheme: differences scale like gamma * h^2
        # (measured calibration; see the repository notes)
        for gamma in (0.1, 1.0, 10.0):
            v256 = solve_stationary_hjb(gamma, P, Grid(256)).v.values
            v512 = solve_stationary_hjb(gamma, P, Grid(512)).v.values
            diff = np.max(np.abs(v256 - v512[::2]))
            assert diff <= 2.5e-4 * gamma**1.5 + 1e-6

    def test_nonconvergence_raises(self):
        with pytest.raises(NonConvergence) as err:
            solve_stationary_hjb(5.0, P, GRID, max_iter=1)
        assert err.value.iterations >= 1
        assert err.value.residual > 0

    def test_negative_gamma_rejected(self):
        with pytest.raises(ValueError):
            solve_stationary_hjb(-1.0, P, GRID)


class TestDriftField:
    def test_zero_at_zero_forcing(self):
        assert np.all(drift_field(solve_stationary_hjb(0.0, P, GRID)).values == 0.0)

    def test_odd_function(self):
        dr = drift_field(solve_stationary_hjb(2.0, P, GRID)).values
        mirrored = np.concatenate([[dr[0]], dr[:0:-1]])
        assert np.max(np.abs(dr + mirrored)) <= 1e-8

    @pytest.mark.parametrize("gamma", [0.5, 1.0, 4.0])
    def test_maximum_principle_envelope(self, gamma):
        dr = drift_field(solve_stationary_hjb(gamma, P, GRID)).values
        assert np.max(np.abs(dr)) <= gamma / P.beta + 1e-9


def test_continuation_matches_direct_solve():
    # the ladder used for gamma > 10 must land on the same root
    grid = Grid(256)
    via_ladder = solve_stationary_hjb(40.0, P, grid).v.values
    direct = solve_stationary_hjb(40.0, P, grid, warm_start=via_ladder).v.values
    assert np.max(np.abs(via_ladder - direct)) <= 1e-7
