"""Gibbs measures, the self-consistency map, and its fixed points."""

import numpy as np
import pytest

from kmfg.fixedpoint import (
    big_f,
    bifurcation_scan,
    find_fixed_points,
    fp_flux_residual,
    gibbs_measure,
    slope_at_zero,
    stationary_profile,
)
from kmfg.hjb import solve_stationary_hjb
from kmfg.torus import Grid, Measure, Params, trig_moments

P = Params(beta=0.5, sigma=1.0, kappa=2.0)
GRID = Grid(256)

# coordinates embedded in the published response-curve figure (kappa = 2)
CURVE_POINTS = [
    (0.04081632653061224, 0.08155104457896493),
    (0.5306122448979592, 0.8977674511860316),
    (1.0204081632653061, 1.2963903526174931),
    (2.0, 1.5630918092614259),
]


class TestGibbsMeasure:
    def test_zero_value_gives_uniform(self):
        vf = solve_stationary_hjb(0.0, P, GRID)
        mu = gibbs_measure(vf, P)
        assert np.max(np.abs(mu.density - 1.0 / (2 * np.pi))) <= 1e-12

    @pytest.mark.parametrize("gamma", [0.2, 1.469, 5.0])
    def test_pointwise_exponential_form(self, gamma):
        vf = solve_stationary_hjb(gamma, P, GRID)
        mu = gibbs_measure(vf, P)
        weights = np.exp(-2.0 * vf.v.values / P.sigma**2)
        z = GRID.h * weights.sum()
        assert np.max(np.abs(mu.density - weights / z)) <= 1e-12

    @pytest.mark.parametrize("gamma", [0.2, 1.469, 5.0, 50.0])
    def test_stationary_flux_annihilated(self, gamma):
        vf = solve_stationary_hjb(gamma, P, GRID)
        mu = gibbs_measure(vf, P)
        assert fp_flux_residual(vf, mu, P) <= 1e-8

    def test_even_measure_has_zero_sin_moment(self):
        prof = stationary_profile(1.469, P, GRID)
        assert abs(prof.b) <= 1e-9

    def test_density_extrema_match_published_profile(self):
        # published stationary profile at the figure's marked amplitude;
        # the plot centers the trough, ours the peak: extrema are
        # translation invariant so only the values are compared
        prof = stationary_profile(1.469, P, GRID)
        assert prof.mu.density.max() == pytest.approx(0.52120, abs=5e-3)
        assert prof.mu.density.min() == pytest.approx(0.002734, abs=5e-4)


class TestBigF:
    def test_zero_is_fixed(self):
        assert abs(big_f(2.0, 0.0, P, GRID)) < 1e-14

    @pytest.mark.parametrize("gamma,expected", CURVE_POINTS)
    def test_curve_regression(self, gamma, expected):
        assert big_f(2.0, gamma, P, GRID) == pytest.approx(expected, abs=2e-3)

    def test_bounded_by_kappa(self):
        for gamma in np.linspace(0.0, 2.0, 9):
            assert abs(big_f(2.0, gamma, P, GRID)) <= 2.0

    def test_continuity_modulus(self):
        # |F(gamma + delta) - F(gamma)| <= kappa delta / beta, and the
        # increment halves along with delta (linear modulus)
        rng = np.random.default_rng(7)
        delta = 1e-3
        for gamma in rng.uniform(0.0, 2.0, 10):
            f0 = big_f(2.0, gamma, P, GRID)
            f1 = big_f(2.0, gamma + delta, P, GRID)
            f2 = big_f(2.0, gamma + delta / 2.0, P, GRID)
            assert abs(f1 - f0) <= 2.0 * delta / P.beta + 5e-8
            ratio = abs(f2 - f0) / abs(f1 - f0)
            assert 0.45 <= ratio <= 0.55


class TestSlopeAtZero:
    def test_supercritical_slope(self):
        assert slope_at_zero(2.0, P, GRID) == pytest.approx(2.0, rel=0.01)

    def test_unit_slope_at_critical(self):
        assert slope_at_zero(1.0, P, GRID) == pytest.approx(1.0, rel=0.01)

    def test_other_parameters(self):
        # Richardson-extrapolated response slope vs kappa/kappa_c
        p = Params(beta=1.0, sigma=1.0, kappa=3.0)
        assert slope_at_zero(3.0, p, GRID) == pytest.approx(3.0 / p.kappa_c, rel=0.01)


class TestFindFixedPoints:
    def test_subcritical_only_zero(self):
        p = Params(beta=0.5, sigma=1.0, kappa=0.5)
        point = find_fixed_points(0.5, p, GRID)
        assert point.fixed_points == [0.0]

    def test_subcritical_dense_scan_oracle(self):
        # independent oracle: the residual stays negative on a fine scan
        p = Params(beta=0.5, sigma=1.0, kappa=0.5)
        gammas = np.arange(1e-3, 0.5 + 1e-9, 1e-3)
        warm = None
        worst = -np.inf
        for g in gammas:
            prof = stationary_profile(g, p, GRID, warm_start=warm)
            warm = prof.value.v.values
            worst = max(worst, 0.5 * prof.a - g)
        assert worst < 0.0

    def test_supercritical_pair(self):
        point = find_fixed_points(2.0, P, GRID)
        assert point.fixed_points[0] == 0.0
        assert len(point.fixed_points) == 2
        gamma_star = point.fixed_points[1]
        assert 1.44 <= gamma_star <= 1.50
        # self-consistency of every reported root
        for g in point.fixed_points[1:]:
            assert abs(big_f(2.0, g, P, GRID) - g) <= 1e-8
        # order parameter identity g(mu) = gamma/kappa
        assert point.order_parameters[1] == pytest.approx(gamma_star / 2.0, abs=1e-8)

    def test_critical_point_scan_outcome(self):
        # tangential case: the default scan finds no positive root
        p = Params(beta=0.5, sigma=1.0, kappa=1.0)
        point = find_fixed_points(1.0, p, GRID)
        assert point.fixed_points == [0.0]


class TestBifurcationScan:
    def test_subcritical_range(self):
        points = bifurcation_scan(0.2, 0.9, 4, P, GRID)
        assert len(points) == 4
        assert all(pt.fixed_points == [0.0] for pt in points)

    def test_supercritical_range(self):
        points = bifurcation_scan(1.1, 3.0, 5, P, GRID)
        assert all(pt.gamma_star > 0.0 for pt in points)
        stars = [pt.gamma_star for pt in points]
        assert all(b >= a - 1e-8 for a, b in zip(stars, stars[1:]))

    def test_kappa_two_entry(self):
        points = bifurcation_scan(1.0, 2.0, 3, P, GRID)
        assert 1.44 <= points[-1].gamma_star <= 1.50


class TestConcentration:
    def test_mass_ladder_monotone(self):
        masses = []
        for gamma in (10.0, 100.0, 1000.0, 10000.0):
            vf = solve_stationary_hjb(gamma, P, GRID)
            mu = gibbs_measure(vf, P)
            masses.append(mu.mass_in_interval(-0.5, 0.5))
        assert all(b >= a for a, b in zip(masses, masses[1:]))
        assert masses[-1] >= 0.99
