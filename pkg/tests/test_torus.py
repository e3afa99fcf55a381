"""Grid calculus, moments, translations, and the distance to uniform."""

import numpy as np
import pytest

from kmfg.errors import DegenerateAlignment
from kmfg.torus import (
    Grid,
    Measure,
    Params,
    align,
    dist_to_uniform,
    running_cost,
    standard_density,
    translate,
    trig_moments,
    wrapped_gaussian,
)

# high-precision quadrature oracle of the Bessel-ratio moment I1(1)/I0(1)
# (mpmath, 30 digits) for the density proportional to exp(cos x)
BESSEL_RATIO_1 = 0.446389965896534507
# oracle values for the density proportional to exp(-sin x):
# moments (a, b, sin*cos, cos^2 - 1/2) by the same quadrature
EXP_NEG_SIN_B = -0.446389965896534507
EXP_NEG_SIN_C2 = -0.053610034103465493


def random_measure(grid, rng, harmonics=4):
    """Smooth random positive density from a low-order trig polynomial."""
    vals = np.ones(grid.n)
    for k in range(1, harmonics + 1):
        vals += (rng.uniform(-0.8, 0.8) * np.cos(k * grid.x)
                 + rng.uniform(-0.8, 0.8) * np.sin(k * grid.x)) / (k * harmonics)
    vals = np.exp(vals)
    return Measure.from_values(grid, vals)


class TestGridAndTypes:
    def test_grid_points(self):
        grid = Grid(16)
        assert grid.h == pytest.approx(2 * np.pi / 16)
        assert grid.x[0] == 0.0
        assert grid.x[-1] == pytest.approx(2 * np.pi - grid.h)

    @pytest.mark.parametrize("n", [8, 15, 17, 0])
    def test_grid_rejects_bad_sizes(self, n):
        with pytest.raises(ValueError):
            Grid(n)

    def test_measure_validation(self):
        grid = Grid(32)
        with pytest.raises(ValueError):
            Measure(grid, np.full(grid.n, 1.0))  # mass 2*pi
        with pytest.raises(ValueError):
            Measure(grid, -np.full(grid.n, 1.0 / (2 * np.pi)))

    def test_params_derived(self):
        p = Params(beta=0.5, sigma=1.0, kappa=2.0)
        assert p.kappa_c == pytest.approx(1.0)
        assert p.rho == pytest.approx(1.0)
        p2 = Params(beta=0.5, sigma=2.0)
        assert p2.kappa_c == pytest.approx(0.5 * 4 + 16 / 2)
        assert p2.rho == pytest.approx(p2.kappa_c / p2.sigma**2)

    def test_quadrature_exact_for_low_harmonics(self):
        grid = Grid(16)
        x = grid.x
        assert grid.integrate(np.ones_like(x)) == pytest.approx(2 * np.pi, abs=1e-12)
        assert grid.integrate(np.cos(x)) == pytest.approx(0.0, abs=1e-12)
        assert grid.integrate(np.sin(x)) == pytest.approx(0.0, abs=1e-12)
        assert grid.integrate(np.cos(x) ** 2) == pytest.approx(np.pi, abs=1e-12)
        assert grid.integrate(np.sin(x) * np.cos(x)) == pytest.approx(0.0, abs=1e-12)


class TestTrigMoments:
    def test_uniform(self):
        a, b, g = trig_moments(Measure.uniform(Grid(64)))
        assert abs(a) < 1e-14 and abs(b) < 1e-14 and g < 1e-14

    def test_exp_cos_bessel_ratio(self):
        mu = standard_density("exp_cos", Grid(256))
        a, b, _ = trig_moments(mu)
        assert a == pytest.approx(BESSEL_RATIO_1, abs=1e-12)
        assert b == pytest.approx(0.0, abs=1e-14)

    def test_point_mass_at_half_pi(self):
        mu = wrapped_gaussian(Grid(256), np.pi / 2, 0.05)
        a, b, g = trig_moments(mu)
        assert abs(a) < 1e-10
        assert b == pytest.approx(1.0, abs=2e-3)
        assert g == pytest.approx(1.0, abs=2e-3)


class TestTranslate:
    def test_uniform_invariant(self):
        mu = Measure.uniform(Grid(64))
        out = translate(mu, 1.2345)
        assert np.allclose(out.density, mu.density, atol=1e-14)

    def test_on_grid_shift_is_exact_roll(self):
        grid = Grid(64)
        rng = np.random.default_rng(0)
        mu = random_measure(grid, rng)
        out = translate(mu, grid.h)
        assert np.array_equal(out.density, np.roll(mu.density, 1))

    def test_round_trip(self):
        grid = Grid(256)
        rng = np.random.default_rng(1)
        for _ in range(5):
            mu = random_measure(grid, rng)
            z = rng.uniform(0, 2 * np.pi)
            back = translate(translate(mu, z), -z)
            assert np.max(np.abs(back.density - mu.density)) < 5.0 * grid.h**2

    def test_order_parameter_invariance(self):
        # on-grid rotations preserve g exactly; off-grid ones only up to the
        # O(h^2) warp of the positivity-preserving linear interpolation
        grid = Grid(256)
        rng = np.random.default_rng(2)
        for _ in range(5):
            mu = random_measure(grid, rng)
            _, _, g0 = trig_moments(mu)
            k = int(rng.integers(1, grid.n))
            _, _, g_on = trig_moments(translate(mu, k * grid.h))
            assert abs(g_on - g0) < 1e-12
            _, _, g_off = trig_moments(translate(mu, rng.uniform(0, 2 * np.pi)))
            assert abs(g_off - g0) < 5.0 * grid.h**2

    def test_mass_preserved(self):
        grid = Grid(128)
        mu = random_measure(grid, np.random.default_rng(3))
        out = translate(mu, 0.777)
        assert abs(grid.integrate(out.density) - 1.0) <= 1e-12


class TestAlign:
    def test_exp_sin_aligns_to_exp_cos(self):
        grid = Grid(256)
        mu = Measure.from_values(grid, np.exp(np.sin(grid.x)))
        aligned, z_star = align(mu)
        assert z_star == pytest.approx(np.pi / 2, abs=1e-12)
        target = standard_density("exp_cos", grid)
        assert np.max(np.abs(aligned.density - target.density)) < 5.0 * grid.h**2
        a, b, g = trig_moments(aligned)
        assert abs(b) < 1e-10
        assert a == pytest.approx(g, abs=1e-10)

    def test_already_aligned_unchanged(self):
        grid = Grid(128)
        mu = standard_density("exp_cos", grid)
        aligned, z_star = align(mu)
        assert abs(z_star) < 1e-12
        assert np.array_equal(aligned.density, mu.density)

    def test_uniform_degenerate(self):
        with pytest.raises(DegenerateAlignment):
            align(Measure.uniform(Grid(64)))


class TestDistToUniform:
    def test_uniform_zero(self):
        assert dist_to_uniform(Measure.uniform(Grid(64))) < 1e-14

    def test_spike_at_zero(self):
        mu = wrapped_gaussian(Grid(512), 0.0, 0.02)
        assert dist_to_uniform(mu) == pytest.approx(1.0, abs=1e-3)

    def test_exp_neg_sin_dominated_by_sin_moment(self):
        mu = standard_density("exp_neg_sin", Grid(256))
        a, b, _ = trig_moments(mu)
        assert b == pytest.approx(EXP_NEG_SIN_B, abs=1e-12)
        assert dist_to_uniform(mu) == pytest.approx(abs(EXP_NEG_SIN_B), abs=1e-12)
        # the runner-up moment is |mu(cos^2) - 1/2|, also fixed by the oracle
        x = mu.grid.x
        c2 = mu.grid.integrate(np.cos(x) ** 2 * mu.density) - 0.5
        assert c2 == pytest.approx(EXP_NEG_SIN_C2, abs=1e-12)

    def test_zero_iff_moments_vanish(self):
        grid = Grid(128)
        rng = np.random.default_rng(4)
        x = grid.x
        for _ in range(10):
            mu = random_measure(grid, rng)
            d = dist_to_uniform(mu)
            moments = [
                grid.integrate(np.cos(x) * mu.density),
                grid.integrate(np.sin(x) * mu.density),
                grid.integrate(np.sin(x) * np.cos(x) * mu.density),
                grid.integrate(np.cos(x) ** 2 * mu.density) - 0.5,
            ]
            assert d == pytest.approx(max(abs(m) for m in moments), abs=1e-15)
            assert (d < 1e-14) == all(abs(m) < 1e-14 for m in moments)
        # third harmonic has all four moments zero without being uniform
        mu3 = Measure.from_values(grid, 1.0 + 0.5 * np.cos(3 * x))
        assert dist_to_uniform(mu3) < 1e-14


class TestRunningCost:
    def test_uniform_gives_one(self):
        mu = Measure.uniform(Grid(64))
        x = np.linspace(0, 2 * np.pi, 7)
        assert np.allclose(running_cost(x, mu), 1.0, atol=1e-14)

    def test_point_mass_extremes(self):
        mu = wrapped_gaussian(Grid(512), 0.0, 0.02)
        assert running_cost(0.0, mu) == pytest.approx(0.0, abs=1e-3)
        assert running_cost(np.pi, mu) == pytest.approx(2.0, abs=1e-3)

    def test_agrees_with_direct_quadrature(self):
        grid = Grid(256)
        mu = random_measure(grid, np.random.default_rng(5))
        for x0 in (0.3, 2.0, 5.1):
            direct = grid.integrate(2.0 * np.sin((x0 - grid.x) / 2.0) ** 2 * mu.density)
            assert running_cost(x0, mu) == pytest.approx(direct, abs=1e-10)

    def test_range(self):
        grid = Grid(128)
        rng = np.random.default_rng(6)
        for _ in range(10):
            mu = random_measure(grid, rng)
            vals = running_cost(grid.x, mu)
            assert np.all(vals >= -1e-10) and np.all(vals <= 2.0 + 1e-10)


def test_two_cluster_density_support():
    grid = Grid(256)
    mu = standard_density("two_cluster", grid)
    inside = mu.mass_in_interval(np.pi / 4 - 0.05, np.pi / 4 + np.pi / 10 + 0.05)
    inside += mu.mass_in_interval(np.pi - 0.05, np.pi + np.pi / 10 + 0.05)
    assert inside == pytest.approx(1.0, abs=1e-12)
