"""Tests for the benchmark scenarios and the manufactured forcing."""

import numpy as np
import pytest

from vpspectral.field import charge_density
from vpspectral.phase_space import PhaseGrid
from vpspectral.scenarios import (
    ScenarioConfig,
    ScenarioKind,
    init_field,
    manufactured_exact,
    manufactured_source,
)


@pytest.fixture(scope="module")
def mgrid():
    return PhaseGrid.create(32, 32, (0.0, 2 * np.pi), (-np.pi, np.pi))


@pytest.fixture(scope="module")
def tgrid():
    return PhaseGrid.create(32, 128, (0.0, 4 * np.pi), (-5.0, 5.0))


@pytest.fixture(scope="module")
def lgrid():
    return PhaseGrid.create(32, 64, (0.0, 4 * np.pi), (-10.0, 10.0))


class TestScenarioConfig:
    def test_two_stream_defaults(self):
        cfg = ScenarioConfig.two_stream()
        assert cfg.params["alpha"] == pytest.approx(1 / np.sqrt(8))
        assert cfg.params["beta"] == 1.0
        assert cfg.params["epsilon"] == 1e-3
        assert cfg.params["kappa"] == 0.5
        assert cfg.x_interval == (0.0, 4 * np.pi)
        assert cfg.v_interval == (-5.0, 5.0)

    def test_wavenumber_must_be_grid_periodic(self):
        with pytest.raises(ValueError):
            ScenarioConfig.landau(kappa=0.3)
        with pytest.raises(ValueError):
            ScenarioConfig.two_stream(kappa=0.75)
        ScenarioConfig.landau(kappa=1.0)  # two full periods on [0, 4*pi]

    def test_parameter_signs(self):
        with pytest.raises(ValueError):
            ScenarioConfig.two_stream(alpha=-0.1)
        with pytest.raises(ValueError):
            ScenarioConfig.landau(gamma=-0.5)

    def test_kind_parse(self):
        assert ScenarioKind.parse("Landau") is ScenarioKind.LANDAU
        with pytest.raises(ValueError):
            ScenarioKind.parse("vortex")


class TestInitField:
    def test_manufactured_node_value(self, mgrid):
        f0 = init_field(ScenarioConfig.manufactured(), mgrid)
        # cos(0) = 1 kills the spatial bracket at x = 0
        assert f0.values[0, 16] == pytest.approx(0.0, abs=1e-15)

    def test_landau_node_value(self, lgrid):
        f0 = init_field(ScenarioConfig.landau(), lgrid)
        expected = (1 / np.sqrt(2 * np.pi)) * 1.01
        assert f0.values[0, 32] == pytest.approx(expected, rel=1e-12)
        assert expected == pytest.approx(0.402926, abs=1e-5)

    def test_two_stream_value(self):
        # grid with an exact node at v = 1
        grid = PhaseGrid.create(32, 100, (0.0, 4 * np.pi), (-5.0, 5.0))
        f0 = init_field(ScenarioConfig.two_stream(), grid)
        j = np.argmin(np.abs(grid.vgrid.nodes - 1.0))
        assert grid.vgrid.nodes[j] == pytest.approx(1.0, abs=1e-14)
        expected = (1 / np.sqrt(np.pi)) * (1 + np.exp(-16.0)) * 1.001
        assert f0.values[0, j] == pytest.approx(expected, rel=1e-12)
        assert expected == pytest.approx(0.564754, abs=1e-5)

    def test_domain_mismatch(self, tgrid):
        with pytest.raises(ValueError):
            init_field(ScenarioConfig.landau(), tgrid)

    def test_neutrality(self, mgrid, tgrid, lgrid):
        cases = [
            (ScenarioConfig.manufactured(), mgrid),
            (ScenarioConfig.two_stream(), tgrid),
            (ScenarioConfig.landau(), lgrid),
        ]
        for cfg, grid in cases:
            rho = charge_density(init_field(cfg, grid))
            assert abs(rho.values.mean() - 1.0) < 1e-8

    def test_two_stream_even_in_velocity(self, tgrid):
        f0 = init_field(ScenarioConfig.two_stream(), tgrid)
        vals = f0.values
        # nodes j and M - j carry opposite velocities
        for j in range(1, 128):
            assert vals[:, j] == pytest.approx(vals[:, 128 - j], abs=1e-14)

    def test_exact_space_periodicity(self, tgrid):
        cfg = ScenarioConfig.two_stream()
        f0 = init_field(cfg, tgrid)
        length = cfg.x_interval[1] - cfg.x_interval[0]
        kap = cfg.params["kappa"]
        shifted = np.cos(kap * (tgrid.xgrid.nodes + length))
        assert np.allclose(shifted, np.cos(kap * tgrid.xgrid.nodes), atol=1e-12)


class TestManufacturedExact:
    def test_distribution_value(self, mgrid):
        f, _ = manufactured_exact(0.0, mgrid)
        i = np.argmin(np.abs(mgrid.xgrid.nodes - np.pi / 2))
        j = np.argmin(np.abs(mgrid.vgrid.nodes))
        assert f.values[i, j] == pytest.approx(4 / np.sqrt(np.pi), rel=1e-12)
        assert 4 / np.sqrt(np.pi) == pytest.approx(2.256758, abs=1e-6)

    def test_field_value(self, mgrid):
        _, e = manufactured_exact(0.0, mgrid)
        i = np.argmin(np.abs(mgrid.xgrid.nodes - np.pi / 4))
        assert e[i] == pytest.approx(0.5, abs=1e-14)

    def test_gauss_consistency(self, mgrid):
        from vpspectral.spectral import derivative_matrix, apply_derivative

        for t in (0.0, 0.37, 1.0):
            f, e = manufactured_exact(t, mgrid)
            rho = charge_density(f)
            d1 = derivative_matrix(mgrid.xgrid, 1)
            residual = apply_derivative(d1, e) - (1.0 - rho.values)
            assert np.max(np.abs(residual)) < 1e-8

    def test_wrong_domain(self, tgrid):
        with pytest.raises(ValueError):
            manufactured_exact(0.0, tgrid)


class TestManufacturedSource:
    def test_residual_against_finite_differences(self):
        # independent oracle: g must equal the advection residual of the
        # exact solution, checked by centered differences
        src = manufactured_source()
        rng = np.random.default_rng(42)
        ts = rng.uniform(0, 1, 200)
        xs = rng.uniform(0, 2 * np.pi, 200)
        vs = rng.uniform(-np.pi, np.pi, 200)

        def f(t, x, v):
            u = 2 * x - 2 * np.pi * t
            return 2 / np.sqrt(np.pi) * (1 - np.cos(u)) * np.exp(-4 * v**2)

        h = 1e-5
        ft = (f(ts + h, xs, vs) - f(ts - h, xs, vs)) / (2 * h)
        fx = (f(ts, xs + h, vs) - f(ts, xs - h, vs)) / (2 * h)
        fv = (f(ts, xs, vs + h) - f(ts, xs, vs - h)) / (2 * h)
        e = 0.5 * np.sin(2 * xs - 2 * np.pi * ts)
        residual = ft + vs * fx - e * fv - src.g(ts, xs, vs)
        assert np.max(np.abs(residual)) < 1e-7

    def test_primitive_differentiates_to_source(self):
        src = manufactured_source()
        rng = np.random.default_rng(7)
        xs = rng.uniform(0, 2 * np.pi, 100)
        vs = rng.uniform(-np.pi, np.pi, 100)
        assert src.primitive_residual(0.3, xs, vs) < 1e-6

    def test_velocity_integral_matches_density_rate(self, mgrid):
        # integral of g over v equals the time derivative of the density
        src = manufactured_source()
        from vpspectral.spectral import quadrature

        for t in (0.0, 0.21):
            for i in (0, 5, 13):
                x = mgrid.xgrid.nodes[i]
                gv = src.g(t, np.full(32, x), mgrid.vgrid.nodes)
                integral = quadrature(mgrid.vgrid, gv)
                expected = -2 * np.pi * np.sin(2 * x - 2 * np.pi * t)
                assert integral == pytest.approx(expected, abs=1e-8)
