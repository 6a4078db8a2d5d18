"""Tests for the time-marching schemes."""

import numpy as np
import pytest

from vpspectral.diagnostics import (
    l2_relative_error,
    l2_relative_error_field,
    total_particles,
)
from vpspectral.field import charge_density, solve_field
from vpspectral.integrators import (
    CFLViolationError,
    SchemeKind,
    SourceTerm,
    TimeState,
    advance,
    bootstrap_history,
    cfl_max_dt,
    step_bdf2,
    step_bdf3,
    step_euler,
    step_onestep2,
)
from vpspectral.phase_space import DistributionField, PhaseGrid
from vpspectral.scenarios import (
    ScenarioConfig,
    init_field,
    manufactured_exact,
    manufactured_source,
)

ALL_STEPS = [
    (SchemeKind.EULER1, step_euler),
    (SchemeKind.BDF2, step_bdf2),
    (SchemeKind.BDF3, step_bdf3),
    (SchemeKind.ONESTEP2, step_onestep2),
]


@pytest.fixture(scope="module")
def mgrid():
    return PhaseGrid.create(32, 32, (0.0, 2 * np.pi), (-np.pi, np.pi))


@pytest.fixture(scope="module")
def tgrid():
    return PhaseGrid.create(32, 128, (0.0, 4 * np.pi), (-5.0, 5.0))


def uniform_maxwellian(grid):
    vals = np.exp(-0.5 * grid.vmesh**2) / np.sqrt(2 * np.pi)
    return DistributionField(vals, grid)


class TestSchemeKind:
    def test_parse(self):
        assert SchemeKind.parse("BDF2") is SchemeKind.BDF2
        with pytest.raises(ValueError):
            SchemeKind.parse("rk4")

    def test_history_depths(self):
        assert SchemeKind.EULER1.history_needed == 0
        assert SchemeKind.BDF2.history_needed == 1
        assert SchemeKind.BDF3.history_needed == 2
        assert SchemeKind.ONESTEP2.history_needed == 0


class TestCfl:
    def test_reference_bound(self):
        grid = PhaseGrid.create(32, 32, (0.0, 2 * np.pi), (-np.pi, np.pi))
        f = uniform_maxwellian(grid)
        state = TimeState.initial(f, 1e-3)
        # max |v| = pi, field-free: bound is 2*pi/(32*pi)
        assert cfl_max_dt(state) == pytest.approx(0.0625, rel=1e-10)

    def test_no_transport_is_unbounded(self):
        grid = PhaseGrid.create(8, 8, (0.0, 2 * np.pi), (0.0, 2 * np.pi))
        vals = np.ones(grid.shape)
        vals[:, :] = 1.0 / (2 * np.pi)
        state = TimeState.initial(DistributionField(vals, grid), 1e-3)
        # velocity nodes include 0 but also positive values; zero them out
        # by constructing a grid whose nodes are all zero is impossible, so
        # check the zero-denominator branch directly
        from vpspectral import integrators

        grid0 = PhaseGrid.create(8, 8, (0.0, 2 * np.pi), (0.0, 2 * np.pi))
        f0 = DistributionField(vals, grid0)
        st = TimeState.initial(f0, 1e-3)
        object.__setattr__(st.efield, "nodal", np.zeros(8))
        object.__setattr__(st.current.grid.vgrid, "nodes", np.zeros(8))
        assert cfl_max_dt(st) == np.inf

    def test_two_stream_bound_allows_benchmark_step(self, tgrid):
        f0 = init_field(ScenarioConfig.two_stream(), tgrid)
        state = TimeState.initial(f0, 1e-2)
        assert cfl_max_dt(state) >= 1e-2

    def test_violation_warns(self, mgrid):
        f0, _ = manufactured_exact(0.0, mgrid)
        state = TimeState.initial(f0, 10.0)
        with pytest.warns(RuntimeWarning):
            step_euler(state, manufactured_source())

    def test_strict_mode_raises(self, mgrid):
        f0, _ = manufactured_exact(0.0, mgrid)
        state = TimeState.initial(f0, 10.0)
        with pytest.raises(CFLViolationError):
            step_euler(state, manufactured_source(), strict_cfl=True)


class TestFixedPoints:
    def test_uniform_maxwellian_is_fixed(self):
        grid = PhaseGrid.create(16, 64, (0.0, 4 * np.pi), (-10.0, 10.0))
        f0 = uniform_maxwellian(grid)
        state = TimeState.initial(f0, 1e-2)
        state = bootstrap_history(state, SchemeKind.BDF3)
        for scheme, step in ALL_STEPS:
            new = step(state)
            drift = np.max(np.abs(new.current.values - state.current.values))
            assert drift < 1e-14, scheme.value


class TestSourceTerm:
    def test_primitive_consistency(self):
        src = manufactured_source()
        rng = np.random.default_rng(0)
        xs = rng.uniform(0, 2 * np.pi, 50)
        vs = rng.uniform(-np.pi, np.pi, 50)
        assert src.primitive_residual(0.5, xs, vs) < 1e-6

    def test_missing_primitive_rejected_by_onestep2(self, mgrid):
        f0, _ = manufactured_exact(0.0, mgrid)
        state = TimeState.initial(f0, 1e-2)
        src = SourceTerm(g=manufactured_source().g, G=None)
        with pytest.raises(ValueError):
            step_onestep2(state, src)


class TestHistory:
    def test_bdf_steps_require_history(self, mgrid):
        f0, _ = manufactured_exact(0.0, mgrid)
        state = TimeState.initial(f0, 1e-2)
        with pytest.raises(ValueError):
            step_bdf2(state)
        with pytest.raises(ValueError):
            step_bdf3(state)

    def test_bootstrap_depths(self, mgrid):
        f0, _ = manufactured_exact(0.0, mgrid)
        src = manufactured_source()
        state = TimeState.initial(f0, 1e-2)
        assert bootstrap_history(state, SchemeKind.EULER1, src) is state
        b2 = bootstrap_history(state, SchemeKind.BDF2, src, neutrality_fix=True)
        assert len(b2.history) == 1 and b2.k == 1
        b3 = bootstrap_history(state, SchemeKind.BDF3, src, neutrality_fix=True)
        assert len(b3.history) == 2 and b3.k == 2
        assert b3.t == pytest.approx(2e-2)

    def test_history_rotates(self, tgrid):
        f0 = init_field(ScenarioConfig.two_stream(), tgrid)
        state = TimeState.initial(f0, 1e-2)
        s1 = step_euler(state)
        s2 = step_euler(s1)
        s3 = step_euler(s2)
        assert len(s3.history) == 2
        assert s3.history[0].field is s2.current
        assert s3.history[1].field is s1.current


class TestMassConservation:
    def test_single_step_mass_drift(self, tgrid):
        f0 = init_field(ScenarioConfig.two_stream(), tgrid)
        state = TimeState.initial(f0, 5e-3)
        state = bootstrap_history(state, SchemeKind.BDF3)
        q_ref = total_particles(state.current)
        for scheme, step in ALL_STEPS:
            new = step(state)
            drift = abs(total_particles(new.current) - q_ref) / abs(q_ref)
            assert drift < 1e-12, scheme.value


class TestAdvance:
    def test_observer_count(self, tgrid):
        f0 = init_field(ScenarioConfig.two_stream(), tgrid)
        state = TimeState.initial(f0, 1e-2)
        seen = []
        advance(
            state,
            SchemeKind.BDF2,
            None,
            T=0.1,
            observer=lambda st, rec: seen.append(st.k),
        )
        assert seen == list(range(1, 11))

    def test_non_integer_step_count(self, tgrid):
        f0 = init_field(ScenarioConfig.two_stream(), tgrid)
        state = TimeState.initial(f0, 0.013)
        with pytest.raises(ValueError):
            advance(state, SchemeKind.EULER1, None, T=1.0)

    def test_mass_constant_over_observations(self, tgrid):
        f0 = init_field(ScenarioConfig.two_stream(), tgrid)
        state = TimeState.initial(f0, 1e-2)
        q0 = total_particles(f0)
        drifts = []
        advance(
            state,
            SchemeKind.ONESTEP2,
            None,
            T=0.5,
            observer=lambda st, rec: drifts.append(abs(rec.Q - q0) / q0),
        )
        assert max(drifts) < 1e-12


class TestManufacturedAccuracy:
    # cheapest ladder rows as a fast regression guard; the full study
    # lives in the acceptance suite
    def test_euler_error_and_rate(self, mgrid):
        src = manufactured_source()
        exact_f, exact_e = manufactured_exact(1.0, mgrid)
        errs = []
        for dt in (0.04, 0.02):
            state = TimeState.initial(manufactured_exact(0.0, mgrid)[0], dt)
            state = advance(
                state, SchemeKind.EULER1, src, T=1.0, neutrality_fix=True
            )
            errs.append(l2_relative_error(state.current, exact_f))
        assert errs[0] == pytest.approx(np.sqrt(1.5) * 8.86e-2, rel=0.2)
        assert np.log2(errs[0] / errs[1]) == pytest.approx(1.0, abs=0.15)

    def test_onestep2_field_error(self, mgrid):
        src = manufactured_source()
        _, exact_e = manufactured_exact(1.0, mgrid)
        state = TimeState.initial(manufactured_exact(0.0, mgrid)[0], 0.02)
        state = advance(
            state, SchemeKind.ONESTEP2, src, T=1.0, neutrality_fix=True
        )
        err = l2_relative_error_field(state.efield.nodal, exact_e, mgrid.xgrid)
        assert err == pytest.approx(8.86e-4, rel=0.2)

    def test_taylor_order_override_matches_default_order(self, mgrid):
        src = manufactured_source()
        exact_f, _ = manufactured_exact(1.0, mgrid)
        state = TimeState.initial(manufactured_exact(0.0, mgrid)[0], 0.02)
        upgraded = advance(
            state,
            SchemeKind.EULER1,
            src,
            T=1.0,
            taylor_order=3,
            neutrality_fix=True,
        )
        err = l2_relative_error(upgraded.current, exact_f)
        # still a first-order scheme, just with deeper shifted evaluation
        assert err == pytest.approx(np.sqrt(1.5) * 4.24e-2, rel=0.25)
