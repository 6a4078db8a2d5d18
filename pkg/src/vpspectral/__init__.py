"""Semi-Lagrangian Fourier spectral-collocation solver for the 1D-1V Vlasov-Poisson system."""

__version__ = "0.1.0"

from .spectral import (
    DerivativeMatrix,
    FourierModes,
    NodeGrid1D,
    analyze_modes,
    apply_derivative,
    basis_value,
    derivative_matrix,
    make_grid,
    quadrature,
    synthesize_modes,
)
from .phase_space import (
    DisplacementField,
    DistributionField,
    PhaseGrid,
    exact_shifted_eval,
    phi_transport,
    taylor_shifted_eval,
)
from .field import (
    ChargeDensity,
    ElectricFieldState,
    NeutralityError,
    charge_density,
    field_time_derivative,
    solve_field,
)
from .integrators import (
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
from .scenarios import (
    ScenarioConfig,
    ScenarioKind,
    init_field,
    manufactured_exact,
    manufactured_source,
)
from .diagnostics import (
    DiagnosticsRecord,
    first_mode_amplitude,
    first_mode_magnitude,
    l2_relative_error,
    l2_relative_error_field,
    total_energy,
    total_momentum,
    total_particles,
)

__all__ = [
    "__version__",
    "NodeGrid1D",
    "DerivativeMatrix",
    "FourierModes",
    "make_grid",
    "derivative_matrix",
    "apply_derivative",
    "basis_value",
    "quadrature",
    "analyze_modes",
    "synthesize_modes",
    "PhaseGrid",
    "DistributionField",
    "DisplacementField",
    "taylor_shifted_eval",
    "exact_shifted_eval",
    "phi_transport",
    "ChargeDensity",
    "ElectricFieldState",
    "NeutralityError",
    "charge_density",
    "solve_field",
    "field_time_derivative",
    "SchemeKind",
    "SourceTerm",
    "TimeState",
    "cfl_max_dt",
    "step_euler",
    "step_bdf2",
    "step_bdf3",
    "step_onestep2",
    "bootstrap_history",
    "advance",
    "ScenarioKind",
    "ScenarioConfig",
    "init_field",
    "manufactured_exact",
    "manufactured_source",
    "DiagnosticsRecord",
    "total_particles",
    "total_momentum",
    "total_energy",
    "first_mode_amplitude",
    "first_mode_magnitude",
    "l2_relative_error",
    "l2_relative_error_field",
]
