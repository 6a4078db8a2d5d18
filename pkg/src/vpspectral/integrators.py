"""Time-marching schemes for the Vlasov-Poisson system.

Four explicit schemes are provided: a one-step first-order update, two- and
three-step backward differentiation formulas in semi-Lagrangian form, and a
one-step second-order scheme built on a quadratic expansion of the
characteristic feet.  The field is re-solved from the new distribution after
every step; each update uses the field of the step it started from.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .diagnostics import make_record
from .field import (
    ElectricFieldState,
    charge_density,
    field_time_derivative,
    solve_field,
)
from .phase_space import (
    DisplacementField,
    DistributionField,
    phi_transport,
    taylor_shifted_eval,
)

__all__ = [
    "SchemeKind",
    "SourceTerm",
    "TimeState",
    "HistoryEntry",
    "CFLViolationError",
    "cfl_max_dt",
    "step_euler",
    "step_bdf2",
    "step_bdf3",
    "step_onestep2",
    "bootstrap_history",
    "advance",
]


class CFLViolationError(RuntimeError):
    """Raised in strict mode when the timestep exceeds the transport bound."""


class SchemeKind(enum.Enum):
    EULER1 = "euler1"
    BDF2 = "bdf2"
    BDF3 = "bdf3"
    ONESTEP2 = "onestep2"

    @classmethod
    def parse(cls, name: str) -> "SchemeKind":
        try:
            return cls(name.strip().lower())
        except ValueError:
            valid = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown scheme {name!r} (expected one of: {valid})")

    @property
    def history_needed(self) -> int:
        return {SchemeKind.EULER1: 0, SchemeKind.BDF2: 1, SchemeKind.BDF3: 2, SchemeKind.ONESTEP2: 0}[self]


@dataclass(frozen=True)
class SourceTerm:
    """Forcing g(t, x, v) with an optional x-primitive G (dG/dx = g)."""

    g: Optional[Callable] = None
    G: Optional[Callable] = None

    def primitive_residual(self, t, xs, vs, h: float = 1e-6) -> float:
        """Max mismatch between the finite-difference dG/dx and g at sample points."""
        if self.g is None or self.G is None:
            raise ValueError("both g and G are needed for the consistency check")
        fd = (self.G(t, xs + h, vs) - self.G(t, xs - h, vs)) / (2.0 * h)
        return float(np.max(np.abs(fd - self.g(t, xs, vs))))


@dataclass(frozen=True)
class HistoryEntry:
    """A previous step's distribution and field."""

    field: DistributionField
    efield: ElectricFieldState


@dataclass(frozen=True)
class TimeState:
    """Solution state at one time level, with up to two previous levels."""

    t: float
    k: int
    dt: float
    current: DistributionField
    efield: ElectricFieldState
    history: tuple[HistoryEntry, ...] = ()
    cfl_ok: bool = True

    @classmethod
    def initial(
        cls, field: DistributionField, dt: float, *, neutrality_fix: bool = False
    ) -> "TimeState":
        if dt <= 0:
            raise ValueError(f"timestep must be positive, got {dt}")
        efield = solve_field(
            charge_density(field), field.grid.xgrid, fix_mean=neutrality_fix
        )
        return cls(t=0.0, k=0, dt=dt, current=field, efield=efield)


def cfl_max_dt(state: TimeState) -> float:
    """Largest stable-transport timestep for the current state.

    Each term is scaled to its physical cell width; the bound keeps the
    characteristic feet within one cell of their origin node.
    """
    grid = state.current.grid
    vmax = float(np.max(np.abs(grid.vgrid.nodes)))
    emax = float(np.max(np.abs(state.efield.nodal)))
    denom = grid.xgrid.count * vmax * (2.0 * np.pi / grid.xgrid.length)
    denom += grid.vgrid.count * emax * (2.0 * np.pi / grid.vgrid.length)
    if denom == 0.0:
        return np.inf
    return 2.0 * np.pi / denom


def _check_cfl(state: TimeState, strict: bool) -> bool:
    bound = cfl_max_dt(state)
    ok = state.dt <= bound * (1.0 + 1e-12)
    if not ok:
        msg = f"timestep {state.dt} exceeds the transport bound {bound:.6g} at t={state.t:.6g}"
        if strict:
            raise CFLViolationError(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=3)
    return ok


def _finish_step(
    state: TimeState,
    new_values: np.ndarray,
    cfl_ok: bool,
    neutrality_fix: bool,
) -> TimeState:
    grid = state.current.grid
    new_field = DistributionField(new_values, grid)
    efield = solve_field(charge_density(new_field), grid.xgrid, fix_mean=neutrality_fix)
    entry = HistoryEntry(field=state.current, efield=state.efield)
    return TimeState(
        t=state.t + state.dt,
        k=state.k + 1,
        dt=state.dt,
        current=new_field,
        efield=efield,
        history=(entry,) + state.history[:1],
        cfl_ok=cfl_ok,
    )


def _shifted_values(
    field: DistributionField, efield: ElectricFieldState, tau: float, order: int
) -> np.ndarray:
    """Evaluate a level at its first-order characteristic feet, tau back in time."""
    grid = field.grid
    shape = grid.shape
    dxs = np.broadcast_to(grid.vgrid.nodes * tau, shape)
    dvs = np.broadcast_to((-efield.nodal * tau)[:, None], shape)
    return taylor_shifted_eval(field, DisplacementField(dxs, dvs), order)


def _source_at(src: Optional[SourceTerm], t: float, grid) -> Optional[np.ndarray]:
    if src is None or src.g is None:
        return None
    return src.g(t, grid.xmesh, grid.vmesh)


def step_euler(
    state: TimeState,
    src: Optional[SourceTerm] = None,
    *,
    taylor_order: int = 1,
    strict_cfl: bool = False,
    neutrality_fix: bool = False,
) -> TimeState:
    """Forward step along first-order characteristic feet."""
    ok = _check_cfl(state, strict_cfl)
    if taylor_order == 1:
        new = state.current.values + state.dt * phi_transport(
            state.current, state.efield.nodal
        )
    else:
        new = _shifted_values(state.current, state.efield, state.dt, taylor_order)
    g_now = _source_at(src, state.t, state.current.grid)
    if g_now is not None:
        new = new + state.dt * g_now
    return _finish_step(state, new, ok, neutrality_fix)


def _retraced_level(
    state: TimeState, steps_back: int, taylor_order: int
) -> np.ndarray:
    """A previous level evaluated at feet retraced over (steps_back + 1) steps.

    Each level is traced with its own field; the single-step characteristic
    direction is reused with the timestep scaled by the number of steps back.
    """
    if steps_back == 0:
        level, efield = state.current, state.efield
    else:
        entry = state.history[steps_back - 1]
        level, efield = entry.field, entry.efield
    tau = (steps_back + 1) * state.dt
    if taylor_order == 1:
        return level.values + tau * phi_transport(level, efield.nodal)
    return _shifted_values(level, efield, tau, taylor_order)


def step_bdf2(
    state: TimeState,
    src: Optional[SourceTerm] = None,
    *,
    taylor_order: int = 1,
    strict_cfl: bool = False,
    neutrality_fix: bool = False,
) -> TimeState:
    """Two-step backward differentiation update along retraced characteristics.

    The forcing rides along with the retraced levels, which amounts to the
    second-order extrapolation 2*g(t_k) - g(t_{k-1}) of the source.
    """
    if len(state.history) < 1:
        raise ValueError("bdf2 needs one previous level; bootstrap the history first")
    ok = _check_cfl(state, strict_cfl)
    new = (4.0 / 3.0) * _retraced_level(state, 0, taylor_order) - (
        1.0 / 3.0
    ) * _retraced_level(state, 1, taylor_order)
    if src is not None and src.g is not None:
        grid = state.current.grid
        g_now = src.g(state.t, grid.xmesh, grid.vmesh)
        g_prev = src.g(state.t - state.dt, grid.xmesh, grid.vmesh)
        new = new + (2.0 / 3.0) * state.dt * (2.0 * g_now - g_prev)
    return _finish_step(state, new, ok, neutrality_fix)


def step_bdf3(
    state: TimeState,
    src: Optional[SourceTerm] = None,
    *,
    taylor_order: int = 1,
    strict_cfl: bool = False,
    neutrality_fix: bool = False,
) -> TimeState:
    """Three-step backward differentiation update along retraced characteristics."""
    if len(state.history) < 2:
        raise ValueError("bdf3 needs two previous levels; bootstrap the history first")
    ok = _check_cfl(state, strict_cfl)
    new = (
        (18.0 / 11.0) * _retraced_level(state, 0, taylor_order)
        - (9.0 / 11.0) * _retraced_level(state, 1, taylor_order)
        + (2.0 / 11.0) * _retraced_level(state, 2, taylor_order)
    )
    g_next = _source_at(src, state.t + state.dt, state.current.grid)
    if g_next is not None:
        new = new + (6.0 / 11.0) * state.dt * g_next
    return _finish_step(state, new, ok, neutrality_fix)


def step_onestep2(
    state: TimeState,
    src: Optional[SourceTerm] = None,
    *,
    taylor_order: int = 2,
    strict_cfl: bool = False,
    neutrality_fix: bool = False,
) -> TimeState:
    """One-step second-order update with quadratic characteristic feet.

    The feet use the field, its space derivative from the density, and its
    time derivative from the current relation; the source contribution is the
    trapezoidal average along the retraced characteristic.
    """
    has_source = src is not None and src.g is not None
    if has_source and src.G is None:
        raise ValueError(
            "the one-step second-order scheme needs the source primitive G "
            "to form the field time derivative"
        )
    ok = _check_cfl(state, strict_cfl)
    grid = state.current.grid
    dt = state.dt
    e_nodes = state.efield.nodal
    ddx = state.efield.ddx
    ddt = field_time_derivative(
        state.current, src.G if has_source else None, state.t
    )
    v = grid.vgrid.nodes
    shape = grid.shape
    dxs = np.broadcast_to(v * dt, shape) + 0.5 * dt**2 * e_nodes[:, None]
    dvs = (-dt * e_nodes - 0.5 * dt**2 * ddt)[:, None] + (
        0.5 * dt**2 * ddx[:, None]
    ) * v[None, :]
    new = taylor_shifted_eval(state.current, DisplacementField(dxs, dvs), taylor_order)
    if has_source:
        feet_x = grid.xmesh - dxs
        feet_v = grid.vmesh - dvs
        new = new + 0.5 * dt * (
            src.g(state.t, feet_x, feet_v)
            + src.g(state.t + dt, grid.xmesh, grid.vmesh)
        )
    return _finish_step(state, new, ok, neutrality_fix)


_STEP_FUNCTIONS = {
    SchemeKind.EULER1: step_euler,
    SchemeKind.BDF2: step_bdf2,
    SchemeKind.BDF3: step_bdf3,
    SchemeKind.ONESTEP2: step_onestep2,
}


BOOTSTRAP_SUBSTEPS = 4


def _bootstrap_one(
    state: TimeState,
    src: Optional[SourceTerm],
    substeps: int,
    strict_cfl: bool,
    neutrality_fix: bool,
) -> TimeState:
    """Advance one timestep by sub-stepping the one-step second-order scheme."""
    sub = TimeState(
        t=state.t,
        k=0,
        dt=state.dt / substeps,
        current=state.current,
        efield=state.efield,
    )
    for _ in range(substeps):
        sub = step_onestep2(
            sub, src, strict_cfl=strict_cfl, neutrality_fix=neutrality_fix
        )
    entry = HistoryEntry(field=state.current, efield=state.efield)
    return TimeState(
        t=state.t + state.dt,
        k=state.k + 1,
        dt=state.dt,
        current=sub.current,
        efield=sub.efield,
        history=(entry,) + state.history[:1],
        cfl_ok=sub.cfl_ok,
    )


def bootstrap_history(
    state: TimeState,
    scheme: SchemeKind,
    src: Optional[SourceTerm] = None,
    *,
    substeps: int = BOOTSTRAP_SUBSTEPS,
    strict_cfl: bool = False,
    neutrality_fix: bool = False,
) -> TimeState:
    """Fill the history the scheme needs with one-step second-order steps.

    Each missing level is built by sub-stepping the one-step scheme across a
    single timestep, so the start-up error stays far below the multistep
    schemes' own truncation error and the global order is preserved.
    """
    if substeps < 1:
        raise ValueError(f"bootstrap needs at least one substep, got {substeps}")
    while len(state.history) < scheme.history_needed:
        state = _bootstrap_one(state, src, substeps, strict_cfl, neutrality_fix)
    return state


def advance(
    state: TimeState,
    scheme: SchemeKind,
    src: Optional[SourceTerm] = None,
    T: float = 1.0,
    observer: Optional[Callable] = None,
    *,
    taylor_order: Optional[int] = None,
    strict_cfl: bool = False,
    neutrality_fix: bool = False,
) -> TimeState:
    """March the state to time state.t + T, observing every new level.

    T must be an integer number of timesteps.  Multistep schemes bootstrap
    their missing history with one-step second-order steps, which count
    toward the step total and are observed like any other step.
    """
    if T <= 0:
        raise ValueError(f"final time must be positive, got {T}")
    ratio = T / state.dt
    steps = round(ratio)
    if steps < 1 or abs(ratio - steps) > 2.0 * np.spacing(ratio):
        raise ValueError(
            f"final time {T} is not an integer number of timesteps {state.dt}"
        )
    for _ in range(steps):
        if len(state.history) < scheme.history_needed:
            state = _bootstrap_one(
                state, src, BOOTSTRAP_SUBSTEPS, strict_cfl, neutrality_fix
            )
        else:
            step_fn = _STEP_FUNCTIONS[scheme]
            kwargs = {} if taylor_order is None else {"taylor_order": taylor_order}
            state = step_fn(
                state,
                src,
                strict_cfl=strict_cfl,
                neutrality_fix=neutrality_fix,
                **kwargs,
            )
        if observer is not None:
            observer(state, make_record(state))
    return state
