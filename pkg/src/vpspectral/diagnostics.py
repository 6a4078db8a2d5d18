"""Discrete invariants, field-mode tracking, and error norms.

Particle number, momentum, and total energy use the plain nodal quadrature
weights; velocity moments accept the spectrally small tail error of weighting
by v and v^2 at the scenario decay rates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .field import ElectricFieldState
from .phase_space import DistributionField
from .spectral import NodeGrid1D

__all__ = [
    "DiagnosticsRecord",
    "total_particles",
    "total_momentum",
    "total_energy",
    "first_mode_amplitude",
    "first_mode_magnitude",
    "l2_relative_error",
    "l2_relative_error_field",
    "make_record",
]


@dataclass(frozen=True)
class DiagnosticsRecord:
    """Time-stamped invariants and first-field-mode amplitudes for one step."""

    t: float
    Q: float
    P: float
    energy: float
    first_mode_a1: float
    first_mode_abs: float
    cfl_ok: bool


def _weights(field: DistributionField) -> tuple[float, float]:
    gx = field.grid.xgrid
    gv = field.grid.vgrid
    return gx.length / gx.count, gv.length / gv.count


def total_particles(field: DistributionField) -> float:
    """Discrete particle number Q: full nodal quadrature of f."""
    wx, wv = _weights(field)
    return float(wx * wv * field.values.sum())


def total_momentum(field: DistributionField) -> float:
    """Discrete momentum P: nodal quadrature of v*f."""
    wx, wv = _weights(field)
    v = field.grid.vgrid.nodes
    return float(wx * wv * (field.values @ v).sum())


def total_energy(field: DistributionField, efield: ElectricFieldState) -> float:
    """Kinetic plus field energy, both by nodal quadrature."""
    wx, wv = _weights(field)
    kinetic = wx * wv * (field.values @ (field.grid.vgrid.nodes ** 2)).sum()
    potential = wx * np.sum(efield.nodal**2)
    return float(0.5 * (kinetic + potential))


def first_mode_amplitude(efield: ElectricFieldState) -> float:
    """|a_1|: magnitude of the lowest cosine mode of the field."""
    return float(abs(efield.modes.cos_coeffs[0]))


def first_mode_magnitude(efield: ElectricFieldState) -> float:
    """Full first-mode magnitude sqrt(a_1^2 + b_1^2), phase-insensitive."""
    return float(np.hypot(efield.modes.cos_coeffs[0], efield.modes.sin_coeffs[0]))


def _check_same_grid(a: DistributionField, b: DistributionField) -> None:
    ga, gb = a.grid, b.grid
    if ga.shape != gb.shape or not (
        np.allclose(ga.xgrid.interval(), gb.xgrid.interval())
        and np.allclose(ga.vgrid.interval(), gb.vgrid.interval())
    ):
        raise ValueError("fields live on different grids")


def l2_relative_error(a: DistributionField, b: DistributionField) -> float:
    """Relative nodal L2 distance over phase space, with b as the reference."""
    _check_same_grid(a, b)
    wx, wv = _weights(b)
    ref = np.sqrt(wx * wv * np.sum(b.values**2))
    if ref == 0.0:
        raise ValueError("reference field has zero norm")
    return float(np.sqrt(wx * wv * np.sum((a.values - b.values) ** 2)) / ref)


def l2_relative_error_field(a: np.ndarray, b: np.ndarray, xgrid: NodeGrid1D) -> float:
    """Relative nodal L2 distance over the space interval, with b as the reference."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.shape[0] != xgrid.count:
        raise ValueError("field arrays must both match the grid size")
    w = xgrid.length / xgrid.count
    ref = np.sqrt(w * np.sum(b**2))
    if ref == 0.0:
        raise ValueError("reference field has zero norm")
    return float(np.sqrt(w * np.sum((a - b) ** 2)) / ref)


def make_record(state) -> DiagnosticsRecord:
    """Diagnostics for a time state (duck-typed to avoid an import cycle)."""
    return DiagnosticsRecord(
        t=state.t,
        Q=total_particles(state.current),
        P=total_momentum(state.current),
        energy=total_energy(state.current, state.efield),
        first_mode_a1=first_mode_amplitude(state.efield),
        first_mode_abs=first_mode_magnitude(state.efield),
        cfl_ok=state.cfl_ok,
    )
