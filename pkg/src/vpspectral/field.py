"""Charge density and the self-consistent electric field on the periodic torus.

The field is obtained by inverting the zero-mean Gauss law dE/dx = 1 - rho
mode by mode; its space derivative comes directly from the density and its
time derivative from the first velocity moment (plus the source primitive in
the non-homogeneous case).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .phase_space import DistributionField
from .spectral import FourierModes, NodeGrid1D, analyze_modes, synthesize_modes

__all__ = [
    "ChargeDensity",
    "ElectricFieldState",
    "NeutralityError",
    "charge_density",
    "solve_field",
    "field_time_derivative",
]

DEFAULT_NEUTRALITY_TOL = 1e-8


class NeutralityError(ValueError):
    """Mean charge density away from the ion background: Poisson has no periodic solution."""


@dataclass(frozen=True)
class ChargeDensity:
    """Velocity integral of the distribution at the space nodes."""

    values: np.ndarray


@dataclass(frozen=True)
class ElectricFieldState:
    """Nodal electric field with its modes and optional space/time derivatives."""

    nodal: np.ndarray
    modes: FourierModes
    ddx: Optional[np.ndarray] = None
    ddt: Optional[np.ndarray] = None


def charge_density(field: DistributionField) -> ChargeDensity:
    """Quadrature of the distribution over the velocity nodes."""
    vgrid = field.grid.vgrid
    values = (vgrid.length / vgrid.count) * field.values.sum(axis=1)
    return ChargeDensity(values=values)


def solve_field(
    rho: ChargeDensity,
    xgrid: NodeGrid1D,
    *,
    neutrality_tol: float = DEFAULT_NEUTRALITY_TOL,
    fix_mean: bool = False,
) -> ElectricFieldState:
    """Invert dE/dx = 1 - rho into a zero-mean nodal field.

    The density perturbation is analyzed into sine/cosine modes and each mode
    n is divided by the physical wavenumber 2*pi*n/L; the Nyquist mode is
    dropped because its sine component is invisible on the grid.  A mean
    density away from 1 beyond the tolerance is a hard error unless
    fix_mean projects it out.
    """
    values = np.asarray(rho.values, dtype=float)
    if values.shape[0] != xgrid.count:
        raise ValueError(f"expected {xgrid.count} density values, got {values.shape[0]}")
    mean = float(values.mean())
    if abs(mean - 1.0) > neutrality_tol:
        if not fix_mean:
            raise NeutralityError(
                f"mean charge density {mean!r} deviates from the unit background "
                f"by more than {neutrality_tol}"
            )
        values = values + (1.0 - mean)

    dens_modes = analyze_modes(xgrid, values)
    n_half = xgrid.count // 2
    wavenumbers = 2.0 * np.pi * np.arange(1, n_half + 1) / xgrid.length
    cos_e = dens_modes.sin_coeffs / wavenumbers
    sin_e = -dens_modes.cos_coeffs / wavenumbers
    cos_e[-1] = 0.0
    sin_e[-1] = 0.0
    cos_e.setflags(write=False)
    sin_e.setflags(write=False)
    modes = FourierModes(mean=0.0, cos_coeffs=cos_e, sin_coeffs=sin_e)
    nodal = synthesize_modes(modes, xgrid)
    ddx = 1.0 - values
    return ElectricFieldState(nodal=nodal, modes=modes, ddx=ddx, ddt=None)


def field_time_derivative(
    field: DistributionField,
    source_primitive: Optional[Callable] = None,
    t: float = 0.0,
) -> np.ndarray:
    """Nodal dE/dt from the current relation dE/dt = integral of (v*f - G) dv.

    G is the x-primitive of the source term; omitting it means a homogeneous
    equation.  The integration constant is zero so the field mean stays zero.
    """
    grid = field.grid
    v = grid.vgrid.nodes
    integrand = field.values * v[None, :]
    if source_primitive is not None:
        integrand = integrand - source_primitive(t, grid.xmesh, grid.vmesh)
    return (grid.vgrid.length / grid.vgrid.count) * integrand.sum(axis=1)
