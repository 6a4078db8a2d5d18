"""Phase-space grid, nodal distribution field, and characteristic evaluation.

The distribution is stored as its nodal value matrix C with rows over the
space nodes and columns over the velocity nodes.  Shifted evaluations along
approximate characteristics are computed either by a truncated Taylor
expansion of the trigonometric interpolant (production path) or by the full
double-sum basis evaluation (reference oracle).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .spectral import (
    DerivativeMatrix,
    NodeGrid1D,
    cardinal_matrix,
    derivative_matrix,
    make_grid,
)

__all__ = [
    "PhaseGrid",
    "DistributionField",
    "DisplacementField",
    "taylor_shifted_eval",
    "exact_shifted_eval",
    "phi_transport",
]


@dataclass(frozen=True)
class PhaseGrid:
    """Tensor grid over space x velocity with cached differentiation matrices."""

    xgrid: NodeGrid1D
    vgrid: NodeGrid1D
    dx1: DerivativeMatrix
    dx2: DerivativeMatrix
    dv1: DerivativeMatrix
    dv2: DerivativeMatrix
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @classmethod
    def create(
        cls,
        nx: int,
        nv: int,
        x_interval: tuple[float, float],
        v_interval: tuple[float, float],
    ) -> "PhaseGrid":
        xgrid = make_grid(nx, x_interval[0], x_interval[1] - x_interval[0])
        vgrid = make_grid(nv, v_interval[0], v_interval[1] - v_interval[0])
        return cls(
            xgrid=xgrid,
            vgrid=vgrid,
            dx1=derivative_matrix(xgrid, 1),
            dx2=derivative_matrix(xgrid, 2),
            dv1=derivative_matrix(vgrid, 1),
            dv2=derivative_matrix(vgrid, 2),
        )

    @property
    def shape(self) -> tuple[int, int]:
        return self.xgrid.count, self.vgrid.count

    def x_derivative(self, order: int) -> DerivativeMatrix:
        if order == 1:
            return self.dx1
        if order == 2:
            return self.dx2
        key = ("x", order)
        if key not in self._cache:
            self._cache[key] = derivative_matrix(self.xgrid, order)
        return self._cache[key]

    def v_derivative(self, order: int) -> DerivativeMatrix:
        if order == 1:
            return self.dv1
        if order == 2:
            return self.dv2
        key = ("v", order)
        if key not in self._cache:
            self._cache[key] = derivative_matrix(self.vgrid, order)
        return self._cache[key]

    @property
    def xmesh(self) -> np.ndarray:
        """Space coordinates broadcast over the full grid, shape (N, M)."""
        if "xmesh" not in self._cache:
            mesh = np.repeat(self.xgrid.nodes[:, None], self.vgrid.count, axis=1)
            mesh.setflags(write=False)
            self._cache["xmesh"] = mesh
        return self._cache["xmesh"]

    @property
    def vmesh(self) -> np.ndarray:
        """Velocity coordinates broadcast over the full grid, shape (N, M)."""
        if "vmesh" not in self._cache:
            mesh = np.repeat(self.vgrid.nodes[None, :], self.xgrid.count, axis=0)
            mesh.setflags(write=False)
            self._cache["vmesh"] = mesh
        return self._cache["vmesh"]


@dataclass(frozen=True)
class DistributionField:
    """Nodal values of the distribution on the phase-space grid."""

    values: np.ndarray
    grid: PhaseGrid

    def __post_init__(self):
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"values shaped {self.values.shape}, grid is {self.grid.shape}"
            )


@dataclass(frozen=True)
class DisplacementField:
    """Per-node backward displacements (grid point minus characteristic foot)."""

    dxs: np.ndarray
    dvs: np.ndarray


def _check_displacements(disp: DisplacementField, grid: PhaseGrid) -> None:
    if disp.dxs.shape != grid.shape or disp.dvs.shape != grid.shape:
        raise ValueError("displacement arrays must match the phase-space grid shape")
    if np.max(np.abs(disp.dxs)) >= grid.xgrid.length:
        raise ValueError("space displacement exceeds the domain length")
    if np.max(np.abs(disp.dvs)) >= grid.vgrid.length:
        raise ValueError("velocity displacement exceeds the domain length")


def taylor_shifted_eval(
    field: DistributionField, disp: DisplacementField, order: int
) -> np.ndarray:
    """Evaluate the interpolant at shifted points by a truncated 2D Taylor series.

    Returns c + sum_{s=1..order} sum_{r=0..s} (-1)^s/(r!(s-r)!) *
    dxs^r * dvs^(s-r) * (Dx^r C Dv^(s-r)^T), with the mixed-derivative arrays
    built once per call and combined per node.
    """
    if order < 1:
        raise ValueError(f"expansion order must be >= 1, got {order}")
    grid = field.grid
    _check_displacements(disp, grid)
    c = field.values

    xpow = [None, disp.dxs]
    vpow = [None, disp.dvs]
    for _ in range(2, order + 1):
        xpow.append(xpow[-1] * disp.dxs)
        vpow.append(vpow[-1] * disp.dvs)

    # x-derivative arrays Dx^r C for r = 0..order
    xder = [c]
    for r in range(1, order + 1):
        xder.append(grid.x_derivative(r).entries @ c)

    out = c.copy()
    for s in range(1, order + 1):
        sign = -1.0 if s % 2 else 1.0
        for r in range(0, s + 1):
            q = s - r
            term = xder[r] if q == 0 else xder[r] @ grid.v_derivative(q).entries.T
            coeff = sign / (math.factorial(r) * math.factorial(q))
            if r > 0:
                term = xpow[r] * term
            if q > 0:
                term = vpow[q] * term
            out += coeff * term
    return out


def exact_shifted_eval(
    field: DistributionField, xtil: np.ndarray, vtil: np.ndarray
) -> np.ndarray:
    """Full double-sum basis evaluation at arbitrary points (reference oracle).

    Points are wrapped periodically into the physical domain.  Cost is
    O(N^2 M^2); intended for validation, not production stepping.
    """
    grid = field.grid
    if xtil.shape != grid.shape or vtil.shape != grid.shape:
        raise ValueError("query point arrays must match the phase-space grid shape")
    bx = cardinal_matrix(grid.xgrid, xtil.ravel())
    bv = cardinal_matrix(grid.vgrid, vtil.ravel())
    out = np.einsum("pn,nm,pm->p", bx, field.values, bv)
    return out.reshape(grid.shape)


def phi_transport(field: DistributionField, e_nodes: np.ndarray) -> np.ndarray:
    """First-order transport operator -v df/dx + E df/dv at the nodes."""
    grid = field.grid
    e_nodes = np.asarray(e_nodes, dtype=float)
    if e_nodes.shape[0] != grid.xgrid.count:
        raise ValueError(
            f"expected {grid.xgrid.count} field values, got {e_nodes.shape[0]}"
        )
    c = field.values
    v = grid.vgrid.nodes
    return -v[None, :] * (grid.dx1.entries @ c) + e_nodes[:, None] * (
        c @ grid.dv1.entries.T
    )
