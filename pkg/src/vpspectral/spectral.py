"""Periodic Fourier collocation layer.

Equispaced nodes on a physical interval, the cardinal trigonometric basis,
spectral differentiation matrices, equal-weight quadrature, and sine/cosine
mode analysis and synthesis.  All objects carry the affine map
theta = 2*pi*(x - origin)/length to the reference circle, so the same code
path serves [0, 2*pi) and arbitrary physical intervals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "NodeGrid1D",
    "DerivativeMatrix",
    "FourierModes",
    "make_grid",
    "derivative_matrix",
    "apply_derivative",
    "dft_differentiate",
    "basis_value",
    "cardinal_matrix",
    "quadrature",
    "analyze_modes",
    "synthesize_modes",
]

# Below this reference-angle distance the cardinal function is evaluated
# by its limit value 1.
_SINGULAR_TOL = 1e-12


@dataclass(frozen=True)
class NodeGrid1D:
    """Equispaced periodic collocation nodes on [origin, origin + length)."""

    count: int
    origin: float
    length: float
    nodes: np.ndarray

    @property
    def spacing(self) -> float:
        return self.length / self.count

    @property
    def thetas(self) -> np.ndarray:
        """Reference angles 2*pi*i/count of the nodes (computed from indices)."""
        return 2.0 * np.pi * np.arange(self.count) / self.count

    def to_reference(self, x):
        """Map physical coordinates to reference angles theta in R."""
        return 2.0 * np.pi * (np.asarray(x, dtype=float) - self.origin) / self.length

    def interval(self) -> tuple[float, float]:
        return self.origin, self.origin + self.length


@dataclass(frozen=True)
class DerivativeMatrix:
    """Dense s-th order spectral differentiation matrix in physical coordinates."""

    size: int
    order: int
    entries: np.ndarray


@dataclass(frozen=True)
class FourierModes:
    """Mean plus cosine/sine amplitudes for modes n = 1..N/2 on a reference grid.

    The coefficients follow the 2/N normalization, under which synthesis at
    the nodes reproduces analyzed data exactly for all modes strictly below
    the Nyquist index N/2.
    """

    mean: float
    cos_coeffs: np.ndarray
    sin_coeffs: np.ndarray


def make_grid(count: int, origin: float, length: float) -> NodeGrid1D:
    """Build the equispaced periodic grid; the right endpoint is excluded."""
    if count < 4:
        raise ValueError(f"grid needs at least 4 nodes, got {count}")
    if length <= 0:
        raise ValueError(f"interval length must be positive, got {length}")
    nodes = origin + (length / count) * np.arange(count, dtype=float)
    nodes.setflags(write=False)
    return NodeGrid1D(count=int(count), origin=float(origin), length=float(length), nodes=nodes)


def _require_even(grid: NodeGrid1D, what: str) -> None:
    if grid.count % 2 != 0:
        raise ValueError(f"{what} requires an even node count, got {grid.count}")


def _dft_multipliers(count: int, order: int) -> np.ndarray:
    """Spectral multipliers (i*k)**order with the Nyquist mode zeroed for odd orders.

    For even orders the Nyquist wavenumber enters as N/2, which matches the
    closed-form second-derivative matrix.
    """
    k = np.fft.fftfreq(count, d=1.0 / count)
    mult = (1j * k) ** order
    if order % 2 == 1:
        mult[count // 2] = 0.0
    return mult


def derivative_matrix(grid: NodeGrid1D, order: int) -> DerivativeMatrix:
    """Differentiation matrix of the given order, scaled by (2*pi/length)**order.

    Orders 1 and 2 use the closed-form cotangent/cosecant entries; order 0 is
    the identity; higher orders are assembled from DFT multipliers so that no
    Nyquist aliasing is introduced by repeated first-derivative products.
    """
    n = grid.count
    if order < 0:
        raise ValueError(f"derivative order must be >= 0, got {order}")
    if order == 0:
        return DerivativeMatrix(size=n, order=0, entries=np.eye(n))
    _require_even(grid, "derivative_matrix")

    if order == 1:
        k = np.arange(1, n)
        vals = 0.5 * ((-1.0) ** k) / np.tan(np.pi * k / n)
        # Lookup table over signed index offsets keeps antisymmetry exact.
        table = np.zeros(2 * n - 1)
        table[n - 1 + k] = vals
        table[n - 1 - k] = -vals
        offsets = np.subtract.outer(np.arange(n), np.arange(n))
        ref = table[offsets + n - 1]
    elif order == 2:
        k = np.arange(1, n)
        vals = -0.5 * ((-1.0) ** k) / np.sin(np.pi * k / n) ** 2
        table = np.empty(2 * n - 1)
        table[n - 1] = -(n**2) / 12.0 - 1.0 / 6.0
        table[n - 1 + k] = vals
        table[n - 1 - k] = vals
        offsets = np.subtract.outer(np.arange(n), np.arange(n))
        ref = table[offsets + n - 1]
    else:
        mult = _dft_multipliers(n, order)
        ref = np.fft.ifft(mult[:, None] * np.fft.fft(np.eye(n), axis=0), axis=0).real

    scale = (2.0 * np.pi / grid.length) ** order
    entries = ref if scale == 1.0 else ref * scale
    entries.setflags(write=False)
    return DerivativeMatrix(size=n, order=int(order), entries=entries)


def apply_derivative(matrix: DerivativeMatrix, values: np.ndarray) -> np.ndarray:
    """Matrix-vector realization of nodal differentiation."""
    values = np.asarray(values, dtype=float)
    if values.shape[0] != matrix.size:
        raise ValueError(f"expected {matrix.size} values, got {values.shape[0]}")
    return matrix.entries @ values


def dft_differentiate(grid: NodeGrid1D, values: np.ndarray, order: int) -> np.ndarray:
    """FFT realization of the same differentiation contract (for large grids)."""
    values = np.asarray(values, dtype=float)
    if values.shape[0] != grid.count:
        raise ValueError(f"expected {grid.count} values, got {values.shape[0]}")
    if order < 0:
        raise ValueError(f"derivative order must be >= 0, got {order}")
    if order == 0:
        return values.copy()
    _require_even(grid, "dft_differentiate")
    mult = _dft_multipliers(grid.count, order)
    out = np.fft.ifft(mult * np.fft.fft(values)).real
    scale = (2.0 * np.pi / grid.length) ** order
    return out if scale == 1.0 else out * scale


def _cardinal(count: int, delta: np.ndarray) -> np.ndarray:
    """Cardinal basis values from wrapped reference-angle differences.

    Arguments within the singularity tolerance of a node offset are snapped
    to the exact Kronecker value (1 at the node itself, 0 at the others).
    """
    delta = np.mod(delta + np.pi, 2.0 * np.pi) - np.pi
    spacing = 2.0 * np.pi / count
    nearest = np.round(delta / spacing)
    on_node = np.abs(delta - nearest * spacing) < _SINGULAR_TOL
    safe = np.where(on_node, 1.0, delta)
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = np.sin(0.5 * count * safe) * np.cos(0.5 * safe) / (count * np.sin(0.5 * safe))
    return np.where(on_node, np.where(nearest.astype(int) % count == 0, 1.0, 0.0), vals)


def basis_value(grid: NodeGrid1D, i: int, x) -> float | np.ndarray:
    """Value of the i-th cardinal trigonometric basis function at x.

    The removable singularity at the node itself evaluates to 1.
    """
    _require_even(grid, "basis_value")
    theta = grid.to_reference(x)
    out = _cardinal(grid.count, theta - grid.thetas[i])
    return float(out) if np.isscalar(x) or np.ndim(x) == 0 else out


def cardinal_matrix(grid: NodeGrid1D, xs: np.ndarray) -> np.ndarray:
    """Matrix B[p, i] of every basis function at every query point."""
    _require_even(grid, "cardinal_matrix")
    theta = grid.to_reference(np.asarray(xs, dtype=float).ravel())
    return _cardinal(grid.count, theta[:, None] - grid.thetas[None, :])


def quadrature(grid: NodeGrid1D, values: np.ndarray) -> float:
    """Equal-weight quadrature (length/count) * sum(values).

    Exact for trigonometric polynomials spanned by 1, sin(n*theta),
    cos(n*theta) for n <= count - 1, and sin(count*theta).
    """
    values = np.asarray(values, dtype=float)
    if values.shape[0] != grid.count:
        raise ValueError(f"expected {grid.count} values, got {values.shape[0]}")
    return float(grid.length / grid.count * np.sum(values))


def analyze_modes(grid: NodeGrid1D, values: np.ndarray) -> FourierModes:
    """Discrete sine/cosine coefficients of nodal data for modes n = 1..N/2."""
    _require_even(grid, "analyze_modes")
    values = np.asarray(values, dtype=float)
    n = grid.count
    if values.shape[0] != n:
        raise ValueError(f"expected {n} values, got {values.shape[0]}")
    if n & (n - 1) == 0:
        spectrum = np.fft.rfft(values)
        mean = float(spectrum[0].real) / n
        cos_coeffs = 2.0 * spectrum[1:].real / n
        sin_coeffs = -2.0 * spectrum[1:].imag / n
    else:
        modes = np.arange(1, n // 2 + 1)
        angles = 2.0 * np.pi * np.outer(modes, np.arange(n)) / n
        mean = float(np.mean(values))
        cos_coeffs = (2.0 / n) * (np.cos(angles) @ values)
        sin_coeffs = (2.0 / n) * (np.sin(angles) @ values)
    cos_coeffs.setflags(write=False)
    sin_coeffs.setflags(write=False)
    return FourierModes(mean=mean, cos_coeffs=cos_coeffs, sin_coeffs=sin_coeffs)


def synthesize_modes(modes: FourierModes, grid: NodeGrid1D) -> np.ndarray:
    """Nodal values of mean + sum_n [a_n cos(n theta) + b_n sin(n theta)]."""
    _require_even(grid, "synthesize_modes")
    n = grid.count
    if modes.cos_coeffs.shape[0] != n // 2 or modes.sin_coeffs.shape[0] != n // 2:
        raise ValueError(
            f"modes sized for count {2 * modes.cos_coeffs.shape[0]}, grid has {n}"
        )
    wave = np.arange(1, n // 2 + 1)
    angles = 2.0 * np.pi * np.outer(np.arange(n), wave) / n
    return modes.mean + np.cos(angles) @ modes.cos_coeffs + np.sin(angles) @ modes.sin_coeffs
