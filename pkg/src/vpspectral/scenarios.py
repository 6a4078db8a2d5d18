"""Benchmark initial conditions, exact solutions, and source terms.

Three scenarios are provided: a manufactured travelling-wave solution with a
closed-form forcing (for convergence studies), counter-streaming beams
(two-stream instability), and a perturbed Maxwellian (Landau damping).
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

import numpy as np

from .integrators import SourceTerm
from .phase_space import DistributionField, PhaseGrid

__all__ = [
    "ScenarioKind",
    "ScenarioConfig",
    "init_field",
    "manufactured_exact",
    "manufactured_source",
]

logger = logging.getLogger(__name__)

_SQRT_PI = np.sqrt(np.pi)
_TWO_PI = 2.0 * np.pi

MANUFACTURED_X_INTERVAL = (0.0, 2.0 * np.pi)
MANUFACTURED_V_INTERVAL = (-np.pi, np.pi)
TWO_STREAM_X_INTERVAL = (0.0, 4.0 * np.pi)
TWO_STREAM_V_INTERVAL = (-5.0, 5.0)
LANDAU_X_INTERVAL = (0.0, 4.0 * np.pi)
LANDAU_V_INTERVAL = (-10.0, 10.0)


class ScenarioKind(enum.Enum):
    MANUFACTURED = "manufactured"
    TWOSTREAM = "twostream"
    LANDAU = "landau"

    @classmethod
    def parse(cls, name: str) -> "ScenarioKind":
        try:
            return cls(name.strip().lower())
        except ValueError:
            valid = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown scenario kind {name!r} (expected one of: {valid})")


@dataclass(frozen=True)
class ScenarioConfig:
    """A benchmark problem: phase-space domain plus kind-specific parameters."""

    kind: ScenarioKind
    x_interval: tuple[float, float]
    v_interval: tuple[float, float]
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.x_interval[1] <= self.x_interval[0]:
            raise ValueError("space interval must have positive length")
        if self.v_interval[1] <= self.v_interval[0]:
            raise ValueError("velocity interval must have positive length")
        if self.kind is ScenarioKind.TWOSTREAM:
            if self.params["alpha"] <= 0:
                raise ValueError("thermal width alpha must be positive")
            if self.params["epsilon"] < 0:
                raise ValueError("perturbation epsilon must be non-negative")
            self._check_wavenumber(self.params["kappa"])
        elif self.kind is ScenarioKind.LANDAU:
            if self.params["gamma"] < 0:
                raise ValueError("perturbation gamma must be non-negative")
            self._check_wavenumber(self.params["kappa"])

    def _check_wavenumber(self, kappa: float) -> None:
        length = self.x_interval[1] - self.x_interval[0]
        cycles = kappa * length / _TWO_PI
        if cycles < 0.5 or abs(cycles - round(cycles)) > 1e-9:
            raise ValueError(
                f"wavenumber {kappa} must fit a whole number of periods in the "
                f"space interval (got {cycles} cycles)"
            )

    @classmethod
    def manufactured(cls) -> "ScenarioConfig":
        return cls(
            kind=ScenarioKind.MANUFACTURED,
            x_interval=MANUFACTURED_X_INTERVAL,
            v_interval=MANUFACTURED_V_INTERVAL,
        )

    @classmethod
    def two_stream(
        cls,
        alpha: float = 1.0 / np.sqrt(8.0),
        beta: float = 1.0,
        epsilon: float = 1e-3,
        kappa: float = 0.5,
        x_interval: tuple[float, float] = TWO_STREAM_X_INTERVAL,
        v_interval: tuple[float, float] = TWO_STREAM_V_INTERVAL,
    ) -> "ScenarioConfig":
        return cls(
            kind=ScenarioKind.TWOSTREAM,
            x_interval=x_interval,
            v_interval=v_interval,
            params={"alpha": alpha, "beta": beta, "epsilon": epsilon, "kappa": kappa},
        )

    @classmethod
    def landau(
        cls,
        gamma: float = 0.01,
        kappa: float = 0.5,
        x_interval: tuple[float, float] = LANDAU_X_INTERVAL,
        v_interval: tuple[float, float] = LANDAU_V_INTERVAL,
    ) -> "ScenarioConfig":
        return cls(
            kind=ScenarioKind.LANDAU,
            x_interval=x_interval,
            v_interval=v_interval,
            params={"gamma": gamma, "kappa": kappa},
        )


def _check_domain(cfg: ScenarioConfig, grid: PhaseGrid) -> None:
    gx = grid.xgrid.interval()
    gv = grid.vgrid.interval()
    if not (
        np.allclose(gx, cfg.x_interval, atol=1e-12) and np.allclose(gv, cfg.v_interval, atol=1e-12)
    ):
        raise ValueError(
            f"grid domain {gx} x {gv} does not match scenario domain "
            f"{cfg.x_interval} x {cfg.v_interval}"
        )


def init_field(cfg: ScenarioConfig, grid: PhaseGrid) -> DistributionField:
    """Nodal initial distribution for the scenario."""
    _check_domain(cfg, grid)
    x = grid.xmesh
    v = grid.vmesh
    if cfg.kind is ScenarioKind.MANUFACTURED:
        values = (2.0 / _SQRT_PI) * (1.0 - np.cos(2.0 * x)) * np.exp(-4.0 * v**2)
    elif cfg.kind is ScenarioKind.TWOSTREAM:
        a = cfg.params["alpha"]
        b = cfg.params["beta"]
        eps = cfg.params["epsilon"]
        kap = cfg.params["kappa"]
        width = a * np.sqrt(2.0)
        beams = np.exp(-(((v - b) / width) ** 2)) + np.exp(-(((v + b) / width) ** 2))
        values = beams / (2.0 * a * np.sqrt(_TWO_PI)) * (1.0 + eps * np.cos(kap * x))
    elif cfg.kind is ScenarioKind.LANDAU:
        gam = cfg.params["gamma"]
        kap = cfg.params["kappa"]
        values = (
            (1.0 + gam * np.cos(kap * x)) * np.exp(-0.5 * v**2) / np.sqrt(_TWO_PI)
        )
    else:  # pragma: no cover
        raise ValueError(f"unhandled scenario kind {cfg.kind}")

    boundary = max(np.max(np.abs(values[:, 0])), float(np.max(np.abs(values[:, -1]))))
    logger.info(
        "%s initial field: max |f| at the velocity boundary is %.3e",
        cfg.kind.value,
        boundary,
    )
    return DistributionField(values, grid)


def manufactured_exact(t: float, grid: PhaseGrid) -> tuple[DistributionField, np.ndarray]:
    """Exact travelling-wave distribution and field at time t."""
    gx = grid.xgrid.interval()
    gv = grid.vgrid.interval()
    if not (
        np.allclose(gx, MANUFACTURED_X_INTERVAL, atol=1e-12)
        and np.allclose(gv, MANUFACTURED_V_INTERVAL, atol=1e-12)
    ):
        raise ValueError(
            f"manufactured solution lives on {MANUFACTURED_X_INTERVAL} x "
            f"{MANUFACTURED_V_INTERVAL}, grid is {gx} x {gv}"
        )
    u = 2.0 * grid.xmesh - _TWO_PI * t
    values = (2.0 / _SQRT_PI) * (1.0 - np.cos(u)) * np.exp(-4.0 * grid.vmesh**2)
    e_nodal = 0.5 * np.sin(2.0 * grid.xgrid.nodes - _TWO_PI * t)
    return DistributionField(values, grid), e_nodal


def _manufactured_g(t, x, v):
    u = 2.0 * np.asarray(x) - _TWO_PI * t
    v = np.asarray(v)
    return (
        (2.0 / _SQRT_PI)
        * np.exp(-4.0 * v**2)
        * np.sin(u)
        * (6.0 * v - _TWO_PI - 4.0 * v * np.cos(u))
    )


def _manufactured_primitive(t, x, v):
    u = 2.0 * np.asarray(x) - _TWO_PI * t
    v = np.asarray(v)
    cu = np.cos(u)
    return (
        (1.0 / _SQRT_PI)
        * np.exp(-4.0 * v**2)
        * ((_TWO_PI - 6.0 * v) * cu + 2.0 * v * cu**2)
    )


def manufactured_source() -> SourceTerm:
    """Forcing that makes the travelling wave an exact solution, with its x-primitive."""
    return SourceTerm(g=_manufactured_g, G=_manufactured_primitive)
