"""Configuration parsing, simulation driving, and file emission.

Runs are described by flat ``key = value`` text files (diff-friendly, one
knob per line); command-line flags override file keys.  Each run writes a
diagnostics CSV, optional phase-space snapshots, and a manifest capturing the
fully resolved configuration.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .diagnostics import l2_relative_error, l2_relative_error_field, make_record
from .field import NeutralityError
from .integrators import SchemeKind, TimeState, advance
from .phase_space import DistributionField, PhaseGrid
from .scenarios import (
    LANDAU_V_INTERVAL,
    LANDAU_X_INTERVAL,
    MANUFACTURED_V_INTERVAL,
    MANUFACTURED_X_INTERVAL,
    TWO_STREAM_V_INTERVAL,
    TWO_STREAM_X_INTERVAL,
    ScenarioConfig,
    ScenarioKind,
    init_field,
    manufactured_exact,
    manufactured_source,
)

__all__ = [
    "ConfigError",
    "BlowupError",
    "RunConfig",
    "parse_config",
    "run_simulation",
    "run_convergence_study",
    "write_snapshot",
    "read_snapshot",
    "main",
]

OUTPUT_DIR_ENV = "VPSPECTRAL_OUTPUT_DIR"

DIAGNOSTICS_HEADER = "t,Q,P,energy,first_mode_a1,first_mode_abs,cfl_ok"

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


class BlowupError(RuntimeError):
    """Non-finite nodal values during a run."""

    def __init__(self, step: int):
        super().__init__(f"non-finite nodal values after step {step}")
        self.step = step


_KNOWN_KEYS = {
    "scenario.kind",
    "scenario.alpha",
    "scenario.beta",
    "scenario.epsilon",
    "scenario.kappa",
    "scenario.gamma",
    "domain.x0",
    "domain.x1",
    "domain.v0",
    "domain.v1",
    "grid.N",
    "grid.M",
    "scheme",
    "time.dt",
    "time.T",
    "taylor.order",
    "output.dir",
    "output.snapshots",
    "cfl.strict",
    "field.neutrality_fix",
    "initial.file",
}

_SCENARIO_PARAM_KEYS = {
    ScenarioKind.MANUFACTURED: set(),
    ScenarioKind.TWOSTREAM: {"alpha", "beta", "epsilon", "kappa"},
    ScenarioKind.LANDAU: {"gamma", "kappa"},
}

_DEFAULT_DOMAINS = {
    ScenarioKind.MANUFACTURED: (MANUFACTURED_X_INTERVAL, MANUFACTURED_V_INTERVAL),
    ScenarioKind.TWOSTREAM: (TWO_STREAM_X_INTERVAL, TWO_STREAM_V_INTERVAL),
    ScenarioKind.LANDAU: (LANDAU_X_INTERVAL, LANDAU_V_INTERVAL),
}


@dataclass(frozen=True)
class RunConfig:
    """A fully validated simulation run."""

    scenario: ScenarioConfig
    scheme: SchemeKind
    N: int
    M: int
    dt: float
    T: float
    taylor_order: Optional[int] = None
    output_dir: Path = Path("out")
    snapshot_times: tuple[float, ...] = ()
    strict_cfl: bool = False
    neutrality_fix: bool = False
    initial_file: Optional[Path] = None


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _parse_bool(raw: str, where: str) -> bool:
    low = raw.strip().lower()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise ConfigError(f"{where}: expected a boolean, got {raw!r}")


def _parse_float(raw: str, where: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{where}: expected a number, got {raw!r}")


def _parse_int(raw: str, where: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{where}: expected an integer, got {raw!r}")


def read_config_file(path: Path) -> dict[str, str]:
    """Read ``key = value`` lines; unknown keys are hard errors."""
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    items: dict[str, str] = {}
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        if key in items:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        items[key] = value
    return items


def _near_multiple(value: float, step: float) -> bool:
    ratio = value / step
    return abs(ratio - round(ratio)) <= 2.0 * np.spacing(max(1.0, abs(ratio)))


def build_config(items: dict[str, str], overrides: dict[str, str]) -> RunConfig:
    """Merge file keys and overrides into a validated RunConfig."""
    for key in overrides:
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"unknown override key {key!r}")
    merged = dict(items)
    merged.update(overrides)

    for required in ("scenario.kind", "scheme", "grid.N", "grid.M", "time.dt", "time.T"):
        if required not in merged:
            raise ConfigError(f"missing required key {required!r}")

    try:
        kind = ScenarioKind.parse(merged["scenario.kind"])
        scheme = SchemeKind.parse(merged["scheme"])
    except ValueError as exc:
        raise ConfigError(str(exc))

    param_keys = _SCENARIO_PARAM_KEYS[kind]
    params = {}
    for key in ("alpha", "beta", "epsilon", "kappa", "gamma"):
        full = f"scenario.{key}"
        if full in merged:
            if key not in param_keys:
                raise ConfigError(
                    f"{full} does not apply to the {kind.value} scenario"
                )
            params[key] = _parse_float(merged[full], full)

    default_x, default_v = _DEFAULT_DOMAINS[kind]
    x0 = _parse_float(merged["domain.x0"], "domain.x0") if "domain.x0" in merged else default_x[0]
    x1 = _parse_float(merged["domain.x1"], "domain.x1") if "domain.x1" in merged else default_x[1]
    v0 = _parse_float(merged["domain.v0"], "domain.v0") if "domain.v0" in merged else default_v[0]
    v1 = _parse_float(merged["domain.v1"], "domain.v1") if "domain.v1" in merged else default_v[1]

    try:
        if kind is ScenarioKind.MANUFACTURED:
            scenario = ScenarioConfig.manufactured()
            if not (
                np.allclose((x0, x1), MANUFACTURED_X_INTERVAL)
                and np.allclose((v0, v1), MANUFACTURED_V_INTERVAL)
            ):
                raise ConfigError("the manufactured scenario has a fixed domain")
        elif kind is ScenarioKind.TWOSTREAM:
            scenario = ScenarioConfig.two_stream(
                x_interval=(x0, x1), v_interval=(v0, v1), **params
            )
        else:
            scenario = ScenarioConfig.landau(
                x_interval=(x0, x1), v_interval=(v0, v1), **params
            )
    except ValueError as exc:
        raise ConfigError(str(exc))

    n = _parse_int(merged["grid.N"], "grid.N")
    m = _parse_int(merged["grid.M"], "grid.M")
    if n < 4 or m < 4:
        raise ConfigError("grid.N and grid.M must be at least 4")
    if n % 2 or m % 2:
        raise ConfigError("grid.N and grid.M must be even")
    for label, count in (("grid.N", n), ("grid.M", m)):
        if count & (count - 1):
            print(
                f"warning: {label} = {count} is not a power of two; "
                "mode analysis falls back to direct sums",
                file=sys.stderr,
            )

    dt = _parse_float(merged["time.dt"], "time.dt")
    total = _parse_float(merged["time.T"], "time.T")
    if dt <= 0 or total <= 0:
        raise ConfigError("time.dt and time.T must be positive")
    if not _near_multiple(total, dt):
        raise ConfigError(
            f"time.T = {total} is not an integer number of timesteps time.dt = {dt}"
        )

    snapshots: tuple[float, ...] = ()
    if merged.get("output.snapshots", "").strip():
        parts = [p for p in merged["output.snapshots"].split(",") if p.strip()]
        times = tuple(_parse_float(p, "output.snapshots") for p in parts)
        for t_snap in times:
            if t_snap < 0 or t_snap > total or not _near_multiple(t_snap, dt):
                raise ConfigError(
                    f"snapshot time {t_snap} is not a multiple of dt within the run"
                )
        snapshots = tuple(sorted(times))

    taylor_order = None
    if "taylor.order" in merged:
        taylor_order = _parse_int(merged["taylor.order"], "taylor.order")
        if taylor_order < 1:
            raise ConfigError("taylor.order must be >= 1")

    # output dir precedence: explicit flag/file key, then environment, then default
    if "output.dir" in merged:
        out_dir = Path(merged["output.dir"])
    elif os.environ.get(OUTPUT_DIR_ENV):
        out_dir = Path(os.environ[OUTPUT_DIR_ENV])
    else:
        out_dir = Path("out")

    initial_file = Path(merged["initial.file"]) if "initial.file" in merged else None

    return RunConfig(
        scenario=scenario,
        scheme=scheme,
        N=n,
        M=m,
        dt=dt,
        T=total,
        taylor_order=taylor_order,
        output_dir=out_dir,
        snapshot_times=snapshots,
        strict_cfl=_parse_bool(merged["cfl.strict"], "cfl.strict")
        if "cfl.strict" in merged
        else False,
        neutrality_fix=_parse_bool(
            merged["field.neutrality_fix"], "field.neutrality_fix"
        )
        if "field.neutrality_fix" in merged
        else False,
        initial_file=initial_file,
    )


def parse_config(path: Path, overrides: Optional[dict[str, str]] = None) -> RunConfig:
    """Load and validate a run configuration, applying flag overrides."""
    return build_config(read_config_file(Path(path)), overrides or {})


def _manifest_lines(cfg: RunConfig) -> list[str]:
    sc = cfg.scenario
    lines = {
        "library.version": __version__,
        "scenario.kind": sc.kind.value,
        "domain.x0": _fmt(sc.x_interval[0]),
        "domain.x1": _fmt(sc.x_interval[1]),
        "domain.v0": _fmt(sc.v_interval[0]),
        "domain.v1": _fmt(sc.v_interval[1]),
        "grid.N": str(cfg.N),
        "grid.M": str(cfg.M),
        "scheme": cfg.scheme.value,
        "time.dt": _fmt(cfg.dt),
        "time.T": _fmt(cfg.T),
        "taylor.order": "default" if cfg.taylor_order is None else str(cfg.taylor_order),
        "cfl.strict": str(cfg.strict_cfl).lower(),
        "field.neutrality_fix": str(cfg.neutrality_fix).lower(),
        "output.snapshots": ",".join(_fmt(t) for t in cfg.snapshot_times),
        "initial.file": "" if cfg.initial_file is None else str(cfg.initial_file),
    }
    for key, value in sc.params.items():
        lines[f"scenario.{key}"] = _fmt(value)
    return [f"{k} = {lines[k]}" for k in sorted(lines)]


def write_snapshot(path: Path, fld: DistributionField, t: float) -> None:
    """Plain-text snapshot: header lines, then nodal values in n-major order."""
    grid = fld.grid
    x0, x1 = grid.xgrid.interval()
    v0, v1 = grid.vgrid.interval()
    with open(path, "w") as fh:
        fh.write(f"N {grid.xgrid.count}\n")
        fh.write(f"M {grid.vgrid.count}\n")
        fh.write(f"x0 {_fmt(x0)}\nx1 {_fmt(x1)}\n")
        fh.write(f"v0 {_fmt(v0)}\nv1 {_fmt(v1)}\n")
        fh.write(f"t {_fmt(t)}\n")
        for value in fld.values.ravel():
            fh.write(_fmt(value) + "\n")


def read_snapshot(path: Path) -> tuple[np.ndarray, dict[str, float]]:
    """Read a snapshot back as (values, header) with binary64 round trip."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"snapshot file not found: {path}")
    header: dict[str, float] = {}
    values: list[float] = []
    with open(path) as fh:
        for line in fh:
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            parts = stripped.split()
            if len(parts) == 2 and parts[0] in ("N", "M", "x0", "x1", "v0", "v1", "t"):
                header[parts[0]] = float(parts[1])
            else:
                values.append(float(parts[0]))
    for key in ("N", "M", "x0", "x1", "v0", "v1", "t"):
        if key not in header:
            raise ConfigError(f"{path}: snapshot header is missing {key!r}")
    n, m = int(header["N"]), int(header["M"])
    if len(values) != n * m:
        raise ConfigError(
            f"{path}: expected {n * m} values, found {len(values)}"
        )
    return np.array(values).reshape(n, m), header


def _build_initial(cfg: RunConfig, grid: PhaseGrid) -> DistributionField:
    if cfg.initial_file is None:
        return init_field(cfg.scenario, grid)
    values, header = read_snapshot(cfg.initial_file)
    if (int(header["N"]), int(header["M"])) != grid.shape:
        raise ConfigError(
            f"initial data is {int(header['N'])}x{int(header['M'])}, "
            f"run grid is {grid.shape[0]}x{grid.shape[1]}"
        )
    domain_ok = np.allclose(
        (header["x0"], header["x1"]), grid.xgrid.interval()
    ) and np.allclose((header["v0"], header["v1"]), grid.vgrid.interval())
    if not domain_ok:
        raise ConfigError("initial data domain does not match the run domain")
    return DistributionField(values, grid)


def _record_row(rec) -> str:
    return ",".join(
        [
            _fmt(rec.t),
            _fmt(rec.Q),
            _fmt(rec.P),
            _fmt(rec.energy),
            _fmt(rec.first_mode_a1),
            _fmt(rec.first_mode_abs),
            "true" if rec.cfl_ok else "false",
        ]
    )


def _run_simulation(cfg: RunConfig) -> None:
    grid = PhaseGrid.create(
        cfg.N, cfg.M, cfg.scenario.x_interval, cfg.scenario.v_interval
    )
    initial = _build_initial(cfg, grid)
    if not np.isfinite(initial.values).all():
        raise BlowupError(0)

    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    (out / "run_manifest.txt").write_text("\n".join(_manifest_lines(cfg)) + "\n")

    snapshot_steps = {round(t / cfg.dt): t for t in cfg.snapshot_times}
    state = TimeState.initial(initial, cfg.dt, neutrality_fix=cfg.neutrality_fix)
    if 0 in snapshot_steps:
        write_snapshot(out / "snapshot_t0.000000.dat", state.current, 0.0)

    src = (
        manufactured_source()
        if cfg.scenario.kind is ScenarioKind.MANUFACTURED
        else None
    )
    with open(out / "diagnostics.csv", "w") as diag:
        diag.write(DIAGNOSTICS_HEADER + "\n")

        def observer(st: TimeState, rec) -> None:
            if not np.isfinite(st.current.values).all():
                raise BlowupError(st.k)
            diag.write(_record_row(rec) + "\n")
            if st.k in snapshot_steps:
                t_snap = snapshot_steps[st.k]
                write_snapshot(
                    out / f"snapshot_t{t_snap:.6f}.dat", st.current, t_snap
                )

        advance(
            state,
            cfg.scheme,
            src,
            T=cfg.T,
            observer=observer,
            taylor_order=cfg.taylor_order,
            strict_cfl=cfg.strict_cfl,
            neutrality_fix=cfg.neutrality_fix,
        )


def run_simulation(cfg: RunConfig) -> int:
    """Run one simulation; returns a process exit status."""
    try:
        _run_simulation(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NeutralityError, BlowupError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def _convergence_rows(cfg: RunConfig, dts: Sequence[float]) -> list[str]:
    grid = PhaseGrid.create(
        cfg.N, cfg.M, cfg.scenario.x_interval, cfg.scenario.v_interval
    )
    src = manufactured_source()
    exact_f, exact_e = manufactured_exact(cfg.T, grid)
    rows = []
    for scheme in SchemeKind:
        prev: Optional[tuple[float, float]] = None
        for dt in dts:
            state = TimeState.initial(
                init_field(cfg.scenario, grid), dt, neutrality_fix=cfg.neutrality_fix
            )
            state = advance(
                state,
                scheme,
                src,
                T=cfg.T,
                taylor_order=cfg.taylor_order,
                strict_cfl=cfg.strict_cfl,
                neutrality_fix=cfg.neutrality_fix,
            )
            err_f = l2_relative_error(state.current, exact_f)
            err_e = l2_relative_error_field(state.efield.nodal, exact_e, grid.xgrid)
            if prev is None:
                rate_f = rate_e = ""
            else:
                rate_f = _fmt(math.log2(prev[0] / err_f))
                rate_e = _fmt(math.log2(prev[1] / err_e))
            rows.append(
                f"{scheme.value},{_fmt(dt)},{_fmt(err_f)},{rate_f},{_fmt(err_e)},{rate_e}"
            )
            prev = (err_f, err_e)
    return rows


def run_convergence_study(cfg: RunConfig, dts: Sequence[float]) -> int:
    """Run the timestep ladder for every scheme and write the rate table."""
    try:
        if cfg.scenario.kind is not ScenarioKind.MANUFACTURED:
            raise ConfigError("the convergence study needs the manufactured scenario")
        if len(dts) < 1:
            raise ConfigError("the timestep ladder is empty")
        if any(b >= a for a, b in zip(dts, dts[1:])):
            raise ConfigError("the timestep ladder must be sorted descending")
        for dt in dts:
            if not _near_multiple(cfg.T, dt):
                raise ConfigError(
                    f"ladder entry {dt} is not an integer divisor of time.T = {cfg.T}"
                )
        rows = _convergence_rows(cfg, dts)
        cfg.output_dir.mkdir(parents=True, exist_ok=True)
        table = cfg.output_dir / "convergence.csv"
        table.write_text(
            "scheme,dt,err_f,rate_f,err_e,rate_e\n" + "\n".join(rows) + "\n"
        )
        print(table)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NeutralityError, BlowupError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def inspect_snapshot(path: Path) -> int:
    """Print a snapshot's header and quick statistics."""
    try:
        values, header = read_snapshot(path)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return EXIT_IO
    n, m = int(header["N"]), int(header["M"])
    wx = (header["x1"] - header["x0"]) / n
    wv = (header["v1"] - header["v0"]) / m
    print(f"grid: {n} x {m}")
    print(f"domain: [{header['x0']:g}, {header['x1']:g}] x [{header['v0']:g}, {header['v1']:g}]")
    print(f"t: {header['t']:g}")
    print(f"min: {values.min():.6g}")
    print(f"max: {values.max():.6g}")
    print(f"total mass: {wx * wv * values.sum():.12g}")
    return EXIT_OK


def _overrides_from_args(args: argparse.Namespace) -> dict[str, str]:
    overrides: dict[str, str] = {}
    direct = {
        "scheme": args.scheme,
        "grid.N": args.N,
        "grid.M": args.M,
        "time.dt": args.dt,
        "time.T": args.T,
        "output.dir": args.output_dir,
        "output.snapshots": args.snapshots,
        "taylor.order": args.taylor_order,
    }
    for key, value in direct.items():
        if value is not None:
            overrides[key] = str(value)
    if args.strict_cfl:
        overrides["cfl.strict"] = "true"
    if args.neutrality_fix:
        overrides["field.neutrality_fix"] = "true"
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, _, value = item.partition("=")
        overrides[key.strip()] = value.strip()
    return overrides


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("config", type=Path, help="run configuration file")
    parser.add_argument("--scheme", help="time-marching scheme")
    parser.add_argument("--N", type=int, help="space nodes")
    parser.add_argument("--M", type=int, help="velocity nodes")
    parser.add_argument("--dt", type=float, help="timestep")
    parser.add_argument("--T", type=float, help="final time")
    parser.add_argument("--output-dir", help="output directory")
    parser.add_argument("--snapshots", help="comma-separated snapshot times")
    parser.add_argument("--taylor-order", type=int, help="expansion order override")
    parser.add_argument("--strict-cfl", action="store_true", help="abort on CFL violation")
    parser.add_argument(
        "--neutrality-fix",
        action="store_true",
        help="project out mean charge drift instead of aborting",
    )
    parser.add_argument(
        "--set",
        action="append",
        metavar="KEY=VALUE",
        help="override any config key (repeatable)",
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="vpspectral",
        description="Semi-Lagrangian Fourier collocation solver for the 1D-1V Vlasov-Poisson system",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one simulation")
    _add_run_flags(p_run)

    p_conv = sub.add_parser("converge", help="run a timestep convergence study")
    _add_run_flags(p_conv)
    p_conv.add_argument(
        "--dts", required=True, help="comma-separated timestep ladder, descending"
    )

    p_inspect = sub.add_parser("inspect", help="summarize a snapshot file")
    p_inspect.add_argument("snapshot", type=Path)

    args = parser.parse_args(argv)

    if args.command == "inspect":
        return inspect_snapshot(args.snapshot)

    try:
        cfg = parse_config(args.config, _overrides_from_args(args))
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.command == "run":
        return run_simulation(cfg)

    try:
        dts = [float(p) for p in args.dts.split(",") if p.strip()]
    except ValueError:
        print(f"error: --dts expects numbers, got {args.dts!r}", file=sys.stderr)
        return EXIT_CONFIG
    return run_convergence_study(cfg, dts)


if __name__ == "__main__":
    sys.exit(main())
