"""Run configuration, CSV output, binary checkpoints and the ``wgn`` command line.

Exit codes: 0 ok, 1 verification failure, 2 bad input, 3 cavitation,
4 elliptic solver failure, 5 instability.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import struct
import sys
from pathlib import Path
from typing import Literal, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .diagnostics import (
    DEFAULT_PARAMETER_SETS,
    DiagnosticsRecord,
    DispersionDomainError,
    dispersion_columns,
    dispersion_table,
)
from .operators import Bathymetry, PhysParams, State, depth
from .spectral import Grid, make_grid
from .timestepper import RunStatus, Sink, StepConfig, run

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2
EXIT_CODES = {
    RunStatus.COMPLETED: EXIT_OK,
    RunStatus.CAVITATION_ABORT: 3,
    RunStatus.SOLVER_ABORT: 4,
    RunStatus.INSTABILITY_ABORT: 5,
}

SNAPSHOT_HEADER = ("x", "zeta", "v", "h", "b")


# -- configuration --------------------------------------------------------------

class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class GridConfig(_Section):
    n_points: int = Field(ge=8)
    length: float = Field(gt=0)


class ParamsConfig(_Section):
    mu: float = Field(ge=0)
    epsilon: float = Field(ge=0, le=1)
    beta: float = Field(ge=0, le=1)
    h0: float = Field(0.1, gt=0, lt=1)
    full_dispersion: bool = True


class InitialConfig(_Section):
    """Initial data.

    ``gaussian``: ``zeta = A exp(-((x - c)/w)^2)``; ``velocity`` picks
    ``v = zeta`` (``right_moving``, the default), ``v = 0`` (``zero``), or the
    diverging flow ``v = U (x - c)/w exp(-((x - c)/w)^2)`` (``diverging``).
    ``mode``: ``zeta = A cos(2 pi mode_k x / L)``, ``v = 0``.
    ``file``: a snapshot CSV; ``checkpoint``: a checkpoint (state and bottom).
    """

    kind: Literal["gaussian", "mode", "file", "checkpoint"]
    amplitude: float = 0.0
    width: float = Field(1.0, gt=0)
    center: Optional[float] = None
    mode_k: int = 1
    velocity: Literal["right_moving", "zero", "diverging"] = "right_moving"
    velocity_amplitude: float = 0.0
    path: Optional[str] = None

    @model_validator(mode="after")
    def _needs_path(self):
        if self.kind in ("file", "checkpoint") and not self.path:
            raise ValueError(f"initial kind '{self.kind}' requires 'path'")
        return self


class BathymetryConfig(_Section):
    """``gaussian_bump``: ``a exp(-((x - c)/w)^2)``; ``bar``: a plateau of height
    ``a`` and length ``bar_length`` with tanh flanks of width ``w``."""

    kind: Literal["flat", "gaussian_bump", "bar"] = "flat"
    amplitude: float = 1.0
    center: Optional[float] = None
    width: float = Field(1.0, gt=0)
    bar_length: float = Field(4.0, gt=0)


class SteppingConfig(_Section):
    cfl: float = Field(0.5, gt=0, le=1)
    dt_override: Optional[float] = Field(None, gt=0)
    t_end: float = Field(ge=0)
    output_every: float = Field(gt=0)
    energy_s: float = 2.0


class SolverConfig(_Section):
    tol: float = Field(1e-10, gt=0)
    max_iter: int = Field(500, gt=0)


class OutputsConfig(_Section):
    snapshot_dir: Optional[str] = None
    diagnostics_path: Optional[str] = None
    checkpoint_path: Optional[str] = None


class RunConfig(_Section):
    grid: GridConfig
    params: ParamsConfig
    initial: InitialConfig
    bathymetry: BathymetryConfig = Field(default_factory=BathymetryConfig)
    stepping: SteppingConfig
    solver: SolverConfig = Field(default_factory=SolverConfig)
    outputs: OutputsConfig = Field(default_factory=OutputsConfig)

    @model_validator(mode="after")
    def _check_values(self):
        if self.grid.n_points % 2:
            raise ValueError("grid.n_points must be even")
        PhysParams(**self.params.model_dump())
        return self


def load_config(path: str | Path) -> RunConfig:
    with open(path) as fh:
        return RunConfig.model_validate(json.load(fh))


def _centered(grid: Grid, center: Optional[float]) -> np.ndarray:
    c = grid.length / 2.0 if center is None else center
    return grid.x - c


def build_bathymetry(cfg: BathymetryConfig, grid: Grid) -> Bathymetry:
    if cfg.kind == "flat":
        return Bathymetry.flat(grid)
    x = _centered(grid, cfg.center)
    if cfg.kind == "gaussian_bump":
        b = cfg.amplitude * np.exp(-(x / cfg.width) ** 2)
    else:
        half = cfg.bar_length / 2.0
        b = 0.5 * cfg.amplitude * (np.tanh((x + half) / cfg.width) - np.tanh((x - half) / cfg.width))
    return Bathymetry(grid, b)


def build_initial(cfg: InitialConfig, grid: Grid) -> State:
    if cfg.kind == "gaussian":
        x = _centered(grid, cfg.center)
        shape = np.exp(-(x / cfg.width) ** 2)
        zeta = cfg.amplitude * shape
        if cfg.velocity == "right_moving":
            v = zeta.copy()
        elif cfg.velocity == "zero":
            v = np.zeros_like(zeta)
        else:
            v = cfg.velocity_amplitude * (x / cfg.width) * shape
        return State(zeta, v)
    if cfg.kind == "mode":
        zeta = cfg.amplitude * np.cos(2.0 * np.pi * cfg.mode_k * grid.x / grid.length)
        return State(zeta, np.zeros_like(zeta))
    data = read_snapshot(cfg.path)
    if data["zeta"].shape != (grid.n_points,):
        raise ValueError("initial file does not match the grid")
    return State(data["zeta"], data["v"])


# -- CSV output -------------------------------------------------------------------

def snapshot_name(t: float, post_mortem: bool = False) -> str:
    return f"snapshot_t{t:.6f}{'_postmortem' if post_mortem else ''}.csv"


def write_snapshot(path: str | Path, state: State, bath: Bathymetry, params: PhysParams) -> None:
    h = depth(state.zeta, bath, params)
    cols = np.column_stack([bath.grid.x, state.zeta, state.v, h, bath.b])
    with open(path, "w", newline="") as fh:
        fh.write(",".join(SNAPSHOT_HEADER) + "\n")
        np.savetxt(fh, cols, delimiter=",", fmt="%.17g")


def read_snapshot(path: str | Path) -> dict[str, np.ndarray]:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    return {name: data[:, i] for i, name in enumerate(header)}


class CsvSink(Sink):
    """Writes snapshots, the diagnostics table and the rolling checkpoint."""

    def __init__(self, outputs: OutputsConfig):
        self.outputs = outputs
        self._diag = None
        if outputs.snapshot_dir:
            Path(outputs.snapshot_dir).mkdir(parents=True, exist_ok=True)
        if outputs.diagnostics_path:
            Path(outputs.diagnostics_path).parent.mkdir(parents=True, exist_ok=True)
            self._diag = open(outputs.diagnostics_path, "w", newline="")
            self._writer = csv.writer(self._diag)
            self._writer.writerow(DiagnosticsRecord.FIELDS)

    def diagnostics(self, record: DiagnosticsRecord) -> None:
        if self._diag is not None:
            self._writer.writerow([repr(getattr(record, f)) for f in DiagnosticsRecord.FIELDS])
            self._diag.flush()

    def snapshot(self, state, bath, params, post_mortem=False) -> None:
        if self.outputs.snapshot_dir:
            path = Path(self.outputs.snapshot_dir) / snapshot_name(state.t, post_mortem)
            write_snapshot(path, state, bath, params)
        if self.outputs.checkpoint_path and not post_mortem:
            checkpoint_write(state, bath, params, self.outputs.checkpoint_path)

    def close(self) -> None:
        if self._diag is not None:
            self._diag.close()


# -- checkpoints --------------------------------------------------------------------

CHECKPOINT_MAGIC = b"WGN1"
CHECKPOINT_VERSION = 1
# magic, version, n_points, flags, length, t, mu, epsilon, beta, h0, mu_max
_HEADER = struct.Struct("<4sIII7d")


class CheckpointError(ValueError):
    pass


def checkpoint_write(state: State, bath: Bathymetry, params: PhysParams, path: str | Path) -> None:
    """Little-endian layout: fixed header, then zeta, v and b as float64 arrays."""
    grid = bath.grid
    header = _HEADER.pack(CHECKPOINT_MAGIC, CHECKPOINT_VERSION, grid.n_points,
                          int(params.full_dispersion), grid.length, state.t, params.mu,
                          params.epsilon, params.beta, params.h0, params.mu_max)
    body = b"".join(np.ascontiguousarray(a, dtype="<f8").tobytes()
                    for a in (state.zeta, state.v, bath.b))
    tmp = Path(str(path) + ".tmp")
    tmp.write_bytes(header + body)
    tmp.replace(path)


def checkpoint_read(path: str | Path) -> tuple[State, Bathymetry, PhysParams]:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise CheckpointError("checkpoint truncated in header")
    magic, version, n, flags, length, t, mu, eps, beta, h0, mu_max = _HEADER.unpack_from(raw)
    if magic != CHECKPOINT_MAGIC:
        raise CheckpointError("not a WGN checkpoint (bad magic)")
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    expected = _HEADER.size + 3 * 8 * n
    if len(raw) != expected:
        raise CheckpointError(f"checkpoint size {len(raw)} bytes, expected {expected}")
    arrays = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size).reshape(3, n).astype(float)
    grid = make_grid(n, length)
    params = PhysParams(mu, eps, beta, h0, full_dispersion=bool(flags & 1), mu_max=mu_max)
    return State(arrays[0].copy(), arrays[1].copy(), t), Bathymetry(grid, arrays[2].copy()), params


# -- commands -----------------------------------------------------------------------

def cmd_simulate(config_path: str) -> int:
    try:
        cfg = load_config(config_path)
        grid = make_grid(cfg.grid.n_points, cfg.grid.length)
        params = PhysParams(**cfg.params.model_dump())
        if cfg.initial.kind == "checkpoint":
            state, bath, _ = checkpoint_read(cfg.initial.path)
            if bath.grid.n_points != grid.n_points or bath.grid.length != grid.length:
                raise ValueError("checkpoint grid does not match the configured grid")
        else:
            bath = build_bathymetry(cfg.bathymetry, grid)
            state = build_initial(cfg.initial, grid)
        step_cfg = StepConfig(t_end=cfg.stepping.t_end, output_every=cfg.stepping.output_every,
                              cfl=cfg.stepping.cfl, dt_override=cfg.stepping.dt_override,
                              tol=cfg.solver.tol, max_iter=cfg.solver.max_iter,
                              energy_s=cfg.stepping.energy_s)
    except (OSError, json.JSONDecodeError, ValidationError, ValueError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG

    sink = CsvSink(cfg.outputs)
    try:
        outcome = run(state, bath, params, step_cfg, [sink])
    finally:
        sink.close()
    log.info("run finished: %s after %d steps at t=%.6f", outcome.status.value,
             outcome.steps_taken, outcome.final_state.t)
    return EXIT_CODES[outcome.status]


def parse_parameter_sets(text: str) -> list[tuple[float, float, float]]:
    sets = []
    for chunk in text.split(";"):
        if not chunk.strip():
            continue
        values = tuple(float(p) for p in chunk.split(","))
        if len(values) != 3:
            raise ValueError(f"expected theta,alpha,gamma, got {chunk!r}")
        sets.append(values)
    return sets


def cmd_dispersion(mu: float, xi_max: float, n_xi: int,
                   parameter_sets: Sequence[tuple] = DEFAULT_PARAMETER_SETS,
                   out_path: str | None = None) -> int:
    """Write the dispersion table on ``xi = xi_max * i / n_xi``, ``i = 1..n_xi``."""
    if mu <= 0 or xi_max <= 0 or n_xi < 0:
        print("dispersion: need mu > 0, xi_max > 0, n_xi >= 0", file=sys.stderr)
        return EXIT_CONFIG
    xi = xi_max * np.arange(1, n_xi + 1) / max(n_xi, 1)
    try:
        rows = dispersion_table(mu, xi, parameter_sets)
    except DispersionDomainError as err:
        print(f"dispersion: {err}", file=sys.stderr)
        return EXIT_CONFIG
    fh = open(out_path, "w", newline="") if out_path else sys.stdout
    try:
        writer = csv.writer(fh)
        writer.writerow(dispersion_columns(parameter_sets))
        writer.writerows([[repr(v) for v in row] for row in rows])
    finally:
        if out_path:
            fh.close()
    return EXIT_OK


def _load_sweep(spec_path: str | None):
    from .verification import SweepSpec

    if spec_path is None:
        return SweepSpec()
    with open(spec_path) as fh:
        return SweepSpec.model_validate(json.load(fh))


def _emit_reports(reports, out_path: str | None) -> int:
    payload = {"passed": all(r.passed for r in reports),
               "reports": [r.to_dict() for r in reports]}
    text = json.dumps(payload, indent=2, sort_keys=True)
    if out_path:
        Path(out_path).write_text(text + "\n")
    else:
        print(text)
    return EXIT_OK if payload["passed"] else EXIT_FAILED


def cmd_verify(spec_path: str | None = None, out_path: str | None = None) -> int:
    from .verification import check_operator_contracts, check_symbol_estimates

    try:
        spec = _load_sweep(spec_path)
    except (OSError, json.JSONDecodeError, ValidationError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    return _emit_reports(check_symbol_estimates(spec) + check_operator_contracts(spec), out_path)


def cmd_convergence(spec_path: str | None = None, out_path: str | None = None) -> int:
    from .verification import convergence_orders

    try:
        spec = _load_sweep(spec_path)
    except (OSError, json.JSONDecodeError, ValidationError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    return _emit_reports(convergence_orders(spec), out_path)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wgn", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a simulation from a JSON config")
    p.add_argument("--config", required=True)

    p = sub.add_parser("dispersion", help="tabulate dispersion relations as CSV")
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--xi-max", type=float, default=10.0)
    p.add_argument("--n-xi", type=int, default=200)
    p.add_argument("--params", default="-1,1,1;0.207,1,0.071",
                   help='parameter sets "theta,alpha,gamma[;...]"; write --params=-1,1,1 '
                        'when the first value is negative')
    p.add_argument("--out")

    for name, helptext in (("verify", "operator and symbol property campaigns"),
                           ("convergence", "temporal, spatial and mu-order studies")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", help="SweepSpec JSON (defaults if omitted)")
        p.add_argument("--out", help="report path (stdout if omitted)")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "simulate":
        return cmd_simulate(args.config)
    if args.command == "dispersion":
        try:
            sets = parse_parameter_sets(args.params)
        except ValueError as err:
            print(f"dispersion: {err}", file=sys.stderr)
            return EXIT_CONFIG
        return cmd_dispersion(args.mu, args.xi_max, args.n_xi, sets, args.out)
    if args.command == "verify":
        return cmd_verify(args.config, args.out)
    return cmd_convergence(args.config, args.out)


if __name__ == "__main__":
    sys.exit(main())
