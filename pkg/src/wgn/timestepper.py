"""Classical RK4 integration with CFL step selection and run guards."""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .operators import (
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    CAVITATION_SLACK,
    Bathymetry,
    CavitationError,
    EllipticSolveError,
    EllipticSolveReport,
    PhysParams,
    State,
    depth,
    rhs,
)

log = logging.getLogger(__name__)

INSTABILITY_BOUND = 1e6


class RunStatus(str, enum.Enum):
    COMPLETED = "completed"
    CAVITATION_ABORT = "cavitation_abort"
    SOLVER_ABORT = "solver_abort"
    INSTABILITY_ABORT = "instability_abort"


class InstabilityError(RuntimeError):
    pass


@dataclass(frozen=True)
class StepConfig:
    t_end: float
    output_every: float
    cfl: float = 0.5
    dt_override: Optional[float] = None
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    energy_s: float = 2.0

    def __post_init__(self):
        if not 0.0 < self.cfl <= 1.0:
            raise ValueError("cfl must lie in (0, 1]")
        if self.dt_override is not None and not self.dt_override > 0:
            raise ValueError("dt_override must be positive")
        if self.t_end < 0:
            raise ValueError("t_end must be nonnegative")
        if not self.output_every > 0:
            raise ValueError("output_every must be positive")


@dataclass(frozen=True)
class RunOutcome:
    final_state: State
    status: RunStatus
    steps_taken: int


class Sink:
    """Receiver for run output. Subclasses override what they need."""

    def diagnostics(self, record) -> None:
        pass

    def snapshot(self, state: State, bath: Bathymetry, params: PhysParams,
                 post_mortem: bool = False) -> None:
        pass


def guard_cavitation(state: State, bath: Bathymetry, params: PhysParams) -> float:
    """Return ``min h``; raise ``CavitationError`` if it is below ``h0``."""
    min_h = float(np.min(depth(state.zeta, bath, params)))
    if not min_h >= params.h0 - CAVITATION_SLACK:
        raise CavitationError(min_h, params.h0)
    return min_h


def cfl_dt(state: State, bath: Bathymetry, params: PhysParams, cfl: float = 0.5) -> float:
    """``cfl * dx / (sqrt(max h) + epsilon max|v|)``."""
    guard_cavitation(state, bath, params)
    h = depth(state.zeta, bath, params)
    speed = np.sqrt(np.max(h)) + params.epsilon * np.max(np.abs(state.v))
    return float(cfl * bath.grid.dx / speed)


def step_rk4(state: State, bath: Bathymetry, params: PhysParams, dt: float,
             tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
             reports: Optional[list] = None) -> State:
    """Advance ``state`` by ``dt`` with the classical four-stage scheme.

    Elliptic solve reports of the four stages are appended to ``reports``.
    """
    z0, v0 = state.zeta, state.v

    def stage(z, v, t):
        dz, dv, rep = rhs(State(z, v, t), bath, params, tol, max_iter)
        if reports is not None:
            reports.append(rep)
        return dz, dv

    k1z, k1v = stage(z0, v0, state.t)
    k2z, k2v = stage(z0 + 0.5 * dt * k1z, v0 + 0.5 * dt * k1v, state.t + 0.5 * dt)
    k3z, k3v = stage(z0 + 0.5 * dt * k2z, v0 + 0.5 * dt * k2v, state.t + 0.5 * dt)
    k4z, k4v = stage(z0 + dt * k3z, v0 + dt * k3v, state.t + dt)
    zeta = z0 + (dt / 6.0) * (k1z + 2.0 * k2z + 2.0 * k3z + k4z)
    v = v0 + (dt / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    return State(zeta, v, state.t + dt)


def _check_finite(state: State) -> None:
    for arr in (state.zeta, state.v):
        if not np.all(np.isfinite(arr)) or np.max(np.abs(arr)) > INSTABILITY_BOUND:
            raise InstabilityError(f"solution blew up at t = {state.t:.6g}")


def run(initial: State, bath: Bathymetry, params: PhysParams, cfg: StepConfig,
        sinks: Sequence[Sink] = ()) -> RunOutcome:
    """Integrate from ``initial`` to ``cfg.t_end``.

    Diagnostics are emitted at ``t = 0`` and every ``cfg.output_every``; steps
    are shortened to land on output times and on ``t_end``. Guard failures
    end the run with an abort status instead of raising.
    """
    from .diagnostics import measure

    state = initial
    steps = 0
    last_iters = 0

    def emit(st: State, iters: int) -> None:
        if not sinks:
            return
        rec = measure(st, bath, params, s=cfg.energy_s, cg_iterations=iters)
        for sink in sinks:
            sink.diagnostics(rec)
            sink.snapshot(st, bath, params)

    def abort(status: RunStatus, err: Exception) -> RunOutcome:
        log.warning("run aborted at t=%.6g: %s", state.t, err)
        for sink in sinks:
            sink.snapshot(state, bath, params, post_mortem=True)
        return RunOutcome(state, status, steps)

    try:
        guard_cavitation(state, bath, params)
        _check_finite(state)
    except CavitationError as err:
        return abort(RunStatus.CAVITATION_ABORT, err)
    except InstabilityError as err:
        return abort(RunStatus.INSTABILITY_ABORT, err)

    emit(state, 0)
    t_end = cfg.t_end
    # output times are multiples of output_every, also after a restart
    n_out = int(np.floor(state.t / cfg.output_every * (1.0 + 1e-12))) + 1
    next_out = min(n_out * cfg.output_every, t_end)
    while state.t < t_end:
        try:
            dt = cfg.dt_override if cfg.dt_override is not None else cfl_dt(state, bath, params, cfg.cfl)
            remaining = next_out - state.t
            landing = remaining <= dt * (1.0 + 1e-9)
            if landing:
                dt = remaining
            reports: list[EllipticSolveReport] = []
            new = step_rk4(state, bath, params, dt, cfg.tol, cfg.max_iter, reports)
            if landing:
                new = State(new.zeta, new.v, next_out)
            _check_finite(new)
            guard_cavitation(new, bath, params)
        except CavitationError as err:
            return abort(RunStatus.CAVITATION_ABORT, err)
        except EllipticSolveError as err:
            return abort(RunStatus.SOLVER_ABORT, err)
        except InstabilityError as err:
            return abort(RunStatus.INSTABILITY_ABORT, err)
        state = new
        steps += 1
        last_iters = reports[-1].iterations if reports else 0
        if landing:
            emit(state, last_iters)
            n_out += 1
            next_out = min(n_out * cfg.output_every, t_end)
    return RunOutcome(state, RunStatus.COMPLETED, steps)
