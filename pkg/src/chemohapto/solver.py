"""
Explicit time integration of the chemotaxis-haptotaxis system.

One step advances, in this order,

1. ``w <- w * exp(-dt * v)`` (exact for frozen ``v``), ``int_v += dt * v``;
2. ``u <- u - dt * div F(u, v, w_new) + dt * mu u (1 - u - w_new)``;
3. ``v <- v + dt * (lap v - v + u_new)``.

A step whose density dips below ``-NEG_TOL`` is rejected and retried with
half the step; roundoff negatives above that are clipped to zero.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .grid import Grid, divergence, laplacian
from .physics import DiffusivitySpec, Sensitivities, advective_velocity, assemble_flux, eval_D

log = logging.getLogger(__name__)

NEG_TOL = 1e-14
TINY = 1e-300


class SolverFault(RuntimeError):
    """Raised when a step produces non-finite or clearly negative values."""

    def __init__(self, message: str, t: float):
        super().__init__(f"{message} (t={t:.9g})")
        self.t = t


class NegativeDensity(SolverFault):
    pass


class TimeStepUnderflow(RuntimeError):
    def __init__(self, dt: float, dt_min: float):
        super().__init__(f"time step {dt:.3e} fell below dt_min={dt_min:.3e}")
        self.dt = dt


@dataclass
class State:
    t: float
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    int_v: np.ndarray
    # relative defect of the discrete mass identity for the step that produced this state
    mass_residual: float = 0.0

    @classmethod
    def initial(cls, u0, v0, w0, t: float = 0.0) -> "State":
        u0 = np.array(u0, dtype=float)
        return cls(t=float(t), u=u0, v=np.array(v0, dtype=float), w=np.array(w0, dtype=float),
                   int_v=np.zeros_like(u0))

    def copy(self) -> "State":
        return State(self.t, self.u.copy(), self.v.copy(), self.w.copy(), self.int_v.copy(),
                     self.mass_residual)


@dataclass
class SolverConfig:
    t_end: float = 10.0
    cfl_safety: float = 0.4
    dt_max: float = 1e-2
    dt_min: float = 1e-10
    output_every: float = 1.0
    blowup_u_max: float = 1e6
    # hold v at its initial value (exact-w checks)
    freeze_v: bool = False
    check_every_step: bool = True
    max_rejections: int = 30

    def __post_init__(self):
        if self.t_end < 0:
            raise ValueError("t_end must be nonnegative")
        if not 0 < self.cfl_safety <= 1:
            raise ValueError("cfl_safety must lie in (0, 1]")
        if not 0 < self.dt_min < self.dt_max:
            raise ValueError("need 0 < dt_min < dt_max")
        if not self.output_every > 0:
            raise ValueError("output_every must be positive")
        if not self.blowup_u_max > 0:
            raise ValueError("blowup_u_max must be positive")


def compute_dt(state: State, spec: DiffusivitySpec, sens: Sensitivities, grid: Grid,
               config: SolverConfig, w0_sup: Optional[float] = None) -> float:
    """Stable explicit step from the diffusive, advective and reaction limits.

    Raises TimeStepUnderflow when the limit drops below ``config.dt_min``.
    """
    if w0_sup is None:
        w0_sup = float(np.max(state.w))
    u_max = max(float(np.max(state.u)), 0.0)
    # D is monotone in u, so the largest cell value sits at max u (m >= 1) or min u (m < 1);
    # an arithmetic face mean never exceeds it
    u_ext = u_max if spec.m >= 1 else max(float(np.min(state.u)), 0.0)
    d_max = eval_D(spec, u_ext, floor=True)
    bounds = []
    for axis in range(grid.dim):
        h = grid.spacing[axis]
        d_face = d_max if grid.cells[axis] > 1 else 0.0
        bounds.append(h * h / (2.0 * grid.dim * (d_face + 1.0)))
        a = advective_velocity(grid, state.v, state.w, sens, axis)
        bounds.append(h / (2.0 * grid.dim * float(np.max(np.abs(a))) + TINY))
    bounds.append(1.0 / (sens.mu * (1.0 + u_max + w0_sup) + 1.0))
    dt = config.cfl_safety * min(bounds)
    if not dt >= config.dt_min:
        raise TimeStepUnderflow(dt, config.dt_min)
    return min(dt, config.dt_max)


def _clip_roundoff(f: np.ndarray, name: str, t: float) -> np.ndarray:
    if not np.all(np.isfinite(f)):
        raise SolverFault(f"non-finite {name}", t)
    fmin = float(np.min(f))
    if fmin < 0:
        if fmin < -NEG_TOL:
            raise NegativeDensity(f"{name} reached {fmin:.3e}", t)
        f = np.maximum(f, 0.0)
    return f


def step(state: State, dt: float, spec: DiffusivitySpec, sens: Sensitivities, grid: Grid,
         freeze_v: bool = False) -> State:
    """Advance one explicit step of size ``dt``; returns a new State."""
    t = state.t
    v = state.v
    w_new = state.w * np.exp(-dt * v)
    int_v = state.int_v + dt * v

    u = state.u
    src = sens.mu * u * (1.0 - u - w_new)
    flux = assemble_flux(grid, u, v, w_new, spec, sens)
    u_new = u - dt * divergence(grid, flux) + dt * src
    u_new = _clip_roundoff(u_new, "u", t + dt)

    if freeze_v:
        v_new = v.copy()
    else:
        v_new = v + dt * (laplacian(grid, v) - v + u_new)
        v_new = _clip_roundoff(v_new, "v", t + dt)

    m_old = float(np.sum(u))
    m_new = float(np.sum(u_new))
    m_src = dt * float(np.sum(src))
    residual = abs(m_new - m_old - m_src) / max(abs(m_old), abs(m_new), abs(m_src), TINY)
    return State(t + dt, u_new, v_new, w_new, int_v, residual)


@dataclass
class RunResult:
    status: str
    records: list
    final: State
    snapshots: list = field(default_factory=list)
    steps: int = 0
    rejected: int = 0
    message: str = ""
    # per-step hard-invariant failures (only counted when config.check_every_step)
    step_violations: int = 0
    max_mass_residual: float = 0.0
    dt_history: Optional[list] = None

    @property
    def completed(self) -> bool:
        return self.status == "completed"

    @property
    def sup_linf_u(self) -> float:
        return max((r.linf_u for r in self.records), default=float("nan"))


def hard_violations(state: State, w0_sup: float) -> int:
    n = 0
    n += int(np.any(state.u < 0))
    n += int(np.any(state.v < 0))
    n += int(np.any(state.w < 0))
    n += int(np.any(state.w > w0_sup + 1e-12))
    return n


def run(initial: State, grid: Grid, spec: DiffusivitySpec, sens: Sensitivities,
        config: SolverConfig, diag=None, keep_snapshots: bool = True,
        on_record: Optional[Callable] = None, record_dt: bool = False) -> RunResult:
    """Integrate to ``config.t_end`` or until an abort event.

    ``diag`` is a :class:`chemohapto.diagnostics.DiagnosticsContext`; one
    is built from the initial state when omitted.  Statuses:
    ``completed``, ``aborted_blowup``, ``aborted_dt``, ``fault``.
    """
    from .diagnostics import DiagnosticsContext, check_invariants

    for name in ("u", "v", "w"):
        grid.check_field(getattr(initial, name), name)
    if diag is None:
        diag = DiagnosticsContext.from_initial(grid, initial, sens)
    w0_sup = diag.w0_sup

    state = initial.copy()
    records, snapshots = [], []
    n_steps = rejected = violations = 0
    max_res = res_since_record = 0.0
    dts = [] if record_dt else None

    def emit(s: State, status_flag: str = ""):
        nonlocal res_since_record
        rec = check_invariants(s, diag, mass_residual=res_since_record, step=n_steps)
        if status_flag:
            rec.flags.append(status_flag)
        records.append(rec)
        res_since_record = 0.0
        if keep_snapshots:
            snapshots.append((n_steps, s.copy()))
        if on_record is not None:
            on_record(rec, s)

    def finish(status: str, message: str = "") -> RunResult:
        if status != "completed":
            log.info("run stopped at t=%.6g: %s %s", state.t, status, message)
        return RunResult(status, records, state, snapshots, n_steps, rejected, message,
                         violations, max_res, dts)

    emit(state)
    if config.t_end <= 0:
        return finish("completed")

    n_out = 1
    t_next = min(config.output_every, config.t_end)
    while state.t < config.t_end:
        try:
            dt = compute_dt(state, spec, sens, grid, config, w0_sup)
        except TimeStepUnderflow as exc:
            emit(state, "aborted_dt")
            return finish("aborted_dt", str(exc))
        if state.t + dt >= t_next - 1e-12 * max(1.0, t_next):
            dt = t_next - state.t
        for _ in range(config.max_rejections + 1):
            try:
                new = step(state, dt, spec, sens, grid, freeze_v=config.freeze_v)
                break
            except NegativeDensity:
                rejected += 1
                dt *= 0.5
                if dt < config.dt_min:
                    emit(state, "aborted_dt")
                    return finish("aborted_dt", "step rejection drove dt below dt_min")
            except SolverFault as exc:
                emit(state, "fault")
                return finish("fault", str(exc))
        else:
            emit(state, "aborted_dt")
            return finish("aborted_dt", "too many rejected steps")

        if abs(new.t - t_next) <= 1e-12 * max(1.0, t_next):
            new.t = t_next
        state = new
        n_steps += 1
        if dts is not None:
            dts.append(dt)
        max_res = max(max_res, state.mass_residual)
        res_since_record = max(res_since_record, state.mass_residual)
        if config.check_every_step:
            violations += hard_violations(state, w0_sup)

        if float(np.max(state.u)) > config.blowup_u_max:
            emit(state, "aborted_blowup")
            return finish("aborted_blowup", f"|u|_inf exceeded {config.blowup_u_max:g}")
        if state.t >= t_next:
            emit(state)
            n_out += 1
            t_next = min(n_out * config.output_every, config.t_end)
    return finish("completed")
