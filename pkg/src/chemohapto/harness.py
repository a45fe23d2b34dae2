"""
Parameter sweeps with boundedness classification, and refinement studies.
"""

from __future__ import annotations

import csv
import itertools
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .config import ConfigError, _fmt, build_problem, sweep_axes, validate
from .diagnostics import DiagnosticsContext
from .solver import compute_dt, run
from .threshold import ThresholdInputs, m_critical

log = logging.getLogger(__name__)

SWEEP_SCHEMA_VERSION = 1
STATUSES = ("bounded", "unbounded", "aborted_blowup", "aborted_dt", "incomplete")


@dataclass
class SweepSpec:
    axes: list
    base: dict
    t_end: Optional[float] = None
    envelope: float = 10.0
    parallel: int = 0
    seed: int = 0
    out_dir: Optional[str] = None

    def __post_init__(self):
        if not self.axes:
            raise ValueError("a sweep needs at least one axis")
        for key, values in self.axes:
            if key not in self.base:
                raise ValueError(f"sweep axis {key!r} is not a configuration key")
            if len(values) == 0:
                raise ValueError(f"sweep axis {key!r} has no values")

    @classmethod
    def from_config(cls, resolved: dict, out_dir=None) -> "SweepSpec":
        base = {k: v for k, v in resolved.items() if not k.startswith("sweep.axis.")}
        t_end = resolved["sweep.t_end"] or None
        return cls(sweep_axes(resolved), base, t_end, resolved["sweep.envelope"],
                   resolved["sweep.parallel"], resolved["run.seed"], out_dir)

    @property
    def keys(self) -> list:
        return [k for k, _ in self.axes]

    def tuples(self) -> list:
        return list(itertools.product(*[vals for _, vals in self.axes]))

    @property
    def columns(self) -> list:
        return (["schema_version", "run_index", "run_id"] + self.keys
                + ["m_crit", "sup_linf_u", "final_linf_u", "t_reached", "status"])


@dataclass
class SweepResult:
    columns: list
    rows: list = field(default_factory=list)

    def by_status(self, status: str) -> list:
        return [r for r in self.rows if r["status"] == status]

    @property
    def all_completed(self) -> bool:
        return all(r["status"] in ("bounded", "unbounded") for r in self.rows)


def classify(result, u0_sup: float, envelope: float) -> str:
    if result.status == "completed":
        return "bounded" if result.sup_linf_u <= envelope * max(1.0, u0_sup) else "unbounded"
    if result.status in ("aborted_blowup", "aborted_dt"):
        return result.status
    return "incomplete"


def _sweep_task(task) -> dict:
    index, keys, values, base, t_end, envelope, out_dir = task
    resolved = dict(base)
    resolved.update(zip(keys, values))
    run_id = f"{base['run.id']}_{index:04d}"
    resolved["run.id"] = run_id
    if t_end:
        resolved["solver.t_end"] = t_end
    row = {"schema_version": str(SWEEP_SCHEMA_VERSION), "run_index": str(index), "run_id": run_id}
    row.update({k: _fmt(v) for k, v in zip(keys, values)})
    try:
        validate(resolved)
        problem = build_problem(resolved)
        w0_sup = float(np.max(problem.initial.w))
        mc = m_critical(ThresholdInputs(problem.grid.dim, problem.sens.chi, problem.sens.xi,
                                        problem.sens.mu, w0_sup, problem.lambda0)).m_crit
        keep = out_dir is not None and resolved["run.snapshots"]
        result = run(problem.initial, problem.grid, problem.spec, problem.sens, problem.solver,
                     DiagnosticsContext.from_initial(problem.grid, problem.initial, problem.sens,
                                                     problem.k_exponents, problem.betas),
                     keep_snapshots=keep)
        if out_dir is not None:
            from .io import emit_outputs
            emit_outputs(result, problem, Path(out_dir) / run_id)
        row.update(m_crit="%.17g" % mc, sup_linf_u="%.17g" % result.sup_linf_u,
                   final_linf_u="%.17g" % result.records[-1].linf_u,
                   t_reached="%.17g" % result.final.t,
                   status=classify(result, float(np.max(problem.initial.u)), envelope))
    except (ConfigError, ValueError, FloatingPointError) as exc:
        log.warning("sweep run %s failed: %s", run_id, exc)
        row.update(m_crit="", sup_linf_u="", final_linf_u="", t_reached="", status="incomplete")
    return row


def _read_done(path: Path, columns: list) -> dict:
    if not path.exists() or path.stat().st_size == 0:
        return {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != columns:
            raise ValueError(f"{path} has a different column layout; refusing to resume")
        return {int(r["run_index"]): r for r in reader}


def run_sweep(spec: SweepSpec, results_csv=None) -> SweepResult:
    """Run the Cartesian product of the axes.

    Rows are appended to ``results_csv`` in tuple order as they finish, so an
    interrupted sweep resumes from the rows already on disk.
    """
    columns = spec.columns
    done = {}
    path = Path(results_csv) if results_csv is not None else None
    if path is not None:
        done = _read_done(path, columns)
    tasks = [(i, spec.keys, vals, spec.base, spec.t_end, spec.envelope, spec.out_dir)
             for i, vals in enumerate(spec.tuples()) if i not in done]

    fh = writer = None
    if path is not None:
        new_file = not done
        fh = open(path, "w" if new_file else "a", newline="")
        writer = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
        if new_file:
            writer.writeheader()
            fh.flush()
    rows = dict(done)
    workers = spec.parallel or os.cpu_count() or 1
    try:
        if workers == 1 or len(tasks) <= 1:
            results = map(_sweep_task, tasks)
            pool = None
        else:
            pool = ProcessPoolExecutor(max_workers=min(workers, len(tasks)))
            results = pool.map(_sweep_task, tasks)
        try:
            for row in results:
                rows[int(row["run_index"])] = row
                if writer is not None:
                    writer.writerow(row)
                    fh.flush()
        finally:
            if pool is not None:
                pool.shutdown()
    finally:
        if fh is not None:
            fh.close()
    return SweepResult(columns, [rows[i] for i in sorted(rows)])


@dataclass
class ConvergenceRow:
    level: int
    cells: tuple
    h: float
    dt: float
    err_l1: float
    err_linf: float
    order_l1: Optional[float] = None
    order_linf: Optional[float] = None
    warning: str = ""


def _restrict(fine: np.ndarray, factor: int) -> np.ndarray:
    """Block-average a fine cell field onto a grid coarser by ``factor`` per axis."""
    if factor == 1:
        return fine
    shape = []
    for n in fine.shape:
        shape += [n // factor, factor]
    return fine.reshape(shape).mean(axis=tuple(range(1, 2 * fine.ndim, 2)))


def convergence_study(base: dict, levels: int = 3, t_out: Optional[float] = None,
                      dt0: Optional[float] = None) -> list:
    """Dyadic refinement of ``base`` with dt scaled like h^2.

    Errors of the final density are measured against the finest level
    (restricted by block averaging); the observed order of a row is
    log2(e_row / e_next).
    """
    if levels < 3:
        raise ValueError("a convergence study needs at least 3 levels")
    t_out = base["solver.t_end"] if t_out is None else t_out
    coarse = build_problem(base)
    if dt0 is None:
        dt0 = 0.5 * compute_dt(coarse.initial, coarse.spec, coarse.sens, coarse.grid,
                               coarse.solver)
    finals, grids, dts = [], [], []
    for lev in range(levels):
        cfg = dict(base)
        cfg["grid.cells"] = tuple(n * 2 ** lev for n in coarse.grid.cells)
        cfg["grid.dim"] = coarse.grid.dim
        dt = dt0 / 4 ** lev
        cfg.update({"solver.t_end": t_out, "solver.output_every": t_out,
                    "solver.dt_max": dt, "solver.dt_min": min(base["solver.dt_min"], dt / 1e3)})
        prob = build_problem(cfg)
        res = run(prob.initial, prob.grid, prob.spec, prob.sens, prob.solver, keep_snapshots=False)
        if not res.completed:
            raise RuntimeError(f"level {lev} did not complete: {res.status} {res.message}")
        finals.append(res.final.u)
        grids.append(prob.grid)
        dts.append(dt)

    ref = finals[-1]
    rows = []
    for lev in range(levels):
        g = grids[lev]
        diff = finals[lev] - _restrict(ref, 2 ** (levels - 1 - lev))
        rows.append(ConvergenceRow(lev, g.cells, g.spacing[0], dts[lev],
                                   float(np.sum(np.abs(diff)) * g.cell_volume),
                                   float(np.max(np.abs(diff)))))
    for a, b in zip(rows[:-2], rows[1:-1]):
        for norm in ("l1", "linf"):
            ea, eb = getattr(a, f"err_{norm}"), getattr(b, f"err_{norm}")
            if eb > 0 and ea > 0:
                setattr(a, f"order_{norm}", math.log2(ea / eb))
            if ea < eb:
                a.warning = "non-monotone error"
    return rows


def observed_order(rows: Sequence[ConvergenceRow], norm: str = "l1") -> float:
    """Smallest observed order across the table (conservative summary)."""
    vals = [getattr(r, f"order_{norm}") for r in rows if getattr(r, f"order_{norm}") is not None]
    return min(vals) if vals else float("nan")


CONVERGENCE_COLUMNS = ["schema_version", "level", "cells", "h", "dt", "err_l1", "err_linf",
                       "order_l1", "order_linf", "warning"]


def write_convergence_csv(path, rows) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(CONVERGENCE_COLUMNS)
        for r in rows:
            wr.writerow([SWEEP_SCHEMA_VERSION, r.level, "x".join(map(str, r.cells)),
                         "%.17g" % r.h, "%.17g" % r.dt, "%.17g" % r.err_l1, "%.17g" % r.err_linf,
                         "" if r.order_l1 is None else "%.17g" % r.order_l1,
                         "" if r.order_linf is None else "%.17g" % r.order_linf, r.warning])
    return path
