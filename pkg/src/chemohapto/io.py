"""
File formats: diagnostics / weak-residual / sweep CSVs, plain-text
snapshots, run manifests and gnuplot scripts.

Every CSV starts with a ``schema_version`` column.  Floats are written
with 17 significant digits so files round-trip exactly.
"""

from __future__ import annotations

import csv
import datetime as _dt
import os
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from . import __version__
from .config import config_hash, serialize_config
from .grid import Grid

SCHEMA_VERSION = 1


def _num(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x is None:
        return ""
    return "%.17g" % float(x)


def _tag(x: float) -> str:
    return "%g" % x


def diagnostics_columns(k_exponents: Sequence[float], betas: Sequence[float]) -> list[str]:
    cols = ["schema_version", "t", "step", "l1_u", "l2_u", "linf_u"]
    cols += [f"l{_tag(k)}_u" for k in k_exponents]
    cols += ["linf_grad_v"] + [f"l{_tag(2 * b)}_grad_v" for b in betas]
    cols += ["linf_v", "linf_w", "linf_grad_w", "mass_residual", "kappa_violation",
             "w_exactness_err", "l1_bound", "hard_violation", "flags"]
    return cols


def diagnostics_row(rec) -> list[str]:
    row = [str(SCHEMA_VERSION), _num(rec.t), _num(rec.step), _num(rec.l1_u), _num(rec.l2_u),
           _num(rec.linf_u)]
    row += [_num(v) for v in rec.lk_u.values()]
    row += [_num(rec.linf_grad_v)] + [_num(v) for v in rec.l2beta_grad_v.values()]
    row += [_num(rec.linf_v), _num(rec.linf_w), _num(rec.linf_grad_w), _num(rec.mass_residual),
            _num(rec.kappa_violation), _num(rec.w_exactness_err), _num(rec.l1_bound),
            _num(rec.hard_violation), ";".join(rec.flags)]
    return row


def write_diagnostics_csv(path, records, k_exponents=None, betas=None) -> Path:
    path = Path(path)
    if k_exponents is None:
        k_exponents = tuple(records[0].lk_u) if records else ()
    if betas is None:
        betas = tuple(records[0].l2beta_grad_v) if records else ()
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(diagnostics_columns(k_exponents, betas))
        for rec in records:
            wr.writerow(diagnostics_row(rec))
    return path


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


WEAK_COLUMNS = ["schema_version", "test_function", "level", "residual_u", "residual_v",
                "residual_w", "lhs_u", "rhs_u", "lhs_v", "rhs_v", "lhs_w", "rhs_w"]


def write_weak_residual_csv(path, reports) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(WEAK_COLUMNS)
        for r in reports:
            pairs = [_num(x) for pair in zip(r.lhs, r.rhs) for x in pair]
            wr.writerow([str(SCHEMA_VERSION), r.test_function, str(r.level), _num(r.residual_u),
                         _num(r.residual_v), _num(r.residual_w)] + pairs)
    return path


def write_snapshot(path, grid: Grid, state) -> Path:
    """Header lines (``#``-prefixed) then one row per cell: index, x[, y], u, v, w."""
    path = Path(path)
    X = grid.centers()
    cols = [np.arange(grid.size)] + [x.ravel() for x in X] + [state.u.ravel(), state.v.ravel(),
                                                             state.w.ravel()]
    names = ["index", "x", "y"][: 1 + grid.dim] + ["u", "v", "w"]
    header = "\n".join([
        f"schema_version = {SCHEMA_VERSION}",
        f"time = {_num(state.t)}",
        f"dims = {' '.join(str(n) for n in grid.cells)}",
        f"spacing = {' '.join(_num(h) for h in grid.spacing)}",
        f"lengths = {' '.join(_num(L) for L in grid.lengths)}",
        " ".join(names),
    ])
    fmt = ["%d"] + ["%.17g"] * (len(cols) - 1)
    np.savetxt(path, np.column_stack(cols), fmt=fmt, header=header, comments="# ")
    return path


def read_snapshot(path):
    """Returns ``(t, grid, u, v, w)``."""
    header = {}
    with open(path) as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            if "=" in line:
                k, v = line[1:].split("=", 1)
                header[k.strip()] = v.strip()
    data = np.loadtxt(path, comments="#", ndmin=2)
    cells = tuple(int(n) for n in header["dims"].split())
    lengths = tuple(float(x) for x in header["lengths"].split())
    grid = Grid(cells, lengths)
    u, v, w = (data[:, -3 + i].reshape(cells) for i in range(3))
    return float(header["time"]), grid, u, v, w


def snapshot_name(run_id: str, step: int) -> str:
    return f"snap_{run_id}_{step:08d}.dat"


def write_plot_scripts(outdir, grid: Grid, diag_csv: str, last_snapshot: Optional[str],
                       k_exponents, betas) -> list[Path]:
    """gnuplot scripts for the norm time series and the final profile (no rendering here)."""
    outdir = Path(outdir)
    cols = diagnostics_columns(k_exponents, betas)
    idx = {c: i + 1 for i, c in enumerate(cols)}
    norms = ["linf_u"] + [f"l{_tag(k)}_u" for k in k_exponents] + ["linf_grad_v"] + [
        f"l{_tag(2 * b)}_grad_v" for b in betas]
    series = ", \\\n     ".join(
        f"'{diag_csv}' using {idx['t']}:{idx[c]} with lines title '{c}'" for c in norms)
    paths = []
    p = outdir / "plot_norms.gp"
    p.write_text("set datafile separator ','\nset key autotitle columnhead\n"
                 "set logscale y\nset xlabel 't'\nset terminal pngcairo size 900,600\n"
                 "set output 'norms.png'\n"
                 f"plot {series}\n")
    paths.append(p)
    if last_snapshot is not None:
        p = outdir / "plot_profile.gp"
        if grid.dim == 1:
            body = (f"plot '{last_snapshot}' using 2:3 with lines title 'u', "
                    f"'' using 2:4 with lines title 'v', '' using 2:5 with lines title 'w'\n")
        else:
            body = (f"set view map\nset dgrid3d {grid.cells[1]},{grid.cells[0]}\n"
                    f"splot '{last_snapshot}' using 2:3:4 with pm3d title 'u'\n")
        p.write_text("set terminal pngcairo size 900,600\nset output 'profile.png'\n"
                     "set xlabel 'x'\n" + body)
        paths.append(p)
    return paths


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def write_manifest(outdir, resolved: dict, files: Iterable[str], status: str = "",
                   extra: Optional[dict] = None) -> Path:
    """One manifest per run directory: hash, version, files, then the resolved config."""
    outdir = Path(outdir)
    lines = ["[manifest]",
             f"config_hash = {config_hash(resolved)}",
             f"tool_version = {__version__}",
             f"deterministic = {'true' if resolved.get('run.deterministic') else 'false'}",
             f"created_utc = {_now()}"]
    if status:
        lines.append(f"status = {status}")
    for k, v in (extra or {}).items():
        lines.append(f"{k} = {v}")
    lines += ["", "[files]"]
    lines += [f"file{i} = {name}" for i, name in enumerate(files)]
    lines += ["", "# resolved configuration", serialize_config(resolved)]
    path = outdir / "manifest.txt"
    path.write_text("\n".join(lines))
    return path


def emit_outputs(result, problem, outdir, plots: Optional[bool] = None) -> list[Path]:
    """Write manifest, diagnostics CSV, snapshots and (optionally) plot scripts."""
    outdir = Path(outdir)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {outdir}: {exc}") from exc
    r = problem.resolved
    run_id = r["run.id"]
    files: list[Path] = []
    try:
        files.append(write_diagnostics_csv(outdir / "diagnostics.csv", result.records,
                                           problem.k_exponents, problem.betas))
        snaps = []
        if r["run.snapshots"]:
            for step, state in result.snapshots:
                snaps.append(write_snapshot(outdir / snapshot_name(run_id, step), problem.grid, state))
            files += snaps
        if r["run.plots"] if plots is None else plots:
            files += write_plot_scripts(outdir, problem.grid, "diagnostics.csv",
                                        snaps[-1].name if snaps else None,
                                        problem.k_exponents, problem.betas)
        names = [os.path.relpath(f, outdir) for f in files]
        manifest = write_manifest(outdir, r, names, status=result.status,
                                  extra={"steps": result.steps, "t_reached": _num(result.final.t)})
    except OSError as exc:
        raise OSError(f"writing outputs to {outdir} failed: {exc}") from exc
    return [manifest] + files
