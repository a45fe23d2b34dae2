"""
Canned configurations for the invariant suite behind ``chemohapto verify``.

Each case runs to completion and is checked for: no negative u, v, w and
w <= max w0 after every step, per-step mass residual <= 1e-10, the L1 bound
at every record (mu > 0 only), and |w - w0 exp(-int v)| <= 5 dt.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .config import parse_config, build_problem
from .diagnostics import MASS_TOL, DiagnosticsContext
from .solver import run

_1D = "[grid]\ndim = 1\ncells = 64\nlength = 16\n[solver]\nt_end = 2\noutput_every = 0.25\n"
_2D = "[grid]\ndim = 2\ncells = 20\nlength = 8\n[solver]\nt_end = 0.5\noutput_every = 0.125\n"

BUMP = "1 + 0.5*cos(pi*x/Lx)"
GAUSS = "0.05 + 2*exp(-(x - Lx/2)**2)"
COS2 = "1 + 0.5*cos(pi*x/Lx)*cos(pi*y/Ly)"
SPOT = "0.1 + 3*exp(-((x - Lx/3)**2 + (y - Ly/2)**2))"
W_BUMP = "1 + 0.5*cos(pi*x/Lx)"
W_2D = "0.8 + 0.4*cos(pi*x/Lx)*cos(2*pi*y/Ly)"


def _case(base, u0=BUMP, v0="0", w0="1", m=2.0, chi=1.0, xi=1.0, mu=0.5, law="power", eps=0.0):
    return (base + f"[initial]\nu0 = {u0}\nv0 = {v0}\nw0 = {w0}\n"
            f"[model]\nchi = {chi}\nxi = {xi}\nmu = {mu}\n"
            f"[diffusivity]\nlaw = {law}\nm = {m}\nepsilon = {eps}\n")


CANNED = {
    "1d_bump_m2": _case(_1D),
    "1d_bump_m1": _case(_1D, m=1.0),
    "1d_bump_m06": _case(_1D, m=0.6),
    "1d_bump_m3": _case(_1D, m=3.0),
    "1d_gauss_m2": _case(_1D, u0=GAUSS),
    "1d_gauss_strong_chi": _case(_1D, u0=GAUSS, chi=4.0),
    "1d_gauss_strong_xi": _case(_1D, u0=GAUSS, xi=4.0, w0=W_BUMP),
    "1d_wbump_m15": _case(_1D, m=1.5, w0=W_BUMP),
    "1d_signal_seeded": _case(_1D, v0="0.5 + 0.5*cos(2*pi*x/Lx)", w0=W_BUMP),
    "1d_mu_large": _case(_1D, mu=5.0),
    "1d_mu_zero": _case(_1D, mu=0.0),
    "1d_regularized": _case(_1D, u0=GAUSS, law="power_regularized", m=2.0, eps=0.1),
    "1d_regularized_m05": _case(_1D, law="power_regularized", m=0.5, eps=0.05),
    "1d_high_density": _case(_1D, u0="3 + cos(pi*x/Lx)", w0=W_BUMP),
    "2d_bump_m2": _case(_2D, u0=COS2),
    "2d_bump_m1": _case(_2D, u0=COS2, m=1.0),
    "2d_bump_m08": _case(_2D, u0=COS2, m=0.8),
    "2d_spot_m2": _case(_2D, u0=SPOT),
    "2d_spot_strong_chi": _case(_2D, u0=SPOT, chi=3.0),
    "2d_wpattern": _case(_2D, u0=COS2, w0=W_2D, xi=2.0),
    "2d_signal_seeded": _case(_2D, u0=SPOT, v0="1 + 0.5*cos(pi*y/Ly)", w0=W_2D),
    "2d_mu_large": _case(_2D, u0=COS2, mu=4.0),
    "2d_regularized": _case(_2D, u0=SPOT, law="power_regularized", m=1.5, eps=0.1),
    "2d_m3": _case(_2D, u0=COS2, m=3.0, w0=W_2D),
}


@dataclass
class VerifyRow:
    name: str
    dim: int
    status: str
    steps: int
    hard_violations: int
    max_mass_residual: float
    l1_ok: bool
    w_exactness_err: float
    w_tolerance: float

    @property
    def passed(self) -> bool:
        return (self.status == "completed" and self.hard_violations == 0
                and self.max_mass_residual <= MASS_TOL and self.l1_ok
                and self.w_exactness_err <= self.w_tolerance)


def verify_case(name: str, text: str, overrides: Sequence[str] = ()) -> VerifyRow:
    resolved = parse_config(text, overrides)
    p = build_problem(resolved)
    ctx = DiagnosticsContext.from_initial(p.grid, p.initial, p.sens, p.k_exponents, p.betas)
    res = run(p.initial, p.grid, p.spec, p.sens, p.solver, ctx, keep_snapshots=False,
              record_dt=True)
    hard = res.step_violations + sum(r.hard_violation for r in res.records)
    l1_ok = not any("l1_exceeded" in r.flags for r in res.records)
    w_err = max(r.w_exactness_err for r in res.records)
    dt_max = max(res.dt_history) if res.dt_history else 0.0
    return VerifyRow(name, p.grid.dim, res.status, res.steps, hard, res.max_mass_residual,
                     l1_ok, w_err, 5.0 * dt_max)


def run_verify(names: Optional[Sequence[str]] = None, overrides: Sequence[str] = ()) -> list:
    names = list(CANNED) if names is None else list(names)
    return [verify_case(n, CANNED[n], overrides) for n in names]


VERIFY_COLUMNS = ["schema_version", "name", "dim", "status", "steps", "hard_violations",
                  "max_mass_residual", "l1_ok", "w_exactness_err", "w_tolerance", "passed"]


def write_verify_csv(path, rows) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(VERIFY_COLUMNS)
        for r in rows:
            wr.writerow([1, r.name, r.dim, r.status, r.steps, r.hard_violations,
                         "%.17g" % r.max_mass_residual, int(r.l1_ok),
                         "%.17g" % r.w_exactness_err, "%.17g" % r.w_tolerance, int(r.passed)])
    return path
