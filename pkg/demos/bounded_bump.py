"""
One-dimensional run just above the critical exponent.

Default bump data, mu = 0.5, chi = xi = 1, m = m_crit + 0.2.  The norms
are printed every 10 time units and everything is written to ./bump_out
(diagnostics CSV, snapshots, manifest and gnuplot scripts).
"""
import sys

from chemohapto.config import build_problem, parse_config
from chemohapto.diagnostics import DiagnosticsContext
from chemohapto.io import emit_outputs
from chemohapto.solver import run
from chemohapto.threshold import ThresholdInputs, m_critical

t_end = float(sys.argv[1]) if len(sys.argv) > 1 else 50.0
mc = m_critical(ThresholdInputs(1, 1.0, 1.0, 0.5, 1.0)).m_crit
m = mc + 0.2
print(f"m_crit = {mc:.5f}, running with m = {m:.5f} to t = {t_end:g}")

cfg = parse_config(f"""
[grid]
cells = 256
length = 64
[diffusivity]
m = {m!r}
[solver]
t_end = {t_end!r}
output_every = 10
[run]
id = bump
plots = true
""")
p = build_problem(cfg)
ctx = DiagnosticsContext.from_initial(p.grid, p.initial, p.sens, p.k_exponents, p.betas)


def show(rec, state):
    print(f"t={rec.t:6.1f}  |u|_1={rec.l1_u:8.4f}  |u|_inf={rec.linf_u:.4f}  "
          f"|grad v|_inf={rec.linf_grad_v:.2e}  |w|_inf={rec.linf_w:.4f}  {' '.join(rec.flags)}")


res = run(p.initial, p.grid, p.spec, p.sens, p.solver, ctx, on_record=show)
files = emit_outputs(res, p, "bump_out")
print(f"\n{res.status} after {res.steps} steps; sup |u|_inf = {res.sup_linf_u:.4f}")
print(f"wrote {len(files)} files to bump_out/ (gnuplot plot_norms.gp to draw the norms)")
