"""
Small sweep over (m, mu) around the critical exponent.

The bound only guarantees that runs with m > m_crit stay bounded; below the
threshold it is silent, so those rows are reported, not judged.
"""
from pathlib import Path

from chemohapto.config import parse_config
from chemohapto.harness import SweepSpec, run_sweep

cfg = parse_config("""
[grid]
cells = 64
length = 16
[solver]
t_end = 20
[run]
id = demo
snapshots = false
[sweep]
axis.diffusivity.m = 0.3, 0.5, 0.8, 1.2, 2.0
axis.model.mu = 0.0, 0.5, 1.5
""")
out = Path("sweep_out")
out.mkdir(exist_ok=True)
csv_path = out / "results.csv"
if csv_path.exists():
    csv_path.unlink()
res = run_sweep(SweepSpec.from_config(cfg), csv_path)

print(f"{'m':>5} {'mu':>5} {'m_crit':>8} {'sup|u|':>9}  status   side")
for r in res.rows:
    m, mc = float(r["diffusivity.m"]), float(r["m_crit"])
    side = "above" if m > mc else "below (no claim)"
    print(f"{m:>5g} {float(r['model.mu']):>5g} {mc:>8.4f} {float(r['sup_linf_u']):>9.4f}  "
          f"{r['status']:<8} {side}")
print(f"\nresults in {csv_path}; rerunning without deleting it resumes instead")
