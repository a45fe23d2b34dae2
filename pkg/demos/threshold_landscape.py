"""
How the critical diffusion exponent moves with the logistic rate.

For each dimension we walk mu from 0 up to the sensitivity scale A and
print m_crit next to the two reference exponents 2N/(N+2) and m_bar(N).
"""
import numpy as np

from chemohapto.threshold import ThresholdInputs, m_bar, m_critical, sensitivity_scale

chi, xi, w0_sup = 1.0, 1.0, 1.0
A = sensitivity_scale(ThresholdInputs(1, chi, xi, 0.0, w0_sup))
print(f"A = {A:g}  (mu >= A makes every m > 0 admissible)\n")

mus = A * np.array([0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99, 1.0])
print("N   2N/(N+2)  m_bar   " + "  ".join(f"mu={mu:<5.3g}" for mu in mus))
for N in (1, 2, 3, 4, 8, 9, 10):
    row = [m_critical(ThresholdInputs(N, chi, xi, mu, w0_sup)).m_crit for mu in mus]
    print(f"{N:<3} {2 * N / (N + 2):<9.4f} {m_bar(N):<7.4f} " + "  ".join(f"{m:<8.4f}" for m in row))

# where does m_crit drop below m_bar?  For N = 1, 9, 10 only close to A.
print()
for N in (1, 9, 10):
    grid = np.linspace(0, A, 20001)[1:-1]
    mc = np.array([m_critical(ThresholdInputs(N, chi, xi, mu, w0_sup)).m_crit for mu in grid])
    first = grid[np.argmax(mc < m_bar(N))]
    print(f"N={N}: m_crit < m_bar(N) needs mu > {first:.4f} (= {first / A:.3f} A)")

# the maximal-regularity constant is an input, not something we can compute
print()
for lam in (0.25, 1.0, 4.0, 16.0):
    r = m_critical(ThresholdInputs(2, chi, xi, 1.0, w0_sup, lam), m=0.6)
    print(f"lambda0={lam:<5g} m_crit={r.m_crit:.4f} alt={r.m_crit_alt:.4f} "
          f"admissible={r.admissible} {r.note}")
