"""
Thresholding functions side by side
===================================

Soft, half and TL1 thresholding at lambda = 1/2.  With a = 2 the TL1 map is
continuous; with a = 1 it jumps, like hard thresholding.
"""

# %%
import numpy as np

from tl1it import compute_thresholds, emit_threshold_table, prox_tl1

lam = 0.5
for a in (2.0, 1.0):
    p = compute_thresholds(lam, a)
    print(f"a={a:g}: regime {p.regime.value}, t1={p.t1:.4f} t2={p.t2:.4f} t3={p.t3:.4f}, active t={p.t:.4f}")

# %%
# a handful of rows from the table behind the usual four-panel plot
header, rows = emit_threshold_table(lam, np.linspace(0.0, 2.0, 11))
print(" ".join(f"{h:>8}" for h in header))
for row in rows:
    print(" ".join(f"{v:8.4f}" for v in row))

# %%
# the a=1 branch jumps from 0 to sqrt(2 lam (a+1)) - a at t3
t3 = compute_thresholds(lam, 1.0).t3
below = prox_tl1(t3, lam, 1.0).value
above = prox_tl1(np.nextafter(t3, np.inf), lam, 1.0).value
print(f"jump at t3={t3:.6f}: {below} -> {above:.6f} (expected {np.sqrt(2) - 1:.6f})")
