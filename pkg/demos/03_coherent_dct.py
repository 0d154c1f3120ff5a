"""
Coherent over-sampled cosine matrices
=====================================

Coherence climbs toward 1 as the over-sampling factor F grows.  Recovery
then needs spikes at least 2F apart, and the schemes start to separate.
"""

# %%
from tl1it import (
    DctMatrixSpec,
    ExperimentSpec,
    RngStream,
    gen_dct_matrix,
    mutual_coherence,
    run_success_experiment,
)

for F in (1, 2, 5, 10, 20):
    A = gen_dct_matrix(DctMatrixSpec(100, 1000, F), RngStream(1))
    print(f"F={F:2d}: coherence {mutual_coherence(A):.5f}")

# %%
# a reduced version of the 100 x 1500 comparison, 5 trials per point
spec = ExperimentSpec(family="dct", M=100, N=1500, sweep=(2.0, 8.0), k_grid=(5,), trials=5)
for c in run_success_experiment(spec):
    print(f"F={c.sweep:g} {c.scheme.value:7s} success {float(c.rate(5)):.2f}")
