"""
Recovering a sparse vector from Gaussian measurements
=====================================================

One 128 x 512 instance, solved by every scheme; then a small success-rate
sweep.  All randomness comes from the master seed.
"""

# %%
import numpy as np

from tl1it import (
    ExperimentSpec,
    LinearModel,
    RngStream,
    SolverConfig,
    make_instance,
    run_success_experiment,
    solve,
    success_csv,
)

inst = make_instance("gaussian", 128, 512, 15, RngStream(2024))
model = LinearModel(inst.A, inst.y)
print(f"||A|| = {model.op_norm:.3f}, nonzeros in x* = {np.count_nonzero(inst.x_true)}")

# %%
# S1 needs lambda; the others only need the sparsity estimate k
configs = [
    SolverConfig("S1", lam=1.0),
    SolverConfig("S2", k=15),
    SolverConfig("S3", k=15),
    SolverConfig("HardIT", k=15),
    SolverConfig("HalfIT", k=15),
]
for cfg in configs:
    res = solve(model, cfg)
    err = np.linalg.norm(res.x - inst.x_true) / np.linalg.norm(inst.x_true)
    print(f"{cfg.scheme.value:7s} iters={res.iterations:5d} converged={res.converged!s:5s} rel.err={err:.2e}")

# %%
# S1 with a fixed lambda is biased; the adaptive schemes are not
spec = ExperimentSpec(family="gaussian", M=128, N=512, sweep=(0.0, 0.3), k_grid=(10, 20, 30), trials=5)
print(success_csv(run_success_experiment(spec), spec.family))
