"""Transformed-L1 iterative thresholding for sparse recovery."""
from .harness import (
    ExperimentSpec,
    RobustnessSpec,
    emit_threshold_table,
    run_robustness_experiment,
    run_success_experiment,
    run_trial,
    robustness_csv,
    success_csv,
    threshold_csv,
)
from .problems import (
    DctMatrixSpec,
    GaussianMatrixSpec,
    NoiseSpec,
    ProblemInstance,
    RngStream,
    SignalSpec,
    apply_noise,
    gen_dct_matrix,
    gen_gaussian_matrix,
    gen_signal,
    make_instance,
    mutual_coherence,
)
from .solvers import (
    LinearModel,
    Scheme,
    SolveResult,
    SolverConfig,
    fixed_point_residual,
    gradient_step,
    objective,
    select_lambda_s2,
    select_params_s3,
    solve,
    solve_half_it,
    solve_hard_it,
    solve_s1,
    solve_s2,
    solve_s3,
    spectral_norm,
    warm_start,
)
from .thresholding import (
    ProxOutcome,
    Regime,
    ThresholdParams,
    compute_thresholds,
    g_value,
    half,
    hard,
    penalty,
    penalty_subgradient_component,
    prox_oracle,
    prox_tl1,
    rho,
    soft,
    threshold_tl1,
)

__version__ = "0.1.0"
