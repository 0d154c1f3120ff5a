"""Monte Carlo experiments: success-rate sweeps, sparsity-misestimation
robustness, and thresholding-function tables.

Every trial draws its instance from its own :class:`RngStream`, keyed by the
experiment's master seed and the trial coordinates, so results do not depend
on execution order and parallel runs reproduce serial ones exactly.
"""
from __future__ import annotations

import csv
import io
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .problems import NoiseSpec, ProblemInstance, RngStream, make_instance
from .solvers import LinearModel, Scheme, SolverConfig, solve
from .thresholding import half, prox_tl1, soft

__all__ = [
    "ExperimentSpec",
    "RobustnessSpec",
    "TrialRecord",
    "SuccessCurve",
    "RobustnessCurve",
    "TrialError",
    "GAUSSIAN_R_FIGURE",
    "GAUSSIAN_R_NOISE_TEXT",
    "DCT_F_FIGURE",
    "relative_error",
    "run_trial",
    "run_success_trials",
    "run_success_experiment",
    "run_robustness_experiment",
    "emit_threshold_table",
    "success_csv",
    "robustness_csv",
    "threshold_csv",
    "format_csv",
    "write_atomic",
]

# covariance grids: figure captions and the noise-study text disagree
GAUSSIAN_R_FIGURE = (0.0, 0.1, 0.2, 0.3)
GAUSSIAN_R_NOISE_TEXT = (0.0, 0.2, 0.4, 0.5)
DCT_F_FIGURE = (2.0, 4.0, 6.0, 8.0)

COMPARED_SCHEMES = (Scheme.S2, Scheme.S3, Scheme.HARD, Scheme.HALF)
_SOLVER_KEYS = ("a", "mu_eps", "max_iter", "rel_tol", "warm_start_iters", "warm_start_frac")


class TrialError(RuntimeError):
    """A solver failure, tagged with the trial that produced it."""

    def __init__(self, scheme, k, trial_index, cause):
        super().__init__(f"{Scheme(scheme).value} failed at k={k}, trial {trial_index}: {cause}")
        self.scheme = Scheme(scheme)
        self.k = k
        self.trial_index = trial_index


@dataclass
class ExperimentSpec:
    """Success-rate sweep over a matrix parameter (``r`` or ``F``) and ``k``."""

    family: str = "gaussian"
    M: int = 128
    N: int = 512
    sweep: tuple[float, ...] = (0.0,)
    k_grid: tuple[int, ...] = (5, 10, 15, 20)
    schemes: tuple[Scheme, ...] = COMPARED_SCHEMES
    trials: int = 20
    noise: NoiseSpec | None = None
    success_tol: float = 1e-3
    master_seed: int = 1
    amplitude_std: float = 1.0
    min_sep: int | None = None
    a: float = 1.0
    mu_eps: float = 0.01
    max_iter: int = 3000
    rel_tol: float = 1e-8
    warm_start_iters: int = 20
    warm_start_frac: float = 0.1

    def __post_init__(self):
        if self.family not in ("gaussian", "dct"):
            raise ValueError(f"family must be 'gaussian' or 'dct', got {self.family!r}")
        self.sweep = tuple(float(v) for v in self.sweep)
        self.k_grid = tuple(int(k) for k in self.k_grid)
        self.schemes = tuple(Scheme(s) for s in self.schemes)
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not self.success_tol > 0:
            raise ValueError("success_tol must be positive")
        if not self.sweep or not self.k_grid or not self.schemes:
            raise ValueError("sweep, k_grid and schemes must be nonempty")

    def solver_options(self) -> dict:
        return {key: getattr(self, key) for key in _SOLVER_KEYS}


@dataclass
class RobustnessSpec:
    """Solve with a sparsity estimate ``k_est`` while the data has ``true_k`` spikes."""

    N: int = 512
    M_grid: tuple[int, ...] = (280,)
    true_k: int = 30
    k_est_grid: tuple[int, ...] = (20, 30, 45, 60)
    schemes: tuple[Scheme, ...] = (Scheme.S2, Scheme.S3)
    trials: int = 10
    r: float = 0.0
    noise: NoiseSpec | None = field(default_factory=lambda: NoiseSpec(0.01, 0.01))
    amplitude_std: float = 2.0
    master_seed: int = 1
    a: float = 1.0
    mu_eps: float = 0.01
    max_iter: int = 3000
    rel_tol: float = 1e-8
    warm_start_iters: int = 20
    warm_start_frac: float = 0.1

    def __post_init__(self):
        self.M_grid = tuple(int(m) for m in self.M_grid)
        self.k_est_grid = tuple(int(k) for k in self.k_est_grid)
        self.schemes = tuple(Scheme(s) for s in self.schemes)
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        bad = [k for k in self.k_est_grid if not 1 <= k < self.N]
        if bad:
            raise ValueError(f"sparsity estimates {bad} must satisfy 1 <= k_est < N={self.N}")

    def solver_options(self) -> dict:
        return {key: getattr(self, key) for key in _SOLVER_KEYS}


@dataclass(frozen=True)
class TrialRecord:
    scheme: Scheme
    k: int
    trial_index: int
    rel_error: float
    mse: float
    iterations: int
    converged: bool
    success: bool
    sweep: float = 0.0


@dataclass(frozen=True)
class SuccessCurve:
    scheme: Scheme
    sweep: float
    k_values: tuple[int, ...]
    trials: int
    successes: tuple[int, ...]

    @property
    def rates(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(s, self.trials) for s in self.successes)

    def rate(self, k: int) -> Fraction:
        return self.rates[self.k_values.index(k)]


@dataclass(frozen=True)
class RobustnessCurve:
    scheme: Scheme
    M: int
    k_est: tuple[int, ...]
    mse: tuple[float, ...]
    trials: int

    def mse_at(self, k_est: int) -> float:
        return self.mse[self.k_est.index(k_est)]


def relative_error(x_rec, x_true) -> float:
    """``||x_rec - x_true|| / ||x_true||`` with the zero-signal cases pinned to 0 or 1."""
    nt = float(np.linalg.norm(x_true))
    if nt == 0.0:
        return 0.0 if not np.any(x_rec) else 1.0
    return float(np.linalg.norm(np.asarray(x_rec) - x_true)) / nt


def run_trial(
    instance: ProblemInstance,
    scheme,
    k: int | None = None,
    success_tol: float = 1e-3,
    trial_index: int = 0,
    model: LinearModel | None = None,
    sweep: float = 0.0,
    **solver_options,
) -> TrialRecord:
    """Solve one instance with one scheme and score it against ``x_true``.

    ``k`` defaults to the instance's true sparsity.  Pass ``model`` to reuse
    a cached spectral norm across schemes.
    """
    scheme = Scheme(scheme)
    k = instance.k if k is None else k
    if model is None:
        model = LinearModel(instance.A, instance.y)
    try:
        if scheme is Scheme.S1:
            cfg = SolverConfig(scheme, **solver_options)
        else:
            cfg = SolverConfig(scheme, k=k, **solver_options)
        res = solve(model, cfg)
    except Exception as exc:
        raise TrialError(scheme, k, trial_index, exc) from exc
    rel = relative_error(res.x, instance.x_true)
    mse = float(np.sum((res.x - instance.x_true) ** 2)) / instance.x_true.shape[0]
    return TrialRecord(
        scheme=scheme,
        k=int(k),
        trial_index=trial_index,
        rel_error=rel,
        mse=mse,
        iterations=res.iterations,
        converged=res.converged,
        success=rel <= success_tol,
        sweep=sweep,
    )


def _stream_id(*coords: int) -> int:
    # 20 bits per coordinate; grid indices and trial counts stay far below that
    sid = 0
    for c in coords:
        sid = (sid << 20) | (int(c) & 0xFFFFF)
    return sid


def _success_instance(spec: ExperimentSpec, si: int, k: int, trial: int) -> ProblemInstance:
    rng = RngStream(spec.master_seed, _stream_id(si, k, trial))
    value = spec.sweep[si]
    kwargs = {"r": value} if spec.family == "gaussian" else {"F": value}
    return make_instance(
        spec.family,
        spec.M,
        spec.N,
        k,
        rng,
        min_sep=spec.min_sep,
        amplitude_std=spec.amplitude_std,
        noise=spec.noise,
        **kwargs,
    )


def _success_task(args) -> list[TrialRecord]:
    spec, si, k, trial = args
    inst = _success_instance(spec, si, k, trial)
    model = LinearModel(inst.A, inst.y)
    return [
        run_trial(
            inst,
            scheme,
            success_tol=spec.success_tol,
            trial_index=trial,
            model=model,
            sweep=spec.sweep[si],
            **spec.solver_options(),
        )
        for scheme in spec.schemes
    ]


def _map(fn, tasks: list, workers: int) -> list:
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


def run_success_trials(spec: ExperimentSpec, workers: int = 1) -> list[TrialRecord]:
    """All trial records of a sweep; every scheme sees the same instances."""
    tasks = [
        (spec, si, k, t)
        for si in range(len(spec.sweep))
        for k in spec.k_grid
        for t in range(spec.trials)
    ]
    return [rec for recs in _map(_success_task, tasks, workers) for rec in recs]


def run_success_experiment(spec: ExperimentSpec, workers: int = 1) -> list[SuccessCurve]:
    """Success counts per (scheme, sweep value, k)."""
    records = run_success_trials(spec, workers)
    counts: dict[tuple[Scheme, float, int], int] = {}
    for rec in records:
        key = (rec.scheme, rec.sweep, rec.k)
        counts[key] = counts.get(key, 0) + int(rec.success)
    return [
        SuccessCurve(
            scheme=scheme,
            sweep=value,
            k_values=spec.k_grid,
            trials=spec.trials,
            successes=tuple(counts[(scheme, value, k)] for k in spec.k_grid),
        )
        for value in spec.sweep
        for scheme in spec.schemes
    ]


def _robust_task(args) -> list[TrialRecord]:
    spec, mi, trial = args
    M = spec.M_grid[mi]
    rng = RngStream(spec.master_seed, _stream_id(mi, trial))
    inst = make_instance(
        "gaussian",
        M,
        spec.N,
        spec.true_k,
        rng,
        r=spec.r,
        amplitude_std=spec.amplitude_std,
        noise=spec.noise,
    )
    model = LinearModel(inst.A, inst.y)
    return [
        run_trial(inst, scheme, k=k_est, trial_index=trial, model=model, sweep=M, **spec.solver_options())
        for scheme in spec.schemes
        for k_est in spec.k_est_grid
    ]


def run_robustness_experiment(spec: RobustnessSpec, workers: int = 1) -> list[RobustnessCurve]:
    """Mean MSE per (scheme, M, k_est), each ``M`` with its own instances."""
    tasks = [(spec, mi, t) for mi in range(len(spec.M_grid)) for t in range(spec.trials)]
    records = [rec for recs in _map(_robust_task, tasks, workers) for rec in recs]
    curves = []
    for M in spec.M_grid:
        for scheme in spec.schemes:
            mses = []
            for k_est in spec.k_est_grid:
                vals = [
                    r.mse
                    for r in records
                    if r.scheme is scheme and r.sweep == M and r.k == k_est
                ]
                # sorted sum so the mean does not depend on completion order
                mses.append(float(np.sum(np.sort(vals))) / len(vals))
            curves.append(RobustnessCurve(scheme, M, spec.k_est_grid, tuple(mses), spec.trials))
    return curves


def emit_threshold_table(
    lam: float = 0.5,
    x_grid: Iterable[float] | None = None,
    a_values: Sequence[float] = (2.0, 1.0),
) -> tuple[list[str], list[list[float]]]:
    """Soft, half and TL1 thresholding functions sampled on ``x_grid``.

    Returns ``(header, rows)``.  ``x_grid`` defaults to 601 points on
    ``[-3, 3]``.
    """
    if x_grid is None:
        x_grid = np.linspace(-3.0, 3.0, 601)
    xs = np.asarray(list(x_grid), dtype=float)
    if not np.all(np.isfinite(xs)):
        raise ValueError("x_grid must be finite")
    header = ["x", "soft", "half"] + [f"tl1_a{a:g}" for a in a_values]
    sv = soft(xs, lam)
    hv = half(xs, lam)
    tl = [[prox_tl1(x, lam, a).value for x in xs] for a in a_values]
    rows = [[float(xs[i]), float(sv[i]), float(hv[i])] + [col[i] for col in tl] for i in range(xs.size)]
    return header, rows


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return "0" if v == 0.0 else format(v, ".12g")
    return str(v)


def format_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    """CSV text with a header row and 12 significant digits per number."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def success_csv(curves: Sequence[SuccessCurve], family: str = "") -> str:
    header = ["scheme", "family", "sweep", "k", "trials", "successes", "rate"]
    rows = []
    for c in curves:
        for k, s in zip(c.k_values, c.successes):
            rows.append([c.scheme.value, family, float(c.sweep), k, c.trials, s, s / c.trials])
    return format_csv(header, rows)


def robustness_csv(curves: Sequence[RobustnessCurve]) -> str:
    header = ["scheme", "M", "k_est", "trials", "mse"]
    rows = [
        [c.scheme.value, c.M, k, c.trials, m]
        for c in curves
        for k, m in zip(c.k_est, c.mse)
    ]
    return format_csv(header, rows)


def threshold_csv(lam: float = 0.5, x_grid=None, a_values=(2.0, 1.0)) -> str:
    header, rows = emit_threshold_table(lam, x_grid, a_values)
    return format_csv(header, rows)


def write_atomic(path: str | os.PathLike, text: str) -> None:
    """Write ``text`` to a temporary sibling file, then rename it into place."""
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
