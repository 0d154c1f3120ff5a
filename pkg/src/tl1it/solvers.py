"""Iterative thresholding solvers for ``min 0.5||y - Ax||^2 + lambda P_a(x)``.

Every scheme iterates ``x <- Threshold(B_mu(x))`` with the Landweber step
``B_mu(x) = x + mu A^T (y - A x)`` and ``mu = (1 - mu_eps) / ||A||^2``:

* ``S1``: TL1 thresholding with fixed ``lambda`` and ``a``.
* ``S2``: TL1 with ``lambda`` re-selected each step from a sparsity estimate
  ``k``; switches between the continuous and the jump threshold.
* ``S3``: TL1 with both ``lambda`` and ``a`` re-selected so the step always
  sits at the critical point and the threshold equals ``|z|_(k+1)``.
* ``HardIT`` / ``HalfIT``: hard and half thresholding with the same
  ``k``-sparsity threshold placement.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .thresholding import (
    Regime,
    check_a,
    compute_thresholds,
    half,
    penalty,
    soft,
    threshold_tl1,
)

__all__ = [
    "Scheme",
    "LinearModel",
    "SolverConfig",
    "SolveResult",
    "spectral_norm",
    "gradient_step",
    "objective",
    "warm_start",
    "fixed_point_residual",
    "select_lambda_s2",
    "select_params_s3",
    "hard_lambda",
    "half_lambda",
    "solve",
    "solve_s1",
    "solve_s2",
    "solve_s3",
    "solve_hard_it",
    "solve_half_it",
]


class Scheme(str, enum.Enum):
    S1 = "S1"
    S2 = "S2"
    S3 = "S3"
    HARD = "HardIT"
    HALF = "HalfIT"


def spectral_norm(A, max_iter: int = 500, tol: float = 1e-12, seed: int = 0) -> float:
    """Largest singular value of ``A`` by power iteration on ``A^T A``.

    The start vector is drawn from a fixed seed, so the result is a
    deterministic function of ``A``.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.size == 0:
        raise ValueError("spectral_norm expects a nonempty 2-D array")
    if not np.any(A):
        raise ValueError("spectral norm of an all-zero matrix is not usable as a step size")
    v = np.random.default_rng(seed).standard_normal(A.shape[1])
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(max_iter):
        w = A.T @ (A @ v)
        new = float(v @ w)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            # start vector in the null space; restart on a column of A
            v = A[:, int(np.argmax(np.linalg.norm(A, axis=0)))].copy()
            v = A.T @ v
            v /= np.linalg.norm(v)
            continue
        v = w / nw
        if est > 0 and abs(new - est) <= tol * est:
            est = new
            break
        est = new
    return math.sqrt(max(est, 0.0))


@dataclass(frozen=True, eq=False)
class LinearModel:
    """Sensing matrix ``A`` (M x N), data ``y`` (M,), cached ``||A||``."""

    A: np.ndarray
    y: np.ndarray
    op_norm: float = field(default=-1.0)

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        y = np.array(self.y, dtype=float).reshape(-1)
        if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
            raise ValueError(f"A must be a nonempty matrix, got shape {A.shape}")
        if y.shape[0] != A.shape[0]:
            raise ValueError(f"y has length {y.shape[0]}, expected {A.shape[0]}")
        A.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "y", y)
        if self.op_norm < 0:
            object.__setattr__(self, "op_norm", spectral_norm(A))

    @property
    def shape(self) -> tuple[int, int]:
        return self.A.shape

    def with_data(self, y) -> "LinearModel":
        """Same matrix (and cached norm) with new measurements."""
        return LinearModel(self.A, y, op_norm=self.op_norm)


@dataclass
class SolverConfig:
    scheme: Scheme
    a: float = 1.0
    lam: float | None = None
    k: int | None = None
    mu_eps: float = 0.01
    max_iter: int = 3000
    rel_tol: float = 1e-8
    warm_start_iters: int = 20
    warm_start_frac: float = 0.1

    def __post_init__(self):
        self.scheme = Scheme(self.scheme)
        if not 0.0 < self.mu_eps < 1.0:
            raise ValueError("mu_eps must lie in (0, 1)")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.warm_start_iters < 0:
            raise ValueError("warm_start_iters must be nonnegative")
        if self.scheme in (Scheme.S1, Scheme.S2):
            check_a(self.a)
        if self.scheme is Scheme.S1:
            if self.lam is None or not self.lam > 0:
                raise ValueError("scheme S1 needs a positive lam")
        elif self.k is None:
            raise ValueError(f"scheme {self.scheme.value} needs a sparsity estimate k")

    def step_size(self, model: LinearModel) -> float:
        return (1.0 - self.mu_eps) / model.op_norm**2


@dataclass
class SolveResult:
    x: np.ndarray
    iterations: int
    converged: bool
    objective_history: list[float]
    final_rel_change: float
    fixed_point_residual: float


def gradient_step(x, model: LinearModel, mu: float) -> np.ndarray:
    """Landweber step ``x + mu A^T (y - A x)``."""
    x = np.asarray(x, dtype=float)
    if x.shape != (model.A.shape[1],):
        raise ValueError(f"x has shape {x.shape}, expected ({model.A.shape[1]},)")
    return x + mu * (model.A.T @ (model.y - model.A @ x))


def objective(x, model: LinearModel, lam: float, a: float) -> float:
    """``0.5 ||y - A x||^2 + lam * P_a(x)``."""
    x = np.asarray(x, dtype=float)
    r = model.y - model.A @ x
    return 0.5 * float(r @ r) + lam * penalty(x, a)


def warm_start(model: LinearModel, iters: int, mu: float, frac: float = 0.1) -> np.ndarray:
    """A few ISTA steps on the L1 problem with ``lambda = frac * ||A^T y||_inf``."""
    if iters < 0:
        raise ValueError("iters must be nonnegative")
    x = np.zeros(model.A.shape[1])
    if iters == 0:
        return x
    lam = frac * float(np.max(np.abs(model.A.T @ model.y)))
    for _ in range(iters):
        x = soft(gradient_step(x, model, mu), lam * mu)
    return x


def fixed_point_residual(x, model: LinearModel, theta: float, a: float, mu: float) -> float:
    """``||x - G(B_mu(x))||_inf`` for the TL1 operator at fixed ``theta``."""
    x = np.asarray(x, dtype=float)
    return float(np.max(np.abs(x - threshold_tl1(gradient_step(x, model, mu), theta, a)), initial=0.0))


def _order_stats(z: np.ndarray, k: int) -> tuple[float, float]:
    """``(|z|_k, |z|_(k+1))`` for magnitudes sorted in decreasing order."""
    n = z.shape[0]
    if not 1 <= k < n:
        raise ValueError(f"sparsity k={k} must satisfy 1 <= k < {n}")
    mags = np.abs(z)
    part = np.partition(mags, (n - k - 1, n - k))
    return float(part[n - k]), float(part[n - k - 1])


def select_lambda_s2(z, k: int, a: float, mu: float) -> tuple[float, float, Regime]:
    """Regularisation and threshold for one TL1IT-s2 step.

    Returns ``(lambda, t, regime)``.  The continuous branch puts the
    threshold at ``|z|_(k+1)``; when that would need a supercritical
    ``lambda`` the jump branch is taken and the threshold lands on ``|z|_k``.
    The returned ``t`` is the order statistic itself, which the closed-form
    threshold equals in exact arithmetic.
    """
    a = check_a(a)
    zk, zk1 = _order_stats(np.asarray(z, dtype=float), k)
    lam1 = a * zk1 / (mu * (a + 1.0))
    if lam1 <= a * a / (2.0 * (a + 1.0) * mu):
        return lam1, zk1, Regime.SUBCRITICAL
    lam2 = (a + 2.0 * zk) ** 2 / (8.0 * (a + 1.0) * mu)
    return lam2, zk, Regime.SUPERCRITICAL


def select_params_s3(z, k: int, mu: float) -> tuple[float, float, float]:
    """``(theta, a, t)`` for one TL1IT-s3 step.

    ``theta = lambda * mu = 2 s**2 / (1 + 2 s)`` with ``s = |z|_(k+1)``, and
    ``a`` is chosen so that ``theta`` is exactly critical; the threshold then
    equals ``s``.  ``s == 0`` gives ``theta = a = t = 0`` (identity map).
    """
    _, s = _order_stats(np.asarray(z, dtype=float), k)
    theta = 2.0 * s * s / (1.0 + 2.0 * s)
    root = math.sqrt(theta * theta + 2.0 * theta)
    return theta, theta + root, theta / 2.0 + root / 2.0


def _s2_map(z, k, a, mu):
    lam, t, _ = select_lambda_s2(z, k, a, mu)
    return threshold_tl1(z, lam * mu, a, t=t)


def _s3_map(z, k, mu):
    theta, a, _ = select_params_s3(z, k, mu)
    if theta == 0.0:
        return z.copy()
    _, s = _order_stats(z, k)
    return threshold_tl1(z, theta, a, t=s)


def hard_lambda(s: float, mu: float) -> float:
    """``lambda`` whose hard threshold ``sqrt(2 lambda mu)`` equals ``s``."""
    return s * s / (2.0 * mu)


def half_lambda(s: float, mu: float) -> float:
    """``lambda`` whose half-thresholding jump ``54**(1/3)/4 (2 lambda mu)**(2/3)`` equals ``s``."""
    return 0.5 * (4.0 * s / 54.0 ** (1.0 / 3.0)) ** 1.5 / mu


def _hard_map(z, k):
    # threshold sqrt(2 * hard_lambda(s, mu) * mu) == s; compare against s directly
    _, s = _order_stats(z, k)
    return np.where(np.abs(z) > s, z, 0.0)


def _half_map(z, k):
    _, s = _order_stats(z, k)
    if s == 0.0:
        return z.copy()
    theta = half_lambda(s, 1.0)
    # jump placed exactly on |z|_(k+1); half_threshold(theta) equals s up to rounding
    return half(z, theta, t=s)


def _iterate(
    model: LinearModel,
    cfg: SolverConfig,
    step: Callable[[np.ndarray], np.ndarray],
    record: Callable[[np.ndarray], float] | None = None,
) -> SolveResult:
    mu = cfg.step_size(model)
    x = warm_start(model, cfg.warm_start_iters, mu, cfg.warm_start_frac)
    history = [record(x)] if record is not None else []
    converged = False
    rel_change = math.inf
    it = 0
    for it in range(1, cfg.max_iter + 1):
        x_new = step(gradient_step(x, model, mu))
        if record is not None:
            history.append(record(x_new))
        nx = float(np.linalg.norm(x))
        diff = float(np.linalg.norm(x_new - x))
        x = x_new
        if nx == 0.0:
            if diff == 0.0:
                rel_change = 0.0
                converged = True
                break
            continue
        rel_change = diff / nx
        if rel_change <= cfg.rel_tol:
            converged = True
            break
    residual = float(np.max(np.abs(x - step(gradient_step(x, model, mu))), initial=0.0))
    return SolveResult(
        x=x,
        iterations=it,
        converged=converged,
        objective_history=history,
        final_rel_change=rel_change,
        fixed_point_residual=residual,
    )


def solve_s1(model: LinearModel, cfg: SolverConfig) -> SolveResult:
    """TL1 iterative thresholding with fixed ``lambda`` (``cfg.lam``) and ``a``."""
    if cfg.scheme is not Scheme.S1:
        raise ValueError("solve_s1 needs scheme S1")
    mu = cfg.step_size(model)
    theta = cfg.lam * mu
    params = compute_thresholds(theta, cfg.a)
    return _iterate(
        model,
        cfg,
        lambda z: threshold_tl1(z, theta, cfg.a, t=params.t),
        record=lambda x: objective(x, model, cfg.lam, cfg.a),
    )


def _check_k(model: LinearModel, cfg: SolverConfig) -> int:
    n = model.A.shape[1]
    if cfg.k is None or not 1 <= cfg.k < n:
        raise ValueError(f"sparsity k={cfg.k} must satisfy 1 <= k < {n}")
    return int(cfg.k)


def solve_s2(model: LinearModel, cfg: SolverConfig) -> SolveResult:
    k = _check_k(model, cfg)
    mu = cfg.step_size(model)
    return _iterate(model, cfg, lambda z: _s2_map(z, k, cfg.a, mu))


def solve_s3(model: LinearModel, cfg: SolverConfig) -> SolveResult:
    k = _check_k(model, cfg)
    mu = cfg.step_size(model)
    return _iterate(model, cfg, lambda z: _s3_map(z, k, mu))


def solve_hard_it(model: LinearModel, cfg: SolverConfig) -> SolveResult:
    k = _check_k(model, cfg)
    return _iterate(model, cfg, lambda z: _hard_map(z, k))


def solve_half_it(model: LinearModel, cfg: SolverConfig) -> SolveResult:
    k = _check_k(model, cfg)
    return _iterate(model, cfg, lambda z: _half_map(z, k))


_SOLVERS = {
    Scheme.S1: solve_s1,
    Scheme.S2: solve_s2,
    Scheme.S3: solve_s3,
    Scheme.HARD: solve_hard_it,
    Scheme.HALF: solve_half_it,
}


def solve(model: LinearModel, cfg: SolverConfig) -> SolveResult:
    """Dispatch on ``cfg.scheme``."""
    return _SOLVERS[cfg.scheme](model, cfg)
