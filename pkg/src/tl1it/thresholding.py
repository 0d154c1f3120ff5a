"""Transformed-L1 penalty and its closed-form thresholding operator.

The TL1 penalty on a scalar is ``rho_a(|t|) = (a + 1)|t| / (a + |t|)``.  Its
proximal map ``argmin_y 0.5 (y - x)**2 + theta * rho_a(|y|)`` is a threshold
function: zero below an active threshold, and the largest root of a cubic
(written with Cardano's trigonometric formula) above it.  Which threshold is
active depends on whether ``theta`` lies below or above the critical value
``a**2 / (2 (a + 1))``.

Hard, soft and half thresholding are provided as baselines, together with a
brute-force minimiser used to check the closed forms.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Regime",
    "ThresholdParams",
    "ProxOutcome",
    "check_a",
    "rho",
    "penalty",
    "penalty_subgradient_component",
    "critical_theta",
    "compute_thresholds",
    "g_value",
    "prox_tl1",
    "threshold_tl1",
    "prox_oracle",
    "soft",
    "hard",
    "half",
    "half_threshold",
    "half_oracle",
]

CRITICAL_TOL = 1e-12
_ACOS_CLAMP = 1e-12
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class Regime(str, enum.Enum):
    SUBCRITICAL = "subcritical"
    CRITICAL = "critical"
    SUPERCRITICAL = "supercritical"


@dataclass(frozen=True)
class ThresholdParams:
    """Threshold values of the TL1 prox at ``theta = lambda * mu``.

    ``t`` is the active threshold: ``t2`` in the sub/critical regime and
    ``t3`` in the supercritical one.
    """

    theta: float
    a: float
    t1: float
    t2: float
    t3: float
    regime: Regime
    t: float


@dataclass(frozen=True)
class ProxOutcome:
    value: float
    at_jump: bool


def check_a(a: float) -> float:
    a = float(a)
    if not a > 0 or not math.isfinite(a):
        raise ValueError(f"TL1 parameter a must be positive and finite, got {a!r}")
    return a


def rho(t, a: float):
    """Scalar TL1 penalty ``(a + 1) t / (a + t)`` for ``t >= 0``.

    Works elementwise on arrays.

    >>> rho(2.0, 1.0)
    1.3333333333333333
    """
    a = check_a(a)
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("rho is defined for nonnegative arguments only")
    out = (a + 1.0) * t_arr / (a + t_arr)
    return float(out) if out.ndim == 0 else out


def penalty(x, a: float) -> float:
    """``P_a(x) = sum_i rho_a(|x_i|)``."""
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("penalty requires finite entries")
    ax = np.abs(x)
    a = check_a(a)
    return float(np.sum((a + 1.0) * ax / (a + ax)))


def penalty_subgradient_component(x_i: float, a: float) -> float:
    """Derivative of ``rho_a(|x|)`` at a nonzero point.

    At zero the subdifferential is the whole interval ``a(a+1)/a**2 * [-1, 1]``
    and no single value is returned.
    """
    a = check_a(a)
    x_i = float(x_i)
    if x_i == 0.0:
        raise ValueError("subgradient of rho_a(|x|) is set-valued at x = 0")
    return a * (a + 1.0) * math.copysign(1.0, x_i) / (a + abs(x_i)) ** 2


def critical_theta(a: float) -> float:
    """The regime boundary ``a**2 / (2 (a + 1))``."""
    a = check_a(a)
    return a * a / (2.0 * (a + 1.0))


def _regime(theta: float, a: float) -> Regime:
    crit = a * a / (2.0 * (a + 1.0))
    if abs(theta - crit) <= CRITICAL_TOL:
        return Regime.CRITICAL
    return Regime.SUPERCRITICAL if theta > crit else Regime.SUBCRITICAL


def compute_thresholds(theta: float, a: float) -> ThresholdParams:
    """Evaluate ``t1 <= t3 <= t2`` and pick the active threshold.

    Parameters
    ----------
    theta : float
        Effective regularisation, the product ``lambda * mu``.
    a : float
        TL1 shape parameter.
    """
    a = check_a(a)
    theta = float(theta)
    if not theta > 0 or not math.isfinite(theta):
        raise ValueError(f"theta must be positive and finite, got {theta!r}")
    t1 = 3.0 * 2.0 ** (-2.0 / 3.0) * (theta * a * (a + 1.0)) ** (1.0 / 3.0) - a
    t2 = theta * (a + 1.0) / a
    t3 = math.sqrt(2.0 * theta * (a + 1.0)) - a / 2.0
    regime = _regime(theta, a)
    t = t3 if regime is Regime.SUPERCRITICAL else t2
    return ThresholdParams(theta=theta, a=a, t1=t1, t2=t2, t3=t3, regime=regime, t=t)


def _g(x: np.ndarray, theta: float, a: float) -> np.ndarray:
    # No domain check; callers guarantee |x| > t1 up to rounding.
    ax = np.abs(x)
    s = a + ax
    arg = 1.0 - 27.0 * theta * a * (a + 1.0) / (2.0 * s**3)
    arg = np.where((arg < -1.0) & (arg >= -1.0 - _ACOS_CLAMP), -1.0, arg)
    arg = np.where((arg > 1.0) & (arg <= 1.0 + _ACOS_CLAMP), 1.0, arg)
    phi = np.arccos(arg)
    mag = (2.0 / 3.0) * s * np.cos(phi / 3.0) - 2.0 * a / 3.0 + ax / 3.0
    return np.sign(x) * mag


def g_value(x: float, theta: float, a: float) -> float:
    """Largest-magnitude root of the stationarity cubic, signed like ``x``.

    For ``x > 0`` the returned ``y`` solves
    ``y (a + y)**2 - x (a + y)**2 + theta a (a + 1) = 0``; negative ``x`` is
    handled by odd symmetry.  Requires ``|x| > t1`` so the cubic has three
    real roots.
    """
    a = check_a(a)
    theta = float(theta)
    if theta < 0:
        raise ValueError("theta must be nonnegative")
    x = float(x)
    if theta == 0.0:
        return x
    t1 = 3.0 * 2.0 ** (-2.0 / 3.0) * (theta * a * (a + 1.0)) ** (1.0 / 3.0) - a
    if abs(x) < t1 - CRITICAL_TOL * max(1.0, abs(t1)) or x == 0.0:
        raise ValueError(f"|x| = {abs(x)!r} is not above t1 = {t1!r}")
    return float(_g(np.asarray(x), theta, a))


def threshold_tl1(z, theta: float, a: float, t: float | None = None) -> np.ndarray:
    """Componentwise TL1 thresholding operator.

    Entries with ``|z_i| <= t`` are set to zero, the rest are mapped through
    the cubic root.  ``t`` defaults to the active threshold for ``theta``;
    adaptive schemes pass the exact order statistic the threshold was
    designed to hit.  ``theta == 0`` is the identity.
    """
    z = np.asarray(z, dtype=float)
    a = check_a(a)
    if theta < 0:
        raise ValueError("theta must be nonnegative")
    if theta == 0:
        return z.copy()
    if t is None:
        t = compute_thresholds(theta, a).t
    out = np.zeros_like(z)
    keep = np.abs(z) > t
    if np.any(keep):
        out[keep] = _g(z[keep], theta, a)
    return out


def prox_tl1(x: float, theta: float, a: float) -> ProxOutcome:
    """Global minimiser of ``0.5 (y - x)**2 + theta * rho_a(|y|)``.

    Ties at the threshold resolve to zero.

    >>> prox_tl1(0.4, 0.2, 1.0).value
    0.0
    """
    a = check_a(a)
    theta = float(theta)
    x = float(x)
    if theta < 0:
        raise ValueError("theta must be nonnegative")
    if theta == 0.0:
        return ProxOutcome(value=x, at_jump=False)
    params = compute_thresholds(theta, a)
    at_jump = abs(abs(x) - params.t) <= CRITICAL_TOL * max(1.0, params.t)
    if abs(x) <= params.t:
        return ProxOutcome(value=0.0, at_jump=at_jump)
    return ProxOutcome(value=float(_g(np.asarray(x), theta, a)), at_jump=at_jump)


def _golden_min(f, lo: float, hi: float, tol: float) -> float:
    c = hi - _GOLDEN * (hi - lo)
    d = lo + _GOLDEN * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > tol:
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - _GOLDEN * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _GOLDEN * (hi - lo)
            fd = f(d)
    return 0.5 * (lo + hi)


def _grid_minimise(x: float, objective_vec, objective, step: float, tol: float) -> float:
    r = abs(x) + 1.0
    n = int(math.ceil(2.0 * r / step))
    grid = np.linspace(-r, r, n + 1)
    vals = objective_vec(grid)
    i = int(np.argmin(vals))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, n)]
    best = _golden_min(objective, lo, hi, tol)
    # The objective has a kink at zero that golden-section can miss.
    if objective(0.0) <= objective(best):
        return 0.0
    return best


def prox_oracle(x: float, theta: float, a: float, step: float = 1e-4, tol: float = 1e-10) -> float:
    """Brute-force TL1 prox: dense grid, golden-section polish, explicit zero check."""
    a = check_a(a)
    x = float(x)
    theta = float(theta)

    def f_vec(y):
        ay = np.abs(y)
        return 0.5 * (y - x) ** 2 + theta * (a + 1.0) * ay / (a + ay)

    def f(y):
        ay = abs(y)
        return 0.5 * (y - x) ** 2 + theta * (a + 1.0) * ay / (a + ay)

    return _grid_minimise(x, f_vec, f, step, tol)


def soft(x, lam: float):
    """Soft thresholding ``sign(x) max(|x| - lam, 0)``; scalar or array."""
    x_arr = np.asarray(x, dtype=float)
    out = np.sign(x_arr) * np.maximum(np.abs(x_arr) - lam, 0.0)
    return float(out) if out.ndim == 0 else out


def hard(x, lam: float):
    """Hard thresholding: keep ``x`` where ``|x| > sqrt(2 lam)``."""
    x_arr = np.asarray(x, dtype=float)
    out = np.where(np.abs(x_arr) > math.sqrt(2.0 * lam), x_arr, 0.0)
    return float(out) if out.ndim == 0 else out


def half_threshold(lam: float) -> float:
    """Jump location of the half-thresholding function, ``54**(1/3)/4 (2 lam)**(2/3)``."""
    return 54.0 ** (1.0 / 3.0) / 4.0 * (2.0 * lam) ** (2.0 / 3.0)


def _half_map(x: np.ndarray, lam2: float) -> np.ndarray:
    # f_{lam2,1/2}; only valid above the half threshold.
    phi = np.arccos(lam2 / 8.0 * (np.abs(x) / 3.0) ** -1.5)
    return (2.0 / 3.0) * x * (1.0 + np.cos(2.0 * np.pi / 3.0 - (2.0 / 3.0) * phi))


def half(x, lam: float, t: float | None = None):
    """Half thresholding, the prox of ``lam * |y|**(1/2)`` under ``0.5 (y - x)**2``.

    ``t`` overrides the jump location (it must not be below the exact one).
    """
    x_arr = np.asarray(x, dtype=float)
    if t is None:
        t = half_threshold(lam)
    out = np.zeros_like(x_arr)
    keep = np.abs(x_arr) > t
    if np.any(keep):
        out[keep] = _half_map(x_arr[keep], 2.0 * lam)
    return float(out) if out.ndim == 0 else out


def half_oracle(x: float, lam: float, step: float = 1e-4, tol: float = 1e-10) -> float:
    """Brute-force minimiser of ``0.5 (y - x)**2 + lam |y|**0.5``."""
    x = float(x)

    def f_vec(y):
        return 0.5 * (y - x) ** 2 + lam * np.sqrt(np.abs(y))

    def f(y):
        return 0.5 * (y - x) ** 2 + lam * math.sqrt(abs(y))

    return _grid_minimise(x, f_vec, f, step, tol)
