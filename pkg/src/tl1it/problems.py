"""Seeded generators for compressed-sensing test problems.

Two matrix families are supported: Gaussian rows with equicorrelated columns
(covariance ``(1 - r) I + r 11^T``) and randomly over-sampled cosine
matrices, which become highly coherent as the over-sampling factor ``F``
grows.  Signals have Gaussian amplitudes on a random support, optionally
with a minimum index separation between spikes.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

__all__ = [
    "RngStream",
    "GaussianMatrixSpec",
    "DctMatrixSpec",
    "SignalSpec",
    "NoiseSpec",
    "ProblemInstance",
    "gen_gaussian_matrix",
    "gen_dct_matrix",
    "gen_signal",
    "apply_noise",
    "mutual_coherence",
    "make_instance",
]


@dataclass(frozen=True)
class RngStream:
    """Named, reproducible random stream.

    ``(master_seed, stream_id)`` fixes the draws; ``child(j)`` derives an
    independent substream, so one trial can feed its matrix, signal and noise
    from separate streams.
    """

    master_seed: int
    stream_id: int = 0
    path: tuple[int, ...] = ()

    def child(self, j: int) -> "RngStream":
        return RngStream(self.master_seed, self.stream_id, self.path + (int(j),))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(
            entropy=int(self.master_seed), spawn_key=(int(self.stream_id),) + self.path
        )
        return np.random.default_rng(ss)


@dataclass(frozen=True)
class GaussianMatrixSpec:
    M: int
    N: int
    r: float = 0.0

    def __post_init__(self):
        if self.M < 1 or self.N < 1:
            raise ValueError("matrix dimensions must be positive")
        if not 0.0 <= self.r < 1.0:
            raise ValueError(f"covariance r must lie in [0, 1), got {self.r}")


@dataclass(frozen=True)
class DctMatrixSpec:
    M: int
    N: int
    F: float = 1.0

    def __post_init__(self):
        if self.M < 1 or self.N < 1:
            raise ValueError("matrix dimensions must be positive")
        if not self.F >= 1.0:
            raise ValueError(f"over-sampling factor F must be >= 1, got {self.F}")


@dataclass(frozen=True)
class SignalSpec:
    N: int
    k: int
    min_sep: int = 0
    amplitude_std: float = 1.0

    def __post_init__(self):
        if self.k < 0 or self.k > self.N:
            raise ValueError(f"sparsity k={self.k} out of range for N={self.N}")
        if self.min_sep < 0:
            raise ValueError("min_sep must be nonnegative")
        if not self.amplitude_std > 0:
            raise ValueError("amplitude_std must be positive")
        if self.k > 0 and self.N - (self.k - 1) * (max(self.min_sep, 1) - 1) < self.k:
            raise ValueError(
                f"cannot place {self.k} spikes {self.min_sep} apart in length {self.N}"
            )


@dataclass(frozen=True)
class NoiseSpec:
    sigma: float = 0.0
    linf_cap: float = math.inf

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        if self.linf_cap < 0:
            raise ValueError("linf_cap must be nonnegative")
        if self.sigma > 0 and self.linf_cap == 0:
            raise ValueError("a zero amplitude cap admits no noise draws")


def gen_gaussian_matrix(spec: GaussianMatrixSpec, rng: RngStream) -> np.ndarray:
    """Rows i.i.d. ``N(0, (1 - r) I + r 11^T)`` via a shared scalar factor."""
    gen = rng.generator()
    g0 = gen.standard_normal((spec.M, 1))
    g = gen.standard_normal((spec.M, spec.N))
    return math.sqrt(spec.r) * g0 + math.sqrt(1.0 - spec.r) * g


def gen_dct_matrix(spec: DctMatrixSpec, rng: RngStream) -> np.ndarray:
    """Columns ``cos(2 pi w (j - 1) / F) / sqrt(M)`` with ``w ~ U(0, 1)^M``."""
    w = rng.generator().uniform(0.0, 1.0, spec.M)
    j = np.arange(spec.N)
    return np.cos(2.0 * np.pi * np.outer(w, j) / spec.F) / math.sqrt(spec.M)


def gen_signal(spec: SignalSpec, rng: RngStream) -> np.ndarray:
    """k-sparse vector with Gaussian amplitudes.

    The support is uniform over all index sets whose sorted gaps are at least
    ``min_sep``: draw ``k`` distinct slots from a shortened range and spread
    them out by ``min_sep - 1`` per preceding spike.
    """
    x = np.zeros(spec.N)
    if spec.k == 0:
        return x
    gen = rng.generator()
    pad = max(spec.min_sep, 1) - 1
    slots = np.sort(gen.choice(spec.N - (spec.k - 1) * pad, size=spec.k, replace=False))
    support = slots + pad * np.arange(spec.k)
    x[support] = spec.amplitude_std * gen.standard_normal(spec.k)
    return x


def apply_noise(y, spec: NoiseSpec, rng: RngStream) -> np.ndarray:
    """Add ``N(0, sigma^2)`` noise, redrawing entries that exceed ``linf_cap``."""
    y = np.asarray(y, dtype=float)
    if spec.sigma == 0:
        return y.copy()
    gen = rng.generator()
    eps = spec.sigma * gen.standard_normal(y.shape)
    bad = np.abs(eps) > spec.linf_cap
    while np.any(bad):
        eps[bad] = spec.sigma * gen.standard_normal(int(bad.sum()))
        bad = np.abs(eps) > spec.linf_cap
    return y + eps


def mutual_coherence(A) -> float:
    """Largest absolute cosine between two distinct columns."""
    A = np.asarray(A, dtype=float)
    norms = np.linalg.norm(A, axis=0)
    if np.any(norms == 0):
        raise ValueError("mutual coherence is undefined with a zero column")
    if A.shape[1] < 2:
        return 0.0
    U = A / norms
    G = np.abs(U.T @ U)
    np.fill_diagonal(G, 0.0)
    return float(min(G.max(), 1.0))


@dataclass
class ProblemInstance:
    A: np.ndarray
    y: np.ndarray
    x_true: np.ndarray
    k: int
    seed: int
    family: str
    params: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "A": self.A.tolist(),
            "y": self.y.tolist(),
            "x_true": self.x_true.tolist(),
            "k": int(self.k),
            "seed": int(self.seed),
            "family": self.family,
            "params": self.params,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ProblemInstance":
        missing = {"A", "y", "x_true", "k"} - d.keys()
        if missing:
            raise ValueError(f"instance document lacks keys: {sorted(missing)}")
        A = np.asarray(d["A"], dtype=float)
        y = np.asarray(d["y"], dtype=float)
        x = np.asarray(d["x_true"], dtype=float)
        if A.ndim != 2 or y.shape != (A.shape[0],) or x.shape != (A.shape[1],):
            raise ValueError("instance arrays have inconsistent shapes")
        family = d.get("family", "custom")
        return cls(A, y, x, int(d["k"]), int(d.get("seed", 0)), family, dict(d.get("params", {})))

    @classmethod
    def from_json(cls, text: str) -> "ProblemInstance":
        return cls.from_dict(json.loads(text))


def make_instance(
    family: str,
    M: int,
    N: int,
    k: int,
    rng: RngStream,
    r: float = 0.0,
    F: float = 1.0,
    min_sep: int | None = None,
    amplitude_std: float = 1.0,
    noise: NoiseSpec | None = None,
) -> ProblemInstance:
    """Draw ``A``, ``x*`` and ``y = A x* (+ noise)`` from three substreams of ``rng``.

    ``min_sep`` defaults to ``round(2 F)`` for the cosine family and 0 for
    Gaussian matrices.
    """
    if family == "gaussian":
        A = gen_gaussian_matrix(GaussianMatrixSpec(M, N, r), rng.child(0))
        params: dict[str, Any] = {"M": M, "N": N, "r": r}
        sep = 0 if min_sep is None else min_sep
    elif family == "dct":
        A = gen_dct_matrix(DctMatrixSpec(M, N, F), rng.child(0))
        params = {"M": M, "N": N, "F": F}
        sep = int(round(2 * F)) if min_sep is None else min_sep
    else:
        raise ValueError(f"unknown matrix family {family!r}")
    x = gen_signal(SignalSpec(N, k, sep, amplitude_std), rng.child(1))
    y = A @ x
    params["min_sep"] = sep
    params["amplitude_std"] = amplitude_std
    if noise is not None and noise.sigma > 0:
        y = apply_noise(y, noise, rng.child(2))
        params["sigma"] = noise.sigma
        params["linf_cap"] = noise.linf_cap if math.isfinite(noise.linf_cap) else None
    return ProblemInstance(A, y, x, k, rng.master_seed, family, params)
