"""Nonparametric bootstrap of the active-subspace estimate.

Each replicate resamples the gradient set with replacement, rebuilds ``C``
and diagonalizes it.  Replicate ``j`` draws its indices from a Philox
stream keyed by ``(seed, j)``, so replicates are independent of each
other's evaluation order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import BadDimension, ConfigError, NotOrthonormal, NumericalError
from .gradients import GradientSampleSet
from .params import STREAM_BOOTSTRAP, STREAM_CLOUD
from .subspace import SubspacePartition, c_matrix, eigh_symmetric, estimate_c_matrix

ORTHO_TOL = 1e-10

Resampler = Callable[[int, int], np.ndarray]


def resample_indices(seed: int, replicate: int, size: int, stream: int = STREAM_BOOTSTRAP) -> np.ndarray:
    """Indices drawn uniformly with replacement from ``0 .. size-1``."""
    gen = np.random.Generator(np.random.Philox(key=seed, counter=[0, replicate, 0, stream]))
    return gen.integers(0, size, size=size)


def identity_resampler(replicate: int, size: int) -> np.ndarray:
    return np.arange(size)


@dataclass(frozen=True)
class BootstrapSummary:
    n: int
    level: float
    eigenvalues: np.ndarray  # point estimate
    eigenvalue_replicates: np.ndarray  # (M', m)
    eigenvalue_lo: np.ndarray
    eigenvalue_hi: np.ndarray
    subspace_errors: np.ndarray  # (M',)
    subspace_error_mean: float
    subspace_error_lo: float
    subspace_error_hi: float
    replicate_w1_first2: np.ndarray  # (M', m, min(2, n))

    @property
    def replicates(self) -> int:
        return self.eigenvalue_replicates.shape[0]

    def to_dict(self) -> dict:
        return {
            "replicates": self.replicates,
            "level": self.level,
            "eigenvalue_intervals": [[float(lo), float(hi)] for lo, hi in
                                     zip(self.eigenvalue_lo, self.eigenvalue_hi)],
            "subspace_error": {"n": self.n, "mean": self.subspace_error_mean,
                               "lo": self.subspace_error_lo, "hi": self.subspace_error_hi},
        }


def _check_orthonormal(w: np.ndarray, name: str) -> None:
    gram = w.T @ w
    err = np.max(np.abs(gram - np.eye(gram.shape[0])), initial=0.0)
    if err > ORTHO_TOL:
        raise NotOrthonormal(f"{name} columns are not orthonormal (max deviation {err:.3g})")


def subspace_distance(w1_a, w2_b) -> float:
    """Distance between span(``w1_a``) and the subspace whose complement is ``w2_b``.

    This is the spectral norm of ``w1_a^T w2_b``; for orthonormal blocks it
    equals ``||P_a - P_b||_2`` and lies in ``[0, 1]``.
    """
    w1_a = np.asarray(w1_a, dtype=float)
    w2_b = np.asarray(w2_b, dtype=float)
    if w1_a.ndim != 2 or w2_b.ndim != 2 or w1_a.shape[0] != w2_b.shape[0]:
        raise BadDimension(f"incompatible blocks {w1_a.shape} and {w2_b.shape}")
    _check_orthonormal(w1_a, "w1_a")
    _check_orthonormal(w2_b, "w2_b")
    cross = w1_a.T @ w2_b
    gram = cross @ cross.T if cross.shape[0] <= cross.shape[1] else cross.T @ cross
    top = eigh_symmetric(gram)[0][0]
    return float(min(max(np.sqrt(max(top, 0.0)), 0.0), 1.0))


def _replicate_eigs(grads: np.ndarray, idx: np.ndarray, replicate: int) -> tuple[np.ndarray, np.ndarray]:
    return _eigs(c_matrix(grads[idx]), replicate)


def _eigs(c: np.ndarray, replicate: int) -> tuple[np.ndarray, np.ndarray]:
    try:
        return eigh_symmetric(c)
    except NumericalError as exc:
        raise type(exc)(f"bootstrap replicate {replicate}: {exc}") from exc


def bootstrap_subspace(samples: GradientSampleSet, n: int, replicates: int = 1000, level: float = 0.99,
                       seed: int = 0, resampler: Resampler | None = None) -> BootstrapSummary:
    grads = samples.grads
    M, m = grads.shape
    if M < 2:
        raise ConfigError("M", "bootstrap needs at least two gradient samples")
    if not 1 <= n < m:
        raise BadDimension(f"active dimension must satisfy 1 <= n < {m}, got {n}")
    if not 0.0 < level < 1.0:
        raise ConfigError("level", f"level must lie in (0, 1), got {level!r}")
    if replicates < 1:
        raise ConfigError("bootstrap", f"need at least one replicate, got {replicates}")
    if resampler is None:
        def resampler(j, size):
            return resample_indices(seed, j, size)

    base = estimate_c_matrix(grads)
    w1 = base.eigenvectors[:, :n]
    keep = min(2, n)
    evals = np.empty((replicates, m))
    errors = np.empty(replicates)
    clouds = np.empty((replicates, m, keep))
    for j in range(replicates):
        c_j = c_matrix(grads[resampler(j, M)])
        lam, vecs = _eigs(c_j, j)
        evals[j] = np.where(lam < 0.0, 0.0, lam)
        # an unchanged C yields the same (deterministic) eigenvectors: distance exactly 0
        errors[j] = 0.0 if np.array_equal(c_j, base.c_matrix) else subspace_distance(w1, vecs[:, n:])
        clouds[j] = vecs[:, :keep]

    tail = (1.0 - level) / 2.0
    lo, hi = np.quantile(evals, [tail, 1.0 - tail], axis=0)
    e_lo, e_hi = np.quantile(errors, [tail, 1.0 - tail])
    return BootstrapSummary(n, level, base.eigenvalues, evals, lo, hi, errors,
                            float(errors.mean()), float(e_lo), float(e_hi), clouds)


def replicate_summary_cloud(samples: GradientSampleSet, part: SubspacePartition, cloud_replicates: int,
                            points, values, seed: int = 0,
                            resampler: Resampler | None = None) -> np.ndarray:
    """Rows ``(sample, replicate, y1[, y2], f)`` with one cluster per point.

    ``y`` uses the first ``min(2, n)`` eigenvectors of each bootstrap
    replicate of ``C``.
    """
    if cloud_replicates < 1:
        raise ConfigError("cloud_replicates", f"need at least one replicate, got {cloud_replicates}")
    points = np.atleast_2d(np.asarray(points, dtype=float))
    values = np.asarray(values, dtype=float)
    if points.shape[1] != part.dim or values.shape != (points.shape[0],):
        raise BadDimension(f"points {points.shape} / values {values.shape} do not match R^{part.dim}")
    grads = samples.grads
    M = grads.shape[0]
    if resampler is None:
        def resampler(j, size):
            return resample_indices(seed, j, size, STREAM_CLOUD)

    keep = min(2, part.n)
    ys = np.empty((cloud_replicates, points.shape[0], keep))
    for r in range(cloud_replicates):
        _, vecs = _replicate_eigs(grads, resampler(r, M), r)
        ys[r] = points @ vecs[:, :keep]

    rows = []
    for i in range(points.shape[0]):
        for r in range(cloud_replicates):
            rows.append([i, r, *ys[r, i], values[i]])
    return np.array(rows, dtype=float).reshape(-1, 3 + keep)
