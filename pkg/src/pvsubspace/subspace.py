"""Active subspaces from gradient samples.

``C = E[grad f grad f^T]`` is estimated by Monte Carlo, diagonalized with a
cyclic Jacobi solver, and split into active (``W1``) and inactive (``W2``)
eigenvector blocks.  Eigenvectors are sign-normalized so their first
non-negligible component is positive.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (AllZero, BadDimension, ConfigError, DimensionMismatch, NoConvergence,
                     NonFiniteGradient, NotSymmetric)
from .gradients import GradientSampleSet

MAX_SWEEPS = 100
OFF_DIAG_TOL = 1e-14
SYMMETRY_TOL = 1e-12
SIGN_TOL = 1e-12
DEGENERACY_TOL = 1e-10


class DegeneracyWarning(UserWarning):
    """Two eigenvalues are too close for their eigenvectors to be identifiable."""


def sign_normalize(vectors: np.ndarray) -> np.ndarray:
    """Flip columns so the first entry with magnitude above 1e-12 is positive."""
    out = np.array(vectors, dtype=float, copy=True)
    for j in range(out.shape[1]):
        big = np.flatnonzero(np.abs(out[:, j]) > SIGN_TOL)
        if big.size and out[big[0], j] < 0:
            out[:, j] = -out[:, j]
    return out


def _off_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.sqrt(np.sum(off * off)))


def eigh_symmetric(a) -> tuple[np.ndarray, np.ndarray]:
    """Eigenpairs of a small dense symmetric matrix by cyclic Jacobi rotations.

    Returns eigenvalues in descending order and the matching orthonormal,
    sign-normalized eigenvectors as columns.  Sweeps stop once the
    off-diagonal Frobenius norm is at most ``1e-14 * ||a||_F``.
    """
    a = np.array(a, dtype=float, copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    m = a.shape[0]
    if m > 64:
        raise ConfigError("m", f"Jacobi solver is meant for m <= 64, got {m}")
    if not np.all(np.isfinite(a)):
        raise NotSymmetric("matrix has non-finite entries")
    scale = float(np.max(np.abs(a))) if a.size else 0.0
    if np.max(np.abs(a - a.T), initial=0.0) > SYMMETRY_TOL * scale:
        raise NotSymmetric(f"asymmetry {np.max(np.abs(a - a.T)):.3g} exceeds tolerance")
    if scale == 0.0:
        return np.zeros(m), np.eye(m)
    # unit-scale copy keeps squared norms clear of under/overflow
    a = 0.5 * (a + a.T) / scale
    v = np.eye(m)
    target = OFF_DIAG_TOL * float(np.linalg.norm(a))

    for _ in range(MAX_SWEEPS):
        if _off_norm(a) <= target:
            break
        for p in range(m - 1):
            for q in range(p + 1, m):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.hypot(t, 1.0)
                s = t * c
                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    else:
        if _off_norm(a) > target:
            raise NoConvergence(f"Jacobi did not converge in {MAX_SWEEPS} sweeps")

    w = np.diag(a) * scale
    order = np.argsort(-w, kind="stable")
    return w[order], sign_normalize(v[:, order])


@dataclass(frozen=True)
class SubspaceEstimate:
    eigenvalues: np.ndarray  # descending, clamped at 0
    eigenvectors: np.ndarray  # columns
    c_matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.c_matrix.shape[0]

    @classmethod
    def from_matrix(cls, c: np.ndarray) -> "SubspaceEstimate":
        raw, vectors = eigh_symmetric(c)
        values = np.where(raw < 0.0, 0.0, raw)
        if values[0] > 0:
            gaps = values[:-1] - values[1:]
            close = np.flatnonzero(gaps < DEGENERACY_TOL * values[0])
            if close.size:
                warnings.warn(f"eigenvalues {[int(i) + 1 for i in close]} are (near-)repeated; "
                              "their individual eigenvectors are not identifiable",
                              DegeneracyWarning, stacklevel=3)
        return cls(values, vectors, np.asarray(c, dtype=float))


@dataclass(frozen=True)
class SubspacePartition:
    n: int
    w1: np.ndarray  # (m, n)
    w2: np.ndarray  # (m, m - n)

    @property
    def dim(self) -> int:
        return self.w1.shape[0]


def c_matrix(grads: np.ndarray) -> np.ndarray:
    """``(1/M) sum_i g_i g_i^T`` with a fixed-order reduction."""
    grads = np.asarray(grads, dtype=float)
    return np.einsum("ij,ik->jk", grads, grads) / grads.shape[0]


def estimate_c_matrix(samples: GradientSampleSet | np.ndarray) -> SubspaceEstimate:
    grads = samples.grads if isinstance(samples, GradientSampleSet) else np.asarray(samples, dtype=float)
    if grads.ndim != 2 or grads.shape[0] < 1:
        raise DimensionMismatch(f"need an (M, m) gradient array with M >= 1, got shape {grads.shape}")
    bad = np.flatnonzero(~np.all(np.isfinite(grads), axis=1))
    if bad.size:
        raise NonFiniteGradient(int(bad[0]))
    return SubspaceEstimate.from_matrix(c_matrix(grads))


def partition(est: SubspaceEstimate, n: int) -> SubspacePartition:
    m = est.dim
    if not 1 <= n < m:
        raise BadDimension(f"active dimension must satisfy 1 <= n < {m}, got {n}")
    return SubspacePartition(n, est.eigenvectors[:, :n].copy(), est.eigenvectors[:, n:].copy())


def suggest_gap(eigenvalues) -> tuple[int, float]:
    """Index ``n`` maximizing ``lambda_n / lambda_{n+1}`` (advisory only).

    A zero denominator counts as an infinite ratio; ties go to the smallest n.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    if lam.size < 2:
        raise BadDimension("need at least two eigenvalues")
    if np.any(lam < 0):
        raise ConfigError("eigenvalues", "eigenvalues must be non-negative")
    if lam[0] == 0.0:
        raise AllZero("all eigenvalues are zero; f looks constant")
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(lam[1:] == 0.0, np.inf, lam[:-1] / np.where(lam[1:] == 0.0, 1.0, lam[1:]))
    n = int(np.argmax(ratios)) + 1
    return n, float(ratios[n - 1])


def _check_points(part: SubspacePartition, points) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != part.dim:
        raise DimensionMismatch(f"points have {pts.shape[1]} coordinates, subspace lives in R^{part.dim}")
    return pts


def active_coordinates(part: SubspacePartition, points) -> np.ndarray:
    """Active variables ``y = W1^T x`` for each row of ``points``."""
    return _check_points(part, points) @ part.w1


def inactive_coordinates(part: SubspacePartition, points) -> np.ndarray:
    return _check_points(part, points) @ part.w2


def summary_plot_data(part: SubspacePartition, points, values, n_plot: int = 1) -> np.ndarray:
    """Rows ``(w1^T x_i [, w2^T x_i], f_i)`` for a sufficient summary plot."""
    if n_plot not in (1, 2):
        raise ConfigError("n_plot", f"summary plots are 1- or 2-dimensional, got {n_plot}")
    if n_plot > part.n:
        raise DimensionMismatch(f"n_plot={n_plot} exceeds the active dimension {part.n}")
    values = np.asarray(values, dtype=float)
    y = active_coordinates(part, points)
    if values.shape != (y.shape[0],):
        raise DimensionMismatch(f"{y.shape[0]} points but {values.size} values")
    return np.column_stack([y[:, :n_plot], values])
