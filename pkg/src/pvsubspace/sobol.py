"""Sobol' indices from a Legendre polynomial-chaos expansion.

Coefficients are projections ``c_a = E[f Psi_a]`` under the uniform
probability measure on ``[-1, 1]^m``, computed with a tensor Gauss-Legendre
rule.  The grid is evaluated once; all coefficients come from contracting
that cached tensor one axis at a time.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import BudgetExceeded, ConfigError, DimensionMismatch, ZeroVariance
from .models import ScalarModel, evaluate_points

DEFAULT_DEGREE = 5
DEFAULT_QPOINTS = 8
DEFAULT_MAX_EVALUATIONS = 10 ** 6


def gauss_legendre_nodes(q: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the ``q``-point rule on [-1, 1]; weights sum to 2."""
    if not 1 <= q <= 64:
        raise ConfigError("qpoints", f"points per dimension must lie in [1, 64], got {q}")
    return leggauss(q)


def legendre_eval(k: int, x) -> np.ndarray:
    """Legendre polynomial of degree ``k`` scaled to unit norm under ``dx/2``."""
    if k < 0:
        raise ConfigError("degree", f"degree must be non-negative, got {k}")
    x = np.asarray(x, dtype=float)
    prev, cur = np.ones_like(x), x.copy()
    if k == 0:
        return prev
    for j in range(1, k):
        prev, cur = cur, ((2 * j + 1) * x * cur - j * prev) / (j + 1)
    return np.sqrt(2 * k + 1) * cur


def _legendre_table(max_degree: int, x: np.ndarray) -> np.ndarray:
    return np.array([legendre_eval(k, x) for k in range(max_degree + 1)])


def total_degree_indices(dim: int, max_degree: int) -> np.ndarray:
    """Multi-indices with ``|a| <= max_degree``, graded then reverse-lexicographic."""
    def compositions(total, parts):
        if parts == 1:
            yield (total,)
            return
        for first in range(total, -1, -1):
            for rest in compositions(total - first, parts - 1):
                yield (first, *rest)

    out = [a for d in range(max_degree + 1) for a in compositions(d, dim)]
    return np.array(out, dtype=int).reshape(-1, dim)


@dataclass(frozen=True)
class PceExpansion:
    dim: int
    max_degree: int
    multi_indices: np.ndarray  # (K, m), first row is the zero index
    coefficients: np.ndarray  # (K,)
    evaluations: int = 0

    @property
    def terms(self) -> list[tuple[tuple[int, ...], float]]:
        return [(tuple(int(v) for v in a), float(c)) for a, c in zip(self.multi_indices, self.coefficients)]

    @property
    def mean(self) -> float:
        return float(self.coefficients[0])

    @property
    def variance(self) -> float:
        return float(np.sum(self.coefficients[1:] ** 2))

    def __call__(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.dim:
            raise DimensionMismatch(f"expected points in R^{self.dim}, got shape {x.shape}")
        tables = [_legendre_table(self.max_degree, x[:, d]) for d in range(self.dim)]
        basis = np.ones((len(self.multi_indices), x.shape[0]))
        for d in range(self.dim):
            basis *= tables[d][self.multi_indices[:, d]]
        return self.coefficients @ basis


def tensor_grid(dim: int, q: int) -> tuple[np.ndarray, np.ndarray]:
    """All ``q**dim`` nodes (C order) and their probability weights."""
    nodes, weights = gauss_legendre_nodes(q)
    idx = np.array(list(itertools.product(range(q), repeat=dim)), dtype=int).reshape(-1, dim)
    return nodes[idx], np.prod(weights[idx] / 2.0, axis=1)


def fit_pce(f: ScalarModel, dim: int, max_degree: int = DEFAULT_DEGREE, points_per_dim: int = DEFAULT_QPOINTS,
            executor=None, max_evaluations: int = DEFAULT_MAX_EVALUATIONS) -> PceExpansion:
    """Project ``f`` onto all total-degree-``max_degree`` Legendre products.

    Uses exactly ``points_per_dim ** dim`` model evaluations.
    """
    if dim < 1:
        raise ConfigError("dim", f"dimension must be >= 1, got {dim}")
    if max_degree < 0:
        raise ConfigError("degree", f"degree must be >= 0, got {max_degree}")
    q = points_per_dim
    if q < max_degree + 1:
        raise ConfigError("qpoints", f"need at least degree + 1 = {max_degree + 1} points per dimension, got {q}")
    total = q ** dim
    if total > max_evaluations:
        raise BudgetExceeded(total, max_evaluations)

    grid, _ = tensor_grid(dim, q)
    values = evaluate_points(f, grid, executor)
    return project_grid(values, dim, max_degree, q)


def project_grid(values, dim: int, max_degree: int, q: int) -> PceExpansion:
    """PCE coefficients from model values on the C-ordered ``q**dim`` tensor grid."""
    values = np.asarray(values, dtype=float)
    if values.size != q ** dim:
        raise DimensionMismatch(f"expected {q ** dim} grid values, got {values.size}")
    if q < max_degree + 1:
        raise ConfigError("qpoints", f"need at least degree + 1 = {max_degree + 1} points per dimension, got {q}")
    nodes, weights = gauss_legendre_nodes(q)
    # proj[k, i] = (w_i / 2) psi_k(node_i); contract one axis at a time
    proj = _legendre_table(max_degree, nodes) * (weights / 2.0)
    coeff = values.reshape((q,) * dim)
    for axis in range(dim):
        coeff = np.moveaxis(np.tensordot(proj, coeff, axes=([1], [axis])), 0, axis)
    alphas = total_degree_indices(dim, max_degree)
    return PceExpansion(dim, max_degree, alphas, coeff[tuple(alphas.T)], values.size)


@dataclass(frozen=True)
class SobolResult:
    first_order: np.ndarray
    total: np.ndarray
    variance: float
    mean: float

    def to_dict(self, names: list[str] | None = None) -> dict:
        names = names or [f"x{i + 1}" for i in range(len(self.first_order))]
        return {
            "mean": self.mean,
            "variance": self.variance,
            "first_order": {k: float(v) for k, v in zip(names, self.first_order)},
            "total": {k: float(v) for k, v in zip(names, self.total)},
        }


def sobol_indices(pce: PceExpansion) -> SobolResult:
    """First-order and total indices from squared PCE coefficients."""
    alphas = pce.multi_indices
    sq = pce.coefficients ** 2
    nonconst = alphas.sum(axis=1) > 0
    variance = float(np.sum(sq[nonconst]))
    # below this the "variance" is quadrature rounding of a constant
    if not variance > (1e-13 * abs(pce.mean)) ** 2:
        raise ZeroVariance("PCE variance is zero; Sobol' indices are undefined")
    active = alphas > 0
    only = active & (active.sum(axis=1, keepdims=True) == 1)
    first = (sq @ only) / variance
    total = (sq @ active) / variance
    return SobolResult(first, total, variance, pce.mean)
