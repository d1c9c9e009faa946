"""Gradient estimation on the normalized hypercube.

Forward finite differences are the main path (``m + 1`` model evaluations
per gradient).  Local linear regression over scattered evaluations is the
fallback when a run budget rules out finite differences.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (ConfigError, DimensionMismatch, InsufficientPoints, ModelFailure,
                     RankDeficient)
from .models import ScalarModel, evaluate_points
from .params import ParameterSpace, sample_uniform

DEFAULT_STEP = 1e-6
SCHEMA = "pvsubspace.samples/1"
RANK_TOL = 1e-10


@dataclass(frozen=True)
class GradientSampleSet:
    points: np.ndarray  # (M, m)
    values: np.ndarray  # (M,)
    grads: np.ndarray  # (M, m)
    seed: int
    fd_step: float
    model_id: str = ""

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        grads = np.asarray(self.grads, dtype=float)
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise DimensionMismatch(f"points must be a non-empty (M, m) array, got shape {pts.shape}")
        if vals.shape != (pts.shape[0],) or grads.shape != pts.shape:
            raise DimensionMismatch(
                f"inconsistent shapes: points {pts.shape}, values {vals.shape}, grads {grads.shape}")
        if np.any(np.abs(pts) > 1.0):
            raise ConfigError("points", "sample points must lie in [-1, 1]^m")
        for name, arr in (("points", pts), ("values", vals), ("grads", grads)):
            if not np.all(np.isfinite(arr)):
                raise ConfigError(name, "all entries must be finite")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "grads", grads)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]

    def metadata(self) -> dict:
        return {"schema": SCHEMA, "m": self.dim, "M": len(self), "seed": self.seed,
                "fd_step": self.fd_step, "model_id": self.model_id}

    def save(self, path: str | Path) -> None:
        """Write ``x1..xm, f, g1..gm`` rows to ``path`` and metadata to a JSON sidecar."""
        path = Path(path)
        m = self.dim
        header = [f"x{i + 1}" for i in range(m)] + ["f"] + [f"g{i + 1}" for i in range(m)]
        with open(path, "w", newline="") as fh:
            fh.write(f"# schema: {SCHEMA}\n")
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for x, f, g in zip(self.points, self.values, self.grads):
                writer.writerow([fmt(v) for v in (*x, f, *g)])
        with open(sidecar_path(path), "w") as fh:
            json.dump(self.metadata(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path: str | Path) -> "GradientSampleSet":
        path = Path(path)
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(line for line in fh if not line.startswith("#"))]
        if not rows:
            raise ConfigError("input", f"{path} is empty")
        header, body = rows[0], rows[1:]
        m = sum(1 for h in header if h.startswith("x"))
        if len(header) != 2 * m + 1 or header[m] != "f":
            raise ConfigError("input", f"{path}: unexpected header {header}")
        data = np.array(body, dtype=float).reshape(len(body), 2 * m + 1)
        meta = {"seed": 0, "fd_step": float("nan"), "model_id": ""}
        side = sidecar_path(path)
        if side.exists():
            with open(side) as fh:
                meta.update(json.load(fh))
        return cls(data[:, :m], data[:, m], data[:, m + 1:], int(meta["seed"]),
                   float(meta["fd_step"]), str(meta["model_id"]))


def fmt(value: float) -> str:
    return f"{value:.17g}"


def sidecar_path(csv_path: Path) -> Path:
    return Path(csv_path).with_suffix(".json")


def fd_stencil(x: np.ndarray, step: float) -> tuple[np.ndarray, np.ndarray]:
    """Base point plus one perturbed copy per coordinate, and the signed steps.

    Coordinates closer than ``step`` to the upper bound are stepped backwards
    so every stencil point stays inside the hypercube.
    """
    x = np.asarray(x, dtype=float)
    signed = np.where(x + step > 1.0, -step, step)
    stencil = np.tile(x, (x.size + 1, 1))
    stencil[1:] += np.diag(signed)
    return stencil, signed


def _difference(values: np.ndarray, signed: np.ndarray) -> np.ndarray:
    return (values[1:] - values[0]) / signed


def fd_gradient(f: ScalarModel, x, step: float = DEFAULT_STEP) -> np.ndarray:
    """First-order finite-difference gradient using exactly ``m + 1`` evaluations."""
    if not 0.0 < step < 0.1:
        raise ConfigError("fd_step", f"step must lie in (0, 0.1), got {step!r}")
    stencil, signed = fd_stencil(x, step)
    try:
        values = evaluate_points(f, stencil)
    except ModelFailure as exc:
        raise ModelFailure(exc.detail, component=exc.sample, cause=exc.cause) from exc
    return _difference(values, signed)


def build_sample_set(f: ScalarModel, space: ParameterSpace, count: int, step: float = DEFAULT_STEP,
                     seed: int = 0, executor=None, model_id: str = "") -> GradientSampleSet:
    """Draw ``count`` uniform points and record ``f`` and its FD gradient at each.

    All ``count * (m + 1)`` stencil evaluations go through one ordered
    :func:`evaluate_points` call, so serial and parallel runs agree exactly.
    """
    if count < 1:
        raise ConfigError("M", f"need at least one sample, got {count}")
    if not 0.0 < step < 0.1:
        raise ConfigError("fd_step", f"step must lie in (0, 0.1), got {step!r}")
    m = space.dim
    points = sample_uniform(space, count, seed)
    stencils, steps = zip(*(fd_stencil(x, step) for x in points))
    flat = np.concatenate(stencils)
    try:
        values = evaluate_points(f, flat, executor)
    except ModelFailure as exc:
        k = exc.sample if exc.sample is not None else 0
        raise ModelFailure(exc.detail, sample=k // (m + 1),
                           component=k % (m + 1) or None, cause=exc.cause) from exc
    values = values.reshape(count, m + 1)
    grads = np.array([_difference(v, s) for v, s in zip(values, steps)])
    return GradientSampleSet(points, values[:, 0].copy(), grads, seed, step,
                             model_id or getattr(f, "model_id", ""))


def local_linear_gradient(points, values, x, neighbors: int | None = None) -> np.ndarray:
    """Gradient of the least-squares affine fit to the nearest ``neighbors`` pairs.

    Distances are Euclidean in normalized coordinates.  The default neighbor
    count is ``2 (m + 1)``.
    """
    points = np.asarray(points, dtype=float)
    values = np.asarray(values, dtype=float)
    x = np.asarray(x, dtype=float)
    if points.ndim != 2 or values.shape != (points.shape[0],) or x.shape != (points.shape[1],):
        raise DimensionMismatch(
            f"shapes points {points.shape}, values {values.shape}, x {x.shape} are inconsistent")
    m = points.shape[1]
    if neighbors is None:
        neighbors = 2 * (m + 1)
    if neighbors < m + 1:
        raise InsufficientPoints(f"an affine fit in {m} dimensions needs >= {m + 1} neighbors, got {neighbors}")
    if len(points) < neighbors:
        raise InsufficientPoints(f"{neighbors} neighbors requested but only {len(points)} pairs given")

    dist = np.linalg.norm(points - x, axis=1)
    idx = np.argsort(dist, kind="stable")[:neighbors]
    X = points[idx]
    y = values[idx]
    Xc = X - X.mean(axis=0)
    yc = y - y.mean()
    u, s, vt = np.linalg.svd(Xc, full_matrices=False)
    if s[0] == 0.0 or s[-1] <= RANK_TOL * s[0]:
        raise RankDeficient(f"selected points do not affinely span R^{m} "
                            f"(singular values {s[-1]:.3g} / {s[0]:.3g})")
    return vt.T @ ((u.T @ yc) / s)
