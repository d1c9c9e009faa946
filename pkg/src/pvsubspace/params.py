"""Physical parameter spaces and their map onto the normalized hypercube.

A :class:`ParameterSpace` is an ordered list of bounded parameters, each
either linear or natural-log transformed.  ``normalize`` sends a physical
point to ``[-1, 1]^m`` and ``denormalize`` inverts it.  Uniform sampling on
the hypercube is counter based: sample ``i`` depends only on ``(seed, i)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConfigError, DimensionMismatch, NonPositiveLogInput, OutOfBounds

# Philox counter word 3 separates independent random streams.
STREAM_SAMPLES = 0
STREAM_BOOTSTRAP = 1
STREAM_CLOUD = 2

_UINT53_SCALE = 2.0 ** -53


class Transform(str, Enum):
    LINEAR = "linear"
    LOG = "log"

    @classmethod
    def parse(cls, value: str) -> "Transform":
        key = value.strip().lower()
        if key in ("log", "ln", "naturallog", "natural_log"):
            return cls.LOG
        if key == "linear":
            return cls.LINEAR
        raise ConfigError("transform", f"unknown transform {value!r}")


@dataclass(frozen=True)
class ParameterDef:
    name: str
    lower: float
    upper: float
    transform: Transform = Transform.LINEAR

    def __post_init__(self):
        if not self.name:
            raise ConfigError("name", "parameter name must be non-empty")
        if not (math.isfinite(self.lower) and math.isfinite(self.upper)):
            raise ConfigError(self.name, "bounds must be finite")
        if not self.lower < self.upper:
            raise ConfigError(self.name, f"lower bound {self.lower} must be < upper bound {self.upper}")
        if self.transform is Transform.LOG and self.lower <= 0:
            raise ConfigError(self.name, "log-transformed parameter needs a positive lower bound")

    @property
    def transformed_bounds(self) -> tuple[float, float]:
        if self.transform is Transform.LOG:
            return math.log(self.lower), math.log(self.upper)
        return self.lower, self.upper

    def to_dict(self) -> dict:
        return {"name": self.name, "lower": self.lower, "upper": self.upper,
                "transform": self.transform.value}


@dataclass(frozen=True)
class ParameterSpace:
    params: tuple[ParameterDef, ...]

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(self.params))
        if not self.params:
            raise ConfigError("params", "a parameter space needs at least one parameter")
        names = [p.name for p in self.params]
        if len(set(names)) != len(names):
            raise ConfigError("params", f"duplicate parameter names in {names}")

    @property
    def dim(self) -> int:
        return len(self.params)

    @property
    def names(self) -> list[str]:
        return [p.name for p in self.params]

    def to_dict(self) -> dict:
        return {"params": [p.to_dict() for p in self.params]}

    @classmethod
    def from_dict(cls, doc: dict) -> "ParameterSpace":
        try:
            entries = doc["params"]
            params = [
                ParameterDef(
                    name=str(e["name"]),
                    lower=float(e["lower"]),
                    upper=float(e["upper"]),
                    transform=Transform.parse(e.get("transform", "linear")),
                )
                for e in entries
            ]
        except (KeyError, TypeError) as exc:
            raise ConfigError("params", f"malformed parameter space document: {exc}") from exc
        return cls(tuple(params))


def load_space(source: str | Path) -> ParameterSpace:
    """Return a preset by name, or read a parameter-space JSON file."""
    key = str(source)
    if key in PRESETS:
        return PRESETS[key]
    path = Path(source)
    if not path.exists():
        raise ConfigError("space", f"{key!r} is neither a preset ({', '.join(PRESETS)}) nor a file")
    with open(path) as fh:
        return ParameterSpace.from_dict(json.load(fh))


def normalize(space: ParameterSpace, physical: Sequence[float]) -> np.ndarray:
    """Map a physical point onto ``[-1, 1]^m``.

    Component ``i`` is ``2 (t(p_i) - L_i) / (U_i - L_i) - 1`` where ``t`` is
    the identity or ``log`` and ``L_i, U_i`` are the transformed bounds.
    Bounds are inclusive and map to exactly -1 and +1.
    """
    p = np.asarray(physical, dtype=float)
    if p.shape != (space.dim,):
        raise DimensionMismatch(f"expected {space.dim} physical values, got shape {p.shape}")
    x = np.empty(space.dim)
    for i, (value, par) in enumerate(zip(p, space.params)):
        if par.transform is Transform.LOG and not value > 0:
            raise NonPositiveLogInput(par.name, float(value))
        if not par.lower <= value <= par.upper:
            raise OutOfBounds(par.name, float(value), par.lower, par.upper)
        lo, hi = par.transformed_bounds
        t = math.log(value) if par.transform is Transform.LOG else float(value)
        x[i] = 2.0 * (t - lo) / (hi - lo) - 1.0
    return np.clip(x, -1.0, 1.0)


def denormalize(space: ParameterSpace, x: Sequence[float]) -> np.ndarray:
    """Inverse of :func:`normalize`; log parameters are exponentiated back."""
    x = np.asarray(x, dtype=float)
    if x.shape != (space.dim,):
        raise DimensionMismatch(f"expected {space.dim} normalized values, got shape {x.shape}")
    out = np.empty(space.dim)
    for i, (xi, par) in enumerate(zip(x, space.params)):
        if not -1.0 <= xi <= 1.0:
            raise OutOfBounds(par.name, float(xi), -1.0, 1.0)
        if xi == -1.0 or xi == 1.0:
            out[i] = par.lower if xi < 0 else par.upper
            continue
        lo, hi = par.transformed_bounds
        # written so that x = -1, 0, +1 hit lo, midpoint, hi exactly
        t = 0.5 * ((1.0 - xi) * lo + (1.0 + xi) * hi)
        if par.transform is Transform.LOG:
            t = math.exp(t)
        out[i] = min(max(t, par.lower), par.upper)
    return out


def uniform_block(seed: int, start: int, count: int, dim: int, stream: int = STREAM_SAMPLES) -> np.ndarray:
    """Uniform ``[0, 1)`` numbers for rows ``start .. start+count-1``.

    Row ``i`` is read from Philox blocks keyed by ``(seed, i, stream)``, so it
    does not depend on ``start`` or ``count``.
    """
    if seed < 0:
        raise ConfigError("seed", "seed must be a non-negative integer")
    blocks = -(-dim // 4)
    bitgen = np.random.Philox(key=seed, counter=[start * blocks, 0, 0, stream])
    raw = bitgen.random_raw(count * blocks * 4).reshape(count, blocks * 4)[:, :dim]
    return (raw >> np.uint64(11)).astype(float) * _UINT53_SCALE


def sample_uniform(space: ParameterSpace, count: int, seed: int, start: int = 0) -> np.ndarray:
    """``count`` i.i.d. uniform points on ``[-1, 1]^m`` as a ``(count, m)`` array."""
    if count < 1:
        raise ConfigError("count", f"need at least one sample, got {count}")
    return 2.0 * uniform_block(seed, start, count, space.dim) - 1.0


DIODE_SI_2CM2 = ParameterSpace((
    ParameterDef("Isc", 0.05989, 0.23958),
    ParameterDef("Is", 2.2e-11, 2.2e-7, Transform.LOG),
    ParameterDef("n", 1.0, 2.0),
    ParameterDef("Rs", 0.16625, 0.66500),
    ParameterDef("Rp", 93.75, 375.00),
))

PRESETS = {"diode-si-2cm2": DIODE_SI_2CM2}
