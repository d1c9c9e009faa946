"""Scalar models and how batches of points get evaluated.

A model is any callable ``f(x) -> float`` on a normalized point.  Models may
also expose ``evaluate_batch(points)`` (used by subprocess models, which pay
a process launch per batch).  :func:`evaluate_points` is the single place
where points are fanned out, optionally through an executor, and results
come back in input order.
"""

from __future__ import annotations

import shlex
import subprocess
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ChildFailure, ModelFailure, ParseFailure

ScalarModel = Callable[[np.ndarray], float]


class _Failed:
    __slots__ = ("error",)

    def __init__(self, error):
        self.error = error


def _guarded_call(f: ScalarModel, x: np.ndarray):
    try:
        return float(f(x))
    except Exception as exc:  # noqa: BLE001 - the failing index is reported by the caller
        return _Failed(exc)


def evaluate_points(f: ScalarModel, points: np.ndarray, executor=None, chunksize: int = 64) -> np.ndarray:
    """Evaluate ``f`` at each row of ``points`` and return values in row order.

    Raises :class:`ModelFailure` with ``sample`` set to the first failing row.
    """
    points = np.asarray(points, dtype=float)
    batch = getattr(f, "evaluate_batch", None)
    if batch is not None:
        values = np.asarray(batch(points), dtype=float)
    else:
        if executor is None:
            results = [_guarded_call(f, x) for x in points]
        else:
            results = list(executor.map(_guarded_call, [f] * len(points), points, chunksize=chunksize))
        values = np.empty(len(points))
        for k, r in enumerate(results):
            if isinstance(r, _Failed):
                raise ModelFailure(f"model raised {type(r.error).__name__}: {r.error}",
                                   sample=k, cause=r.error) from r.error
            values[k] = r
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        raise ModelFailure(f"model returned non-finite value {values[bad[0]]!r}", sample=int(bad[0]))
    return values


@dataclass
class CountingModel:
    """Wraps a model and counts evaluations made through it (in this process)."""

    model: ScalarModel
    count: int = 0

    def __call__(self, x):
        self.count += 1
        return self.model(x)

    def evaluate_many(self, points: np.ndarray, executor=None) -> np.ndarray:
        values = evaluate_points(self.model, points, executor)
        self.count += len(points)
        return values


def format_point(x: Sequence[float]) -> str:
    return " ".join(f"{v:.17g}" for v in x)


@dataclass
class ExternalModel:
    """Model computed by a child process.

    Protocol: the child reads one point per line (space-separated decimals)
    from stdin and writes one decimal per line to stdout, in order.  One
    child is launched per batch.
    """

    command: list[str]
    timeout: float | None = None
    evaluations: int = field(default=0, init=False)

    @property
    def model_id(self) -> str:
        return "external:" + " ".join(self.command)

    def evaluate_batch(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        payload = "".join(format_point(x) + "\n" for x in points)
        try:
            proc = subprocess.run(self.command, input=payload, capture_output=True, text=True,
                                  timeout=self.timeout)
        except OSError as exc:
            raise ChildFailure(-1, str(exc), point_index=0) from exc
        lines = [ln for ln in proc.stdout.splitlines() if ln.strip()]
        values = []
        for k, line in enumerate(lines):
            try:
                values.append(float(line.strip()))
            except ValueError:
                raise ParseFailure(k + 1, line) from None
        if proc.returncode != 0:
            raise ChildFailure(proc.returncode, proc.stderr, point_index=len(values))
        if len(values) != len(points):
            raise ChildFailure(proc.returncode,
                               f"expected {len(points)} output lines, got {len(values)}",
                               point_index=len(values))
        self.evaluations += len(points)
        return np.array(values)

    def __call__(self, x) -> float:
        return float(self.evaluate_batch(np.asarray(x, dtype=float)[None, :])[0])


def load_external_model(command: str | Sequence[str], timeout: float | None = None) -> ExternalModel:
    if isinstance(command, str):
        command = shlex.split(command)
    return ExternalModel(list(command), timeout)

