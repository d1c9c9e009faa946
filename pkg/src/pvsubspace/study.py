"""End-to-end study: samples -> subspace -> bootstrap -> summary plots -> Sobol'.

Every artifact is written into a staging directory next to the output
directory and moved into place only after all stages succeed, so a failed
run leaves no partial results behind.
"""

from __future__ import annotations

import contextlib
import csv
import json
import math
import os
import shutil
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .bootstrap import bootstrap_subspace, replicate_summary_cloud
from .diode import DiodeConstants, DiodePmaxModel
from .errors import ConfigError, PVSubspaceError
from .gradients import DEFAULT_STEP, GradientSampleSet, build_sample_set, fmt
from .models import load_external_model
from .params import PRESETS, ParameterSpace, load_space
from .sobol import fit_pce, sobol_indices
from .subspace import SubspaceEstimate, estimate_c_matrix, partition, suggest_gap, summary_plot_data

SCHEMA_VERSION = 1


@dataclass
class SobolConfig:
    enabled: bool = True
    degree: int = 5
    qpoints: int = 8


@dataclass
class StudyConfig:
    model: str = "diode-si-2cm2"
    model_command: list[str] | None = None
    space: str | None = None
    M: int = 1000
    fd_step: float = DEFAULT_STEP
    bootstrap: int = 1000
    level: float = 0.99
    n: int | str = "auto"
    seed: int = 0
    sobol: SobolConfig = field(default_factory=SobolConfig)
    cloud_replicates: int = 20
    summary_points: int = 100
    output_dir: str = "study-out"
    threads: int = 1
    v_th: float | None = None
    gnuplot: bool = False

    @classmethod
    def from_dict(cls, doc: dict) -> "StudyConfig":
        doc = dict(doc)
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(doc) - known)
        if unknown:
            raise ConfigError(unknown[0], "unknown configuration key")
        sob = doc.pop("sobol", None)
        cfg = cls(**doc)
        if sob is not None:
            if not isinstance(sob, dict):
                raise ConfigError("sobol", "must be an object with enabled/degree/qpoints")
            bad = sorted(set(sob) - {"enabled", "degree", "qpoints"})
            if bad:
                raise ConfigError(f"sobol.{bad[0]}", "unknown configuration key")
            cfg.sobol = SobolConfig(**sob)
        return cfg

    @classmethod
    def load(cls, path: str | Path) -> "StudyConfig":
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError("config", f"cannot read {path}: {exc}") from exc
        return cls.from_dict(doc)

    def validate(self) -> "StudyConfig":
        def positive_int(name, value):
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise ConfigError(name, f"must be a positive integer, got {value!r}")

        for name in ("M", "bootstrap", "cloud_replicates", "summary_points", "threads"):
            positive_int(name, getattr(self, name))
        if isinstance(self.sobol.degree, bool) or not isinstance(self.sobol.degree, int) or self.sobol.degree < 0:
            raise ConfigError("sobol.degree", f"must be a non-negative integer, got {self.sobol.degree!r}")
        positive_int("sobol.qpoints", self.sobol.qpoints)
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError("seed", f"must be a non-negative integer, got {self.seed!r}")
        if not (isinstance(self.fd_step, (int, float)) and 0.0 < self.fd_step < 0.1):
            raise ConfigError("fd_step", f"must lie in (0, 0.1), got {self.fd_step!r}")
        if not (isinstance(self.level, (int, float)) and 0.0 < self.level < 1.0):
            raise ConfigError("level", f"must lie in (0, 1), got {self.level!r}")
        if self.n != "auto" and (isinstance(self.n, bool) or not isinstance(self.n, int) or self.n < 1):
            raise ConfigError("n", f"must be a positive integer or 'auto', got {self.n!r}")
        if self.bootstrap and self.M < 2:
            raise ConfigError("M", "bootstrap needs at least two gradient samples")
        if self.v_th is not None and not (isinstance(self.v_th, (int, float)) and self.v_th > 0):
            raise ConfigError("v_th", f"must be positive, got {self.v_th!r}")
        if self.model_command is None and self.model not in PRESETS:
            raise ConfigError("model", f"unknown preset {self.model!r}; known: {', '.join(PRESETS)}")
        if self.model_command is not None and not self.space:
            raise ConfigError("space", "an external model needs a parameter space (preset or JSON file)")
        space = self.parameter_space()
        if self.n != "auto" and not self.n < space.dim:
            raise ConfigError("n", f"must be < m = {space.dim}, got {self.n}")
        if self.sobol.enabled and self.sobol.qpoints < self.sobol.degree + 1:
            raise ConfigError("sobol.qpoints", "must be at least sobol.degree + 1")
        return self

    def parameter_space(self) -> ParameterSpace:
        return load_space(self.space if self.space else self.model)

    def build_model(self):
        if self.model_command is not None:
            return load_external_model(self.model_command)
        constants = DiodeConstants() if self.v_th is None else DiodeConstants(v_th=float(self.v_th))
        return DiodePmaxModel(self.parameter_space(), constants, self.model)

    def to_dict(self) -> dict:
        return asdict(self)


# -- artifact writers ---------------------------------------------------------

def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        value = float(obj)
        return value if math.isfinite(value) else str(value)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def write_json(path: Path, obj: dict) -> None:
    with open(path, "w") as fh:
        json.dump(_plain(obj), fh, indent=2)
        fh.write("\n")


def write_csv(path: Path, schema: str, header: list[str], rows, int_columns: int = 0) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# schema: {schema}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([str(int(v)) for v in row[:int_columns]] + [fmt(v) for v in row[int_columns:]])


def subspace_record(est: SubspaceEstimate, names: list[str], n: int, suggested: tuple[int, float]) -> dict:
    return {
        "schema": "pvsubspace.subspace/1",
        "parameters": names,
        "eigenvalues": est.eigenvalues,
        "eigenvectors": est.eigenvectors.T,  # one row per eigenvector
        "n": n,
        "suggested_n": suggested[0],
        "gap_ratio": suggested[1],
    }


def y_header(k: int) -> list[str]:
    return [f"y{i + 1}" for i in range(k)]


def summary_outputs(samples: GradientSampleSet, est: SubspaceEstimate, n: int, count: int):
    part = partition(est, n)
    k = min(count, len(samples))
    plot = summary_plot_data(part, samples.points[:k], samples.values[:k], min(2, n))
    return part, k, plot


GNUPLOT_TEMPLATE = """\
# gnuplot script for the study artifacts; run with `gnuplot plots.gp`
set datafile separator ','
set datafile commentschars '#'
set key autotitle columnhead
set terminal pngcairo size 800,600
set output 'summary_plot.png'
set xlabel 'active variable 1'
set ylabel 'f'
plot 'summary_plot.csv' using 1:{fcol} with points pt 7 notitle
set output 'replicate_cloud.png'
plot 'replicate_cloud.csv' using 3:{ccol} with points pt 7 ps 0.5 notitle
"""


@contextlib.contextmanager
def stage(name: str):
    try:
        yield
    except PVSubspaceError as exc:
        if not hasattr(exc, "stage"):
            exc.stage = name
        raise


def run_study(cfg: StudyConfig) -> dict:
    """Run every stage and write the artifact set into ``cfg.output_dir``."""
    with stage("config"):
        cfg.validate()
        space = cfg.parameter_space()
        model = cfg.build_model()
    out_dir = Path(cfg.output_dir)
    out_dir.parent.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(prefix=f".{out_dir.name}.partial-", dir=out_dir.parent))
    started = time.perf_counter()
    timings = {}
    executor = ProcessPoolExecutor(cfg.threads) if cfg.threads > 1 and cfg.model_command is None else None
    try:
        m = space.dim
        with stage("sample"):
            t0 = time.perf_counter()
            samples = build_sample_set(model, space, cfg.M, cfg.fd_step, cfg.seed, executor,
                                       model_id=cfg.model if cfg.model_command is None
                                       else model.model_id)
            samples.save(staging / "samples.csv")
            timings["sample"] = time.perf_counter() - t0
        with stage("subspace"):
            t0 = time.perf_counter()
            est = estimate_c_matrix(samples)
            suggested = suggest_gap(est.eigenvalues)
            n = suggested[0] if cfg.n == "auto" else int(cfg.n)
            record = subspace_record(est, space.names, n, suggested)
            part, k, plot = summary_outputs(samples, est, n, cfg.summary_points)
            write_csv(staging / "summary_plot.csv", "pvsubspace.summary_plot/1",
                      y_header(plot.shape[1] - 1) + ["f"], plot)
            timings["subspace"] = time.perf_counter() - t0
        with stage("bootstrap"):
            t0 = time.perf_counter()
            boot = bootstrap_subspace(samples, n, cfg.bootstrap, cfg.level, cfg.seed)
            record.update(boot.to_dict())
            cloud = replicate_summary_cloud(samples, part, cfg.cloud_replicates,
                                            samples.points[:k], samples.values[:k], cfg.seed)
            write_csv(staging / "replicate_cloud.csv", "pvsubspace.replicate_cloud/1",
                      ["sample", "replicate"] + y_header(cloud.shape[1] - 3) + ["f"], cloud, int_columns=2)
            write_json(staging / "subspace.json", record)
            timings["bootstrap"] = time.perf_counter() - t0
        evaluations = {"gradient": len(samples) * (m + 1)}
        if cfg.sobol.enabled:
            with stage("sobol"):
                t0 = time.perf_counter()
                pce = fit_pce(model, m, cfg.sobol.degree, cfg.sobol.qpoints, executor)
                result = sobol_indices(pce)
                write_json(staging / "sobol.json", {"schema": "pvsubspace.sobol/1",
                                                    "degree": cfg.sobol.degree, "qpoints": cfg.sobol.qpoints,
                                                    **result.to_dict(space.names)})
                evaluations["sobol"] = pce.evaluations
                timings["sobol"] = time.perf_counter() - t0
        if cfg.gnuplot:
            (staging / "plots.gp").write_text(GNUPLOT_TEMPLATE.format(fcol=plot.shape[1],
                                                                      ccol=cloud.shape[1]))
        study = {
            "schema": "pvsubspace.study/1",
            "config": cfg.to_dict(),
            "parameters": space.to_dict()["params"],
            "m": m,
            "n": n,
            "evaluations": evaluations,
        }
        write_json(staging / "study.json", study)
        timings["total"] = time.perf_counter() - started
        write_json(staging / "timing.json", {"schema": "pvsubspace.timing/1", "wall_seconds": timings})

        out_dir.mkdir(parents=True, exist_ok=True)
        for path in sorted(staging.iterdir()):
            os.replace(path, out_dir / path.name)
        return study
    finally:
        if executor is not None:
            executor.shutdown()
        shutil.rmtree(staging, ignore_errors=True)
