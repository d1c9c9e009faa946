"""Command-line interface.

Subcommands: ``sample``, ``subspace``, ``sobol``, ``pmax``, ``iv-curve`` and
``study``.  Exit codes: 0 success, 2 configuration error, 3 model failure,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import shlex
import sys
from pathlib import Path

from .bootstrap import bootstrap_subspace, replicate_summary_cloud
from .diode import DiodeConstants, DiodeParams, DiodePmaxModel, iv_curve, p_max
from .errors import ConfigError, ModelFailure, NumericalError, PVSubspaceError
from .gradients import DEFAULT_STEP, GradientSampleSet, build_sample_set, fmt
from .models import load_external_model
from .params import PRESETS, load_space
from .sobol import fit_pce, sobol_indices
from .study import (StudyConfig, _plain, run_study, subspace_record, summary_outputs, write_csv,
                    y_header)
from .subspace import estimate_c_matrix, suggest_gap

__all__ = ["main", "load_external_model"]


def _common(parser: argparse.ArgumentParser, suppress: bool) -> None:
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", default=default, help="study configuration JSON")
    parser.add_argument("--seed", type=int, default=default)
    parser.add_argument("--out-dir", default=default)
    parser.add_argument("--threads", type=int, default=default, help="worker processes for model evaluations")


def _model_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--preset", default=None, help=f"built-in model ({', '.join(PRESETS)})")
    parser.add_argument("--space", default=None, help="parameter space: preset name or JSON file")
    parser.add_argument("--model-cmd", default=None,
                        help="external model command (reads points on stdin, writes values on stdout)")
    parser.add_argument("--v-th", type=float, default=None, help="thermal voltage override (volts)")


def _diode_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--isc", type=float)
    parser.add_argument("--is", dest="i_s", type=float)
    parser.add_argument("--n", type=float)
    parser.add_argument("--rs", type=float)
    parser.add_argument("--rp", type=float)
    parser.add_argument("--preset", default=None, help="preset used with --point")
    parser.add_argument("--point", default=None, help="normalized point, comma separated")
    parser.add_argument("--v-th", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pvsubspace", description=__doc__.splitlines()[0])
    _common(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="draw gradient samples and write samples.csv")
    _common(p, suppress=True)
    _model_args(p)
    p.add_argument("--M", type=int, default=1000)
    p.add_argument("--fd-step", type=float, default=DEFAULT_STEP)

    p = sub.add_parser("subspace", help="estimate the active subspace from samples.csv")
    _common(p, suppress=True)
    p.add_argument("--input", required=True)
    p.add_argument("--space", default=None, help="parameter names from this preset or JSON file")
    p.add_argument("--n", default="auto", help="active dimension or 'auto'")
    p.add_argument("--bootstrap", type=int, default=0, help="number of bootstrap replicates")
    p.add_argument("--level", type=float, default=0.99)
    p.add_argument("--cloud-replicates", type=int, default=20)
    p.add_argument("--summary-points", type=int, default=100)

    p = sub.add_parser("sobol", help="Sobol' indices via polynomial chaos")
    _common(p, suppress=True)
    _model_args(p)
    p.add_argument("--degree", type=int, default=5)
    p.add_argument("--qpoints", type=int, default=8)

    p = sub.add_parser("pmax", help="maximum power of one diode")
    _common(p, suppress=True)
    _diode_args(p)

    p = sub.add_parser("iv-curve", help="I-V curve of one diode as CSV")
    _common(p, suppress=True)
    _diode_args(p)
    p.add_argument("--points", type=int, default=100)
    p.add_argument("--output", default=None, help="write CSV here instead of stdout")

    p = sub.add_parser("study", help="run the full pipeline")
    _common(p, suppress=True)
    _model_args(p)
    p.add_argument("--M", type=int, default=None)
    p.add_argument("--bootstrap", type=int, default=None)
    p.add_argument("--n", default=None)
    p.add_argument("--no-sobol", action="store_true")
    p.add_argument("--gnuplot", action="store_true", help="also write a gnuplot script")
    return parser


def _emit_json(obj) -> None:
    json.dump(_plain(obj), sys.stdout, indent=2)
    sys.stdout.write("\n")


def _parse_n(value):
    if value is None or value == "auto":
        return value
    try:
        return int(value)
    except ValueError:
        raise ConfigError("n", f"must be an integer or 'auto', got {value!r}") from None


def _constants(args) -> DiodeConstants:
    return DiodeConstants() if args.v_th is None else DiodeConstants(v_th=args.v_th)


def _model_and_space(args):
    if args.model_cmd:
        if not args.space:
            raise ConfigError("space", "--model-cmd needs --space")
        model = load_external_model(args.model_cmd)
        return model, load_space(args.space), model.model_id
    preset = args.preset or "diode-si-2cm2"
    if preset not in PRESETS:
        raise ConfigError("preset", f"unknown preset {preset!r}")
    space = load_space(args.space or preset)
    return DiodePmaxModel(space, _constants(args), preset), space, preset


def _diode_params(args) -> DiodeParams:
    physical = [args.isc, args.i_s, args.n, args.rs, args.rp]
    if args.point is not None:
        space = load_space(args.preset or "diode-si-2cm2")
        try:
            x = [float(v) for v in args.point.split(",")]
        except ValueError:
            raise ConfigError("point", f"cannot parse {args.point!r}") from None
        return DiodeParams.from_normalized(x, space)
    if any(v is None for v in physical):
        raise ConfigError("isc/is/n/rs/rp", "give all five physical inputs or --point")
    return DiodeParams.from_vector(physical)


def _executor(threads):
    if threads and threads > 1:
        from concurrent.futures import ProcessPoolExecutor
        return ProcessPoolExecutor(threads)
    return None


def cmd_sample(args) -> None:
    model, space, model_id = _model_and_space(args)
    out = Path(args.out_dir or ".")
    executor = None if args.model_cmd else _executor(args.threads)
    try:
        samples = build_sample_set(model, space, args.M, args.fd_step, args.seed or 0, executor, model_id)
    finally:
        if executor is not None:
            executor.shutdown()
    out.mkdir(parents=True, exist_ok=True)
    samples.save(out / "samples.csv")
    _emit_json({"samples": str(out / "samples.csv"), "M": len(samples), "m": samples.dim,
                "evaluations": len(samples) * (samples.dim + 1)})


def cmd_subspace(args) -> None:
    samples = GradientSampleSet.load(args.input)
    est = estimate_c_matrix(samples)
    suggested = suggest_gap(est.eigenvalues)
    n = _parse_n(args.n)
    n = suggested[0] if n == "auto" else n
    if args.space:
        names = load_space(args.space).names
    elif samples.model_id in PRESETS:
        names = PRESETS[samples.model_id].names
    else:
        names = [f"x{i + 1}" for i in range(samples.dim)]
    if len(names) != samples.dim:
        raise ConfigError("space", f"{len(names)} names for {samples.dim}-dimensional samples")
    record = subspace_record(est, names, n, suggested)
    out = Path(args.out_dir or ".")
    out.mkdir(parents=True, exist_ok=True)
    part, k, plot = summary_outputs(samples, est, n, args.summary_points)
    write_csv(out / "summary_plot.csv", "pvsubspace.summary_plot/1", y_header(plot.shape[1] - 1) + ["f"], plot)
    if args.bootstrap:
        seed = args.seed if args.seed is not None else samples.seed
        boot = bootstrap_subspace(samples, n, args.bootstrap, args.level, seed)
        record.update(boot.to_dict())
        cloud = replicate_summary_cloud(samples, part, args.cloud_replicates, samples.points[:k],
                                        samples.values[:k], seed)
        write_csv(out / "replicate_cloud.csv", "pvsubspace.replicate_cloud/1",
                  ["sample", "replicate"] + y_header(cloud.shape[1] - 3) + ["f"], cloud, int_columns=2)
    _emit_json(record)


def cmd_sobol(args) -> None:
    model, space, _ = _model_and_space(args)
    executor = None if args.model_cmd else _executor(args.threads)
    try:
        pce = fit_pce(model, space.dim, args.degree, args.qpoints, executor)
    finally:
        if executor is not None:
            executor.shutdown()
    result = sobol_indices(pce)
    _emit_json({"schema": "pvsubspace.sobol/1", **result.to_dict(space.names), "evaluations": pce.evaluations})


def cmd_pmax(args) -> None:
    _emit_json(p_max(_diode_params(args), _constants(args)).to_dict())


def cmd_iv_curve(args) -> None:
    curve = iv_curve(_diode_params(args), _constants(args), args.points)
    lines = ["# schema: pvsubspace.iv_curve/1", "v_volts,i_amps"]
    lines += [f"{fmt(pt.v)},{fmt(pt.i)}" for pt in curve]
    text = "\n".join(lines) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_study(args) -> None:
    cfg = StudyConfig.load(args.config) if args.config else StudyConfig()
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out_dir is not None:
        cfg.output_dir = args.out_dir
    if args.threads is not None:
        cfg.threads = args.threads
    if args.preset is not None:
        cfg.model = args.preset
    if args.space is not None:
        cfg.space = args.space
    if args.model_cmd is not None:
        cfg.model_command = shlex.split(args.model_cmd)
    if args.v_th is not None:
        cfg.v_th = args.v_th
    if args.M is not None:
        cfg.M = args.M
    if args.bootstrap is not None:
        cfg.bootstrap = args.bootstrap
    if args.n is not None:
        cfg.n = _parse_n(args.n)
    if args.no_sobol:
        cfg.sobol.enabled = False
    if args.gnuplot:
        cfg.gnuplot = True
    study = run_study(cfg)
    _emit_json({"output_dir": cfg.output_dir, "n": study["n"], "evaluations": study["evaluations"]})


COMMANDS = {
    "sample": cmd_sample,
    "subspace": cmd_subspace,
    "sobol": cmd_sobol,
    "pmax": cmd_pmax,
    "iv-curve": cmd_iv_curve,
    "study": cmd_study,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except PVSubspaceError as exc:
        if isinstance(exc, ConfigError):
            code = 2
        elif isinstance(exc, ModelFailure):
            code = 3
        elif isinstance(exc, NumericalError):
            code = 4
        else:
            code = exc.exit_code
        error = {"stage": getattr(exc, "stage", args.command), "error": type(exc).__name__, "cause": str(exc)}
        json.dump(error, sys.stderr)
        sys.stderr.write("\n")
        return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
