"""Command-line entry point.

Subcommands:

* ``simulate``         one transmission run from a JSON config
* ``spectral``         T/R table, bound states and resonance verdict for a potential
* ``study``            velocity-scaling study (the main experiment)
* ``check``            deterministic invariant suite, table of pass/fail
* ``potential-report`` admissibility report for a potential

Exit codes: 0 success, 1 invalid input, 2 acceptance/scaling failure,
3 numerical breakdown, 4 invalid run (edge-mass gate). The environment
variable SOLITONLAB_OUT_DIR overrides the default output directory when no
--out flag is given.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import AccuracyError, ConfigError, InvalidRunError, NumericalBreakdownError
from .experiments import ExperimentConfig, RunReport, scaling_study, transmission_run
from .grid import make_grid, save_field
from .potentials import PotentialSpec, check_admissibility
from .reporting import RunManifest, svg_line_plot, write_json
from .scattering import build_spectral_report
from . import checks

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_CRITERION = 2
EXIT_BREAKDOWN = 3
EXIT_INVALID_RUN = 4


def _out_dir(args, config: dict | None, default: str) -> Path:
    if args.out:
        path = Path(args.out)
    elif os.environ.get("SOLITONLAB_OUT_DIR"):
        path = Path(os.environ["SOLITONLAB_OUT_DIR"])
    elif config and config.get("out_dir"):
        path = Path(config["out_dir"])
    else:
        path = Path(default)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc


def _potential_from_args(args) -> PotentialSpec:
    d = {"kind": args.kind}
    for key in ("q", "s", "sigma", "beta", "ell", "center"):
        val = getattr(args, key, None)
        if val is not None:
            d[key] = val
    return PotentialSpec.from_dict(d)


def _write_run_outputs(report: RunReport, out: Path, manifest: RunManifest) -> None:
    series_path = out / "series.csv"
    report.series.to_csv(series_path)
    manifest.add_output(series_path)
    report_path = out / "report.json"
    write_json(report_path, report.to_dict())
    manifest.add_output(report_path)
    field_path = out / "final_field.bin"
    save_field(report.final, field_path)
    manifest.add_output(field_path)
    svg_path = out / "summary.svg"
    svg_line_plot(
        svg_path,
        [(report.series.times, report.series.err_l2, "||u - u1||_L2")],
        title=f"transmission error, v={report.plan.v:g}",
        xlabel="t",
        ylabel="L2 error",
        logy=bool(np.any(report.series.err_l2 > 0)),
    )
    manifest.add_output(svg_path)


def cmd_simulate(args) -> int:
    raw = _load_config(args.config)
    config = ExperimentConfig.from_dict(raw)
    if "v" in raw:
        v = float(raw["v"])
    elif len(config.velocities) == 1:
        v = config.velocities[0]
    else:
        raise ConfigError("simulate needs a single 'v' (or a one-entry 'velocities' list)")
    out = _out_dir(args, raw, "runs/simulate")
    manifest = RunManifest(config=raw, tool_version=__version__)
    manifest_path = out / "manifest.json"
    manifest.write(manifest_path)
    try:
        report = transmission_run(
            config,
            v,
            x0=float(raw["x0"]) if "x0" in raw else None,
            dt=float(raw["dt"]) if "dt" in raw else None,
        )
    except (NumericalBreakdownError, AccuracyError) as exc:
        manifest.finalize(manifest_path, "breakdown", error=str(exc))
        raise
    except InvalidRunError as exc:
        manifest.finalize(manifest_path, "invalid", error=str(exc))
        raise
    _write_run_outputs(report, out, manifest)
    manifest.add_output(manifest_path)
    manifest.finalize(
        manifest_path,
        "complete" if report.valid else "invalid",
        valid=report.valid,
        sup_error=report.sup_error,
        invalid_reason=report.invalid_reason,
    )
    if not report.valid:
        print(f"invalid run: {report.invalid_reason}", file=sys.stderr)
        return EXIT_INVALID_RUN
    print(f"v={v:g}: sup ||u-u1|| = {report.sup_error:.6e} over [0, {report.plan.t_end:.4g}] -> {out}")
    return EXIT_OK


def cmd_spectral(args) -> int:
    spec = _potential_from_args(args)
    half = args.half_width
    grid = make_grid(spec.center - half, spec.center + half, args.n)
    if args.linear:
        lams = np.linspace(args.lambda_min, args.lambda_max, args.lambda_points)
    else:
        lams = np.geomspace(args.lambda_min, args.lambda_max, args.lambda_points)
    out = _out_dir(args, None, "runs/spectral")
    manifest = RunManifest(
        config={"potential": spec.to_dict(), "lambda_min": args.lambda_min,
                "lambda_max": args.lambda_max, "lambda_points": args.lambda_points,
                "linear": args.linear, "half_width": half, "n": args.n},
        tool_version=__version__,
    )
    manifest_path = out / "manifest.json"
    manifest.write(manifest_path)
    report = build_spectral_report(spec, grid, lams)
    admissibility = check_admissibility(spec, grid)
    csv_path = out / "coefficients.csv"
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["lambda", "re_T", "im_T", "re_R", "im_R", "unitarity_defect"])
        for c in report.coefficients:
            w.writerow([f"{x:.17g}" for x in
                        (c.lam, c.T.real, c.T.imag, c.R.real, c.R.imag, c.unitarity_defect)])
    manifest.add_output(csv_path)
    json_path = out / "spectral_report.json"
    payload = report.to_dict()
    payload["admissibility"] = admissibility.to_dict()
    write_json(json_path, payload)
    manifest.add_output(json_path)
    manifest.add_output(manifest_path)
    manifest.finalize(manifest_path, "complete", admissible=admissibility.admissible)
    print(
        f"{spec.kind}: {len(report.bound_state_energies)} bound state(s) "
        f"{list(report.bound_state_energies)}, resonance={report.resonance.detected}, "
        f"admissible={admissibility.admissible}, "
        f"max unitarity defect {report.max_unitarity_defect:.2e} -> {out}"
    )
    return EXIT_OK


def cmd_potential_report(args) -> int:
    spec = _potential_from_args(args)
    half = args.half_width
    grid = make_grid(spec.center - half, spec.center + half, args.n)
    report = check_admissibility(spec, grid)
    out = _out_dir(args, None, "runs/potential")
    path = out / "admissibility.json"
    write_json(path, report.to_dict())
    print(json.dumps(report.to_dict(), indent=2, sort_keys=True, default=str))
    return EXIT_OK


def cmd_study(args) -> int:
    raw = _load_config(args.config)
    config = ExperimentConfig.from_dict(raw)
    out = _out_dir(args, raw, "runs/study")
    manifest = RunManifest(config=raw, tool_version=__version__)
    manifest_path = out / "manifest.json"
    manifest.write(manifest_path)
    try:
        result = scaling_study(config, jobs=args.jobs)
    except (NumericalBreakdownError, AccuracyError) as exc:
        manifest.finalize(manifest_path, "breakdown", error=str(exc))
        raise
    for run, floor in zip(result.runs, result.floor_runs):
        run_dir = out / "runs" / f"v{run.plan.v:g}"
        run_dir.mkdir(parents=True, exist_ok=True)
        sub = RunManifest(config={**raw, "v": run.plan.v}, tool_version=__version__)
        sub_path = run_dir / "manifest.json"
        sub.write(sub_path)
        _write_run_outputs(run, run_dir, sub)
        floor_path = run_dir / "floor_series.csv"
        floor.series.to_csv(floor_path)
        sub.add_output(floor_path)
        sub.add_output(sub_path)
        sub.finalize(sub_path, "complete" if run.valid else "invalid", valid=run.valid)
        manifest.add_output(sub_path)
    study_path = out / "study.json"
    write_json(study_path, result.to_dict())
    manifest.add_output(study_path)
    csv_path = out / "scaling.csv"
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["log_v", "log_err"])
        for v, e in zip(result.velocities, result.errors):
            w.writerow([f"{math.log(v):.17g}", f"{math.log(e):.17g}"])
    manifest.add_output(csv_path)
    svg_path = out / "scaling.svg"
    vs = np.asarray(result.velocities)
    bound = result.errors[0] * (vs / vs[0]) ** result.bound_slope
    svg_line_plot(
        svg_path,
        [
            (vs, np.asarray(result.errors), "measured sup error"),
            (vs, bound, f"envelope slope {result.bound_slope:g}"),
        ],
        title=f"error scaling, slope {result.slope:.3f} (limit {result.slope_limit:.3f})",
        xlabel="v",
        ylabel="sup_t ||u - u1||_L2",
        logx=True,
        logy=True,
    )
    manifest.add_output(svg_path)
    manifest.add_output(manifest_path)
    status = "complete" if result.passed else ("invalid" if not result.runs_valid else "failed")
    manifest.finalize(
        manifest_path, status, passed=result.passed, slope=result.slope,
        slope_limit=result.slope_limit,
    )
    print(
        f"slope {result.slope:.4f} (limit {result.slope_limit:.4f}), "
        f"decreasing={result.strictly_decreasing}, floors ok={result.floor_gate_ok}, "
        f"pass={result.passed} -> {out}"
    )
    if not result.runs_valid:
        return EXIT_INVALID_RUN
    return EXIT_OK if result.passed else EXIT_CRITERION


def cmd_check(args) -> int:
    results = checks.run_all()
    width = max(len(r.name) for r in results)
    lines = []
    for r in results:
        lines.append(f"{r.name:<{width}}  {'PASS' if r.passed else 'FAIL'}  {r.detail}")
    ok = all(r.passed for r in results)
    lines.append(f"{'overall':<{width}}  {'PASS' if ok else 'FAIL'}  {sum(r.passed for r in results)}/{len(results)} checks")
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if args.out:
        out = _out_dir(args, None, "runs/check")
        (out / "check_report.txt").write_text(text)
        write_json(
            out / "check_report.json",
            {"checks": [{"name": r.name, "passed": r.passed, "detail": r.detail} for r in results],
             "passed": ok},
        )
    return EXIT_OK if ok else EXIT_CRITERION


def _add_potential_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--kind", required=True,
                   choices=["zero", "algebraic", "gaussian", "sech2_scaled", "poschl_teller"])
    p.add_argument("--q", type=float, help="amplitude (algebraic, gaussian)")
    p.add_argument("--s", type=float, help="algebraic decay exponent (> 2 for admissible use)")
    p.add_argument("--sigma", type=float, help="gaussian width")
    p.add_argument("--beta", type=float, help="sech^2 well depth")
    p.add_argument("--ell", type=float, help="reflectionless family index")
    p.add_argument("--center", type=float, help="potential center offset")
    p.add_argument("--half-width", type=float, default=60.0, dest="half_width",
                   help="half-width of the analysis domain (default 60)")
    p.add_argument("--n", type=int, default=2048, help="grid points (power of two)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="solitonlab",
        description="Spectral laboratory for fast-soliton transmission through 1D potentials.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one transmission simulation from a JSON config")
    p.add_argument("--config", required=True, help="JSON config path")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("spectral", help="transmission/reflection table and spectral report")
    _add_potential_flags(p)
    p.add_argument("--lambda-min", type=float, default=0.5, dest="lambda_min")
    p.add_argument("--lambda-max", type=float, default=20.0, dest="lambda_max")
    p.add_argument("--lambda-points", type=int, default=50, dest="lambda_points")
    p.add_argument("--linear", action="store_true", help="linear lambda spacing (default log)")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_spectral)

    p = sub.add_parser("study", help="velocity scaling study")
    p.add_argument("--config", required=True, help="JSON config path")
    p.add_argument("--out", help="output directory")
    p.add_argument("--jobs", type=int, default=1, help="concurrent per-velocity workers")
    p.set_defaults(func=cmd_study)

    p = sub.add_parser("check", help="run the bundled invariant suite")
    p.add_argument("--out", help="also write the report to this directory")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("potential-report", help="admissibility report for a potential")
    _add_potential_flags(p)
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_potential_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalBreakdownError, AccuracyError) as exc:
        print(f"numerical breakdown: {exc}", file=sys.stderr)
        return EXIT_BREAKDOWN
    except InvalidRunError as exc:
        print(f"invalid run: {exc}", file=sys.stderr)
        return EXIT_INVALID_RUN


if __name__ == "__main__":
    raise SystemExit(main())
