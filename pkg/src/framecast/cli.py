"""Command-line entry point.

Four commands: run-case evolves one dynamical scenario and writes its
metric time series, gaussian-sweep tabulates macrofraction fidelities,
check runs a structural objectivity verifier on a file, and transform
rewrites a stored state relative to a chosen subsystem.  Every command
is deterministic given its config and seed; exit codes are 0 success
or check-pass, 1 check-fail, 2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .checkers import (
    check_injectivity,
    check_mixture_objectivity,
    check_reduced_objectivity,
    check_strict_objectivity,
)
from .dynamics import CASE_IDS, CaseConfig, Couplings, desk_preset, paper_preset, run_case
from .fileio import (
    RunManifest,
    config_digest,
    load_branch_spec,
    load_injectivity_maps,
    read_state,
    write_check_report,
    write_manifest,
    write_saturation_csv,
    write_series_csv,
    write_state,
    write_sweep_csv,
)
from .gaussian import sweep_localisation_vs_fraction
from .linalg import ValidationError
from .ring import apply_frame_transform, build_frame_permutation

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INVALID = 2
EXIT_NUMERICAL = 3


def _out_dir(value) -> str:
    path = value if value is not None else os.environ.get("FRAMECAST_OUT", ".")
    os.makedirs(path, exist_ok=True)
    return path


def _fail(message: str, code: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


# ---------------------------------------------------------------------------
# run-case


def _case_config(args) -> CaseConfig:
    preset = desk_preset if args.preset == "desk" else paper_preset
    cfg = preset(args.case, seed=args.seed, D=args.dim)
    if args.config is not None:
        try:
            with open(args.config) as fh:
                overrides = json.load(fh)
        except (OSError, ValueError) as exc:
            raise ValidationError(f"cannot parse config {args.config}: {exc}")
        if not isinstance(overrides, dict):
            raise ValidationError("config file must hold a JSON object")
        allowed = {
            "D",
            "seed",
            "time_grid_short",
            "time_grid_long",
            "saturation_window",
            "couplings",
        }
        unknown = set(overrides) - allowed
        if unknown:
            raise ValidationError(f"unknown config keys {sorted(unknown)}")
        fields = {
            "case_id": cfg.case_id,
            "D": overrides.get("D", cfg.D),
            "seed": overrides.get("seed", cfg.seed),
            "time_grid_short": tuple(
                overrides.get("time_grid_short", cfg.time_grid_short)
            ),
            "time_grid_long": tuple(
                overrides.get("time_grid_long", cfg.time_grid_long)
            ),
            "saturation_window": tuple(
                overrides.get("saturation_window", cfg.saturation_window)
            ),
        }
        if "couplings" in overrides:
            fields["couplings"] = Couplings(**overrides["couplings"])
        else:
            fields["couplings"] = cfg.couplings
        cfg = CaseConfig(**fields)
    return cfg


def _config_mapping(cfg: CaseConfig, spectrum_samples: int) -> dict:
    return {
        "case_id": cfg.case_id,
        "D": cfg.D,
        "seed": cfg.seed,
        "time_grid_short": list(cfg.time_grid_short),
        "time_grid_long": list(cfg.time_grid_long),
        "saturation_window": list(cfg.saturation_window),
        "couplings": {
            "central": cfg.couplings.central,
            "local": cfg.couplings.local,
            "global_rate": cfg.couplings.global_rate,
        },
        "spectrum_samples": spectrum_samples,
    }


def cmd_run_case(args) -> int:
    if args.case not in CASE_IDS:
        return _fail(f"unknown case {args.case!r}", EXIT_INVALID)
    try:
        cfg = _case_config(args)
    except (ValidationError, TypeError) as exc:
        return _fail(str(exc), EXIT_INVALID)
    started = time.monotonic()
    try:
        result = run_case(cfg, spectrum_samples=args.spectrum_samples)
    except ValidationError as exc:
        return _fail(f"numerical failure: {exc}", EXIT_NUMERICAL)
    out = _out_dir(args.out)
    slug = f"case-{cfg.case_id}"
    outputs = []
    for frame in sorted(result.reports):
        name = f"{slug}_frame-{frame}_series.csv"
        write_series_csv(os.path.join(out, name), result, frame)
        outputs.append(name)
    sat_name = f"{slug}_saturation.csv"
    write_saturation_csv(os.path.join(out, sat_name), result)
    outputs.append(sat_name)
    manifest = RunManifest(
        command="run-case",
        config_digest=config_digest(_config_mapping(cfg, args.spectrum_samples)),
        seed=cfg.seed,
        version=__version__,
        outputs=tuple(outputs),
        wall_time_s=time.monotonic() - started,
    )
    write_manifest(os.path.join(out, f"{slug}_manifest.json"), manifest)
    print(
        f"case {cfg.case_id}: {result.times.size} time points, "
        f"spectrum drift {result.spectrum_drift:.3e}, "
        f"frame gap {result.frame_spectrum_gap:.3e}"
    )
    for frame in sorted(result.saturation):
        stats = result.saturation[frame]
        print(
            f"  frame {frame}: i_sat={stats.i_sat:.6g} "
            f"sigma_i={stats.sigma_i:.6g} t_sat={stats.t_sat:.6g}"
        )
    return EXIT_OK


# ---------------------------------------------------------------------------
# gaussian-sweep


def cmd_gaussian_sweep(args) -> int:
    started = time.monotonic()
    try:
        grid = sweep_localisation_vs_fraction(
            sigma_grid=args.sigma,
            fraction_sizes=args.fractions,
            n_samples=args.samples,
            interval=tuple(args.interval),
            seed=args.seed,
            frame_random=not args.fixed_frame,
        )
    except ValidationError as exc:
        return _fail(str(exc), EXIT_INVALID)
    out = _out_dir(args.out)
    name = "gaussian-sweep.csv"
    write_sweep_csv(
        os.path.join(out, name), grid, args.sigma, args.fractions, args.samples,
        args.seed,
    )
    manifest = RunManifest(
        command="gaussian-sweep",
        config_digest=config_digest(
            {
                "sigma": list(args.sigma),
                "fractions": list(args.fractions),
                "samples": args.samples,
                "interval": list(args.interval),
                "seed": args.seed,
                "frame_random": not args.fixed_frame,
            }
        ),
        seed=args.seed,
        version=__version__,
        outputs=(name,),
        wall_time_s=time.monotonic() - started,
    )
    write_manifest(os.path.join(out, "gaussian-sweep_manifest.json"), manifest)
    print(f"sweep grid {grid.shape[0]}x{grid.shape[1]} written to {name}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# check


def cmd_check(args) -> int:
    try:
        if args.which == "strict":
            spec = load_branch_spec(args.file)
            report = check_strict_objectivity(spec, tol=args.tol)
            extra = None
        elif args.which == "mixture":
            spec = load_branch_spec(args.file)
            report, spectra = check_mixture_objectivity(spec, tol=args.tol)
            extra = spectra
        elif args.which == "reduced":
            rho, layout = read_state(args.file)
            report = check_reduced_objectivity(
                rho, layout, args.frame or "C", tol=args.tol
            )
            extra = None
        else:
            maps = load_injectivity_maps(args.file)
            frame_index = int(args.frame) if args.frame else 1
            report = check_injectivity(maps, frame=frame_index, tol=args.tol)
            extra = None
    except ValidationError as exc:
        return _fail(str(exc), EXIT_INVALID)
    except ValueError as exc:
        return _fail(str(exc), EXIT_INVALID)
    print(report.summary())
    if extra:
        for j in sorted(extra):
            weights = " ".join(f"{w:.6g}" for _, _, w in extra[j])
            print(f"frame E{j} spectrum: {weights}")
    if args.report is not None:
        write_check_report(args.report, report)
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


# ---------------------------------------------------------------------------
# transform


def cmd_transform(args) -> int:
    try:
        rho, layout = read_state(args.file)
        if args.target not in layout.labels:
            raise ValidationError(
                f"target {args.target!r} is not one of {layout.labels}"
            )
        perm = build_frame_permutation(
            layout.dims[0], layout, args.target, source=args.source
        )
        moved = apply_frame_transform(rho, perm)
    except ValidationError as exc:
        return _fail(str(exc), EXIT_INVALID)
    before = np.sort(np.linalg.eigvalsh(rho.matrix))
    after = np.sort(np.linalg.eigvalsh(moved.matrix))
    print(f"spectrum deviation under transform: {np.max(np.abs(after - before)):.3e}")
    write_state(args.out, moved, perm.layout_out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="framecast",
        description="Objectivity diagnostics for quantum states across reference frames.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run-case", help="evolve one dynamical scenario")
    p_run.add_argument("case", help="case id, e.g. 1.1 or 4")
    p_run.add_argument("--preset", choices=("desk", "paper"), default="desk")
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--dim", type=int, default=12, help="ring dimension")
    p_run.add_argument("--config", default=None, help="JSON file with field overrides")
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.add_argument("--spectrum-samples", type=int, default=8)
    p_run.set_defaults(func=cmd_run_case)

    p_sweep = sub.add_parser("gaussian-sweep", help="macrofraction fidelity sweep")
    p_sweep.add_argument("--sigma", type=float, nargs="+", required=True)
    p_sweep.add_argument("--fractions", type=int, nargs="+", required=True)
    p_sweep.add_argument("--samples", type=int, default=400)
    p_sweep.add_argument("--seed", type=int, default=0)
    p_sweep.add_argument("--interval", type=float, nargs=2, default=(-1.0, 1.0))
    p_sweep.add_argument("--fixed-frame", action="store_true")
    p_sweep.add_argument("--out", default=None, help="output directory")
    p_sweep.set_defaults(func=cmd_gaussian_sweep)

    p_check = sub.add_parser("check", help="run a structural objectivity verifier")
    p_check.add_argument("file", help="branch spec, state, or maps file")
    p_check.add_argument(
        "--which",
        choices=("strict", "mixture", "reduced", "injectivity"),
        required=True,
    )
    p_check.add_argument("--tol", type=float, default=1e-9)
    p_check.add_argument(
        "--frame",
        default=None,
        help="target frame label (reduced) or 1-based map index (injectivity)",
    )
    p_check.add_argument("--report", default=None, help="write a JSON report here")
    p_check.set_defaults(func=cmd_check)

    p_tr = sub.add_parser("transform", help="rewrite a state in another frame")
    p_tr.add_argument("file", help="state file")
    p_tr.add_argument("--target", required=True, help="subsystem label to adopt")
    p_tr.add_argument(
        "--source",
        default="C",
        help="label given to the slot recording the frame we left (default C);"
        " name the original label here to undo a transform exactly",
    )
    p_tr.add_argument("--out", required=True, help="output state file")
    p_tr.set_defaults(func=cmd_transform)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
