"""Deterministic file formats: state files, CSV series, JSON specs.

Everything written here is meant to be diffed and rerun.  Floats are
rendered with repr so a read-write round trip is bit-exact, newlines
are always "\\n", and each format starts with a versioned schema tag.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass

import numpy as np

from .checkers import BranchSpec, CheckReport, ConditionalState, TabulatedMap, Wavefunction
from .linalg import DensityMatrix, SubsystemLayout, ValidationError

STATE_SCHEMA = "framecast-state 1"
SERIES_SCHEMA = "run-case-series/1"
SATURATION_SCHEMA = "run-case-saturation/1"
SWEEP_SCHEMA = "gaussian-sweep/1"
BRANCH_SPEC_SCHEMA = "branch-spec/1"
MAPS_SCHEMA = "injectivity-maps/1"
REPORT_SCHEMA = "check-report/1"
MANIFEST_SCHEMA = "run-manifest/1"


def _fmt(x) -> str:
    return repr(float(x))


# ---------------------------------------------------------------------------
# density-matrix state files


def write_state(path, rho: DensityMatrix, layout: SubsystemLayout) -> None:
    """Write a state as text: labels, dims, then (re,im) rows."""
    if layout.dim != rho.dim:
        raise ValidationError(
            f"layout dim {layout.dim} does not match state dim {rho.dim}"
        )
    lines = [
        STATE_SCHEMA,
        "labels: " + " ".join(layout.labels),
        "dims: " + " ".join(str(d) for d in layout.dims),
    ]
    for row in rho.matrix:
        lines.append(" ".join(f"({_fmt(x.real)},{_fmt(x.imag)})" for x in row))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_state(path):
    """Parse a state file back into (DensityMatrix, SubsystemLayout)."""
    with open(path) as fh:
        lines = [line.strip() for line in fh if line.strip()]
    if not lines or lines[0] != STATE_SCHEMA:
        raise ValidationError(f"not a state file (missing {STATE_SCHEMA!r} header)")
    if len(lines) < 3:
        raise ValidationError("state file is truncated before the dims line")
    if not lines[1].startswith("labels: ") or not lines[2].startswith("dims: "):
        raise ValidationError("state file must carry labels and dims lines")
    labels = tuple(lines[1][len("labels: ") :].split())
    try:
        dims = tuple(int(tok) for tok in lines[2][len("dims: ") :].split())
    except ValueError as exc:
        raise ValidationError(f"bad dims line: {exc}") from exc
    layout = SubsystemLayout(labels, dims)
    n = layout.dim
    rows = lines[3:]
    if len(rows) != n:
        raise ValidationError(
            f"state file has {len(rows)} matrix rows, layout needs {n}"
        )
    matrix = np.zeros((n, n), dtype=complex)
    for r, row in enumerate(rows):
        entries = row.split()
        if len(entries) != n:
            raise ValidationError(f"row {r} has {len(entries)} entries, expected {n}")
        for c, tok in enumerate(entries):
            if not (tok.startswith("(") and tok.endswith(")")):
                raise ValidationError(f"malformed entry {tok!r} at row {r}")
            try:
                re_s, im_s = tok[1:-1].split(",")
                matrix[r, c] = complex(float(re_s), float(im_s))
            except ValueError as exc:
                raise ValidationError(f"malformed entry {tok!r} at row {r}") from exc
    return DensityMatrix(matrix), layout


# ---------------------------------------------------------------------------
# CSV emitters


def write_series_csv(path, result, frame: str) -> None:
    """Time series of one frame's reports as CSV."""
    reports = result.reports[frame]
    first = reports[0]
    d_s = len(first.spectrum)
    observers = first.observers
    cols = ["t", "frame"]
    cols += [f"p_{i}" for i in range(d_s)]
    cols += ["gamma", "i_mean"]
    for obs in observers:
        cols += [f"error_lower_{obs}", f"error_upper_{obs}"]
    for obs in observers:
        cols.append(f"holevo_{obs}")
    for obs in observers:
        cols.append(f"qmi_{obs}")
    lines = [f"# schema: {SERIES_SCHEMA}", ",".join(cols)]
    for t, rep in zip(result.times, reports):
        row = [_fmt(t), frame]
        row += [_fmt(p) for p in rep.spectrum]
        row += [_fmt(rep.gamma), _fmt(rep.i_mean)]
        for obs in observers:
            lo, up = rep.error_bounds[obs]
            row += [_fmt(lo), _fmt(up)]
        for obs in observers:
            row.append(_fmt(rep.holevo[obs]))
        for obs in observers:
            row.append(_fmt(rep.qmi[obs]))
        lines.append(",".join(row))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_saturation_csv(path, result) -> None:
    lines = [
        f"# schema: {SATURATION_SCHEMA}",
        "frame,i_sat,sigma_i,t_sat",
    ]
    for frame in sorted(result.saturation):
        stats = result.saturation[frame]
        lines.append(
            ",".join(
                [frame, _fmt(stats.i_sat), _fmt(stats.sigma_i), _fmt(stats.t_sat)]
            )
        )
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_sweep_csv(path, grid, sigma_grid, fraction_sizes, n_samples, seed) -> None:
    grid = np.asarray(grid)
    lines = [
        f"# schema: {SWEEP_SCHEMA}",
        "sigma,fraction_size,mean_fidelity,n_samples,seed",
    ]
    for a, sigma in enumerate(sigma_grid):
        for b, size in enumerate(fraction_sizes):
            lines.append(
                ",".join(
                    [
                        _fmt(sigma),
                        str(int(size)),
                        _fmt(grid[a, b]),
                        str(int(n_samples)),
                        str(int(seed)),
                    ]
                )
            )
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# branch specs and tabulated maps (JSON)


def _complex_pair(z):
    return [float(np.real(z)), float(np.imag(z))]


def dump_branch_spec(spec: BranchSpec) -> dict:
    return {
        "schema": BRANCH_SPEC_SCHEMA,
        "p": [float(x) for x in spec.p],
        "system": [
            {
                "positions": [float(x) for x in psi.positions],
                "amplitudes": [_complex_pair(a) for a in psi.amplitudes],
            }
            for psi in spec.system_wavefunctions
        ],
        "environments": [
            [
                {
                    "positions": [float(x) for x in cond.positions],
                    "matrix": [
                        [_complex_pair(x) for x in row] for row in cond.matrix
                    ],
                }
                for cond in branch_row
            ]
            for branch_row in spec.env_conditionals
        ],
    }


def write_branch_spec(path, spec: BranchSpec) -> None:
    with open(path, "w", newline="\n") as fh:
        json.dump(dump_branch_spec(spec), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_json(path, schema):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot parse {path}: {exc}") from exc
    if not isinstance(data, dict) or data.get("schema") != schema:
        raise ValidationError(f"{path} does not declare schema {schema!r}")
    return data


def load_branch_spec(path) -> BranchSpec:
    data = _load_json(path, BRANCH_SPEC_SCHEMA)
    try:
        system = tuple(
            Wavefunction(
                tuple(entry["positions"]),
                tuple(complex(re, im) for re, im in entry["amplitudes"]),
            )
            for entry in data["system"]
        )
        envs = tuple(
            tuple(
                ConditionalState(
                    tuple(entry["positions"]),
                    tuple(
                        tuple(complex(re, im) for re, im in row)
                        for row in entry["matrix"]
                    ),
                )
                for entry in branch_row
            )
            for branch_row in data["environments"]
        )
        return BranchSpec(tuple(data["p"]), system, envs)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed branch spec {path}: {exc}") from exc


def write_injectivity_maps(path, maps) -> None:
    data = {
        "schema": MAPS_SCHEMA,
        "x": [float(v) for v in maps[0].x],
        "maps": [[float(v) for v in m.y] for m in maps],
    }
    with open(path, "w", newline="\n") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_injectivity_maps(path):
    data = _load_json(path, MAPS_SCHEMA)
    try:
        x = tuple(data["x"])
        return tuple(TabulatedMap(x, tuple(y)) for y in data["maps"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed maps file {path}: {exc}") from exc


def write_check_report(path, report: CheckReport) -> None:
    data = {
        "schema": REPORT_SCHEMA,
        "verdict": report.verdict,
        "violations": [
            {
                "condition": v.condition,
                "indices": list(v.indices),
                "magnitude": v.magnitude,
            }
            for v in report.violations
        ],
        "notes": list(report.notes),
    }
    if report.spectrum is not None:
        data["spectrum"] = [float(x) for x in report.spectrum]
    with open(path, "w", newline="\n") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# run manifests


@dataclass(frozen=True)
class RunManifest:
    """Reproducibility record for one CLI invocation."""

    command: str
    config_digest: str
    seed: int
    version: str
    outputs: tuple
    wall_time_s: float


def config_digest(config: dict) -> str:
    """Stable digest of a configuration mapping.

    Semantically identical configs digest identically: keys are
    sorted, tuples and lists collapse to lists, and floats keep their
    exact repr through json.
    """

    def canonical(obj):
        if isinstance(obj, dict):
            return {str(k): canonical(v) for k, v in sorted(obj.items())}
        if isinstance(obj, (list, tuple)):
            return [canonical(v) for v in obj]
        if isinstance(obj, (np.floating, np.integer)):
            return obj.item()
        return obj

    blob = json.dumps(canonical(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def write_manifest(path, manifest: RunManifest) -> None:
    data = {"schema": MANIFEST_SCHEMA}
    data.update(asdict(manifest))
    data["outputs"] = list(manifest.outputs)
    with open(path, "w", newline="\n") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")
