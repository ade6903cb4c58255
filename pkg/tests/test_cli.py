"""End-to-end CLI tests on tiny configurations.

Everything runs through main() with argv lists, so argument parsing,
exit codes, and the emitted artifacts are all exercised together.
"""

import json

import numpy as np
import pytest

from framecast.checkers import TabulatedMap, localized_branch_spec
from framecast.cli import main
from framecast.fileio import (
    read_state,
    write_branch_spec,
    write_injectivity_maps,
    write_state,
)
from framecast.linalg import DensityMatrix, SubsystemLayout

TINY = {
    "D": 3,
    "time_grid_short": [0.0, 0.5, 1.0],
    "time_grid_long": [2.0, 3.0],
    "saturation_window": [2.0, 3.0],
}


@pytest.fixture
def tiny_config(tmp_path):
    path = tmp_path / "tiny.json"
    path.write_text(json.dumps(TINY))
    return str(path)


def classical_ring_state(D, parties):
    dim = D**parties
    m = np.zeros((dim, dim), dtype=complex)
    for s in range(D):
        idx = 0
        for _ in range(parties):
            idx = idx * D + s
        m[idx, idx] = 1.0 / D
    return DensityMatrix(m)


# ---------------------------------------------------------------------------
# run-case


def test_run_case_unknown_case_exits_2(capsys):
    assert main(["run-case", "9.9"]) == 2
    assert "unknown case" in capsys.readouterr().err


def test_run_case_writes_series_saturation_manifest(tmp_path, tiny_config):
    out = tmp_path / "out"
    code = main(
        ["run-case", "1.1", "--config", tiny_config, "--out", str(out)]
    )
    assert code == 0
    series_c = out / "case-1.1_frame-C_series.csv"
    series_e1 = out / "case-1.1_frame-E1_series.csv"
    sat = out / "case-1.1_saturation.csv"
    manifest = out / "case-1.1_manifest.json"
    for path in (series_c, series_e1, sat, manifest):
        assert path.exists(), path

    lines = series_c.read_text().splitlines()
    assert lines[0] == "# schema: run-case-series/1"
    header = lines[1].split(",")
    assert header[:2] == ["t", "frame"]
    assert "p_0" in header and "p_2" in header and "p_3" not in header
    assert "gamma" in header and "i_mean" in header
    assert "error_lower_E1" in header and "error_upper_E2" in header
    assert "holevo_E1" in header and "qmi_E2" in header
    assert len(lines) == 2 + 5

    e1_header = series_e1.read_text().splitlines()[1].split(",")
    assert "error_lower_C" in e1_header and "holevo_E2" in e1_header

    doc = json.loads(manifest.read_text())
    assert doc["schema"] == "run-manifest/1"
    assert doc["command"] == "run-case"
    assert sorted(doc["outputs"]) == [
        "case-1.1_frame-C_series.csv",
        "case-1.1_frame-E1_series.csv",
        "case-1.1_saturation.csv",
    ]
    assert len(doc["config_digest"]) == 64

    sat_lines = sat.read_text().splitlines()
    assert sat_lines[0] == "# schema: run-case-saturation/1"
    assert sat_lines[1] == "frame,i_sat,sigma_i,t_sat"
    assert {row.split(",")[0] for row in sat_lines[2:]} == {"C", "E1"}


def test_run_case_rerun_is_byte_identical(tmp_path, tiny_config):
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    for out in (out_a, out_b):
        assert (
            main(
                [
                    "run-case",
                    "4",
                    "--config",
                    tiny_config,
                    "--seed",
                    "7",
                    "--out",
                    str(out),
                ]
            )
            == 0
        )
    for name in (
        "case-4_frame-C_series.csv",
        "case-4_frame-E1_series.csv",
        "case-4_saturation.csv",
    ):
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes(), name


def test_run_case_bad_config_exits_2(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"nonsense": 1}))
    assert main(["run-case", "1.1", "--config", str(path)]) == 2
    assert "unknown config keys" in capsys.readouterr().err


def test_run_case_honours_output_env_var(tmp_path, tiny_config, monkeypatch):
    monkeypatch.setenv("FRAMECAST_OUT", str(tmp_path / "envout"))
    assert main(["run-case", "1.3", "--config", tiny_config]) == 0
    assert (tmp_path / "envout" / "case-1.3_frame-C_series.csv").exists()


def test_run_case_endpoint_row_matches_structure(tmp_path, tiny_config):
    out = tmp_path / "out"
    assert main(["run-case", "1.1", "--config", tiny_config, "--out", str(out)]) == 0
    lines = (out / "case-1.1_frame-E1_series.csv").read_text().splitlines()
    header = lines[1].split(",")
    rows = [line.split(",") for line in lines[2:]]
    t_col = header.index("t")
    p0_col = header.index("p_0")
    at_one = next(r for r in rows if float(r[t_col]) == 1.0)
    assert float(at_one[p0_col]) == pytest.approx(1.0, abs=1e-9)


# ---------------------------------------------------------------------------
# gaussian-sweep


def test_sweep_writes_expected_grid(tmp_path):
    out = tmp_path / "sweep"
    code = main(
        [
            "gaussian-sweep",
            "--sigma",
            "0.1",
            "1.0",
            "--fractions",
            "1",
            "4",
            "--samples",
            "20",
            "--seed",
            "3",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    lines = (out / "gaussian-sweep.csv").read_text().splitlines()
    assert lines[0] == "# schema: gaussian-sweep/1"
    assert lines[1] == "sigma,fraction_size,mean_fidelity,n_samples,seed"
    assert len(lines) == 2 + 4
    first = lines[2].split(",")
    assert first[0] == "0.1" and first[1] == "1"
    assert first[3] == "20" and first[4] == "3"
    assert 0.0 <= float(first[2]) <= 1.0


def test_sweep_rerun_is_byte_identical(tmp_path):
    args = [
        "gaussian-sweep",
        "--sigma",
        "0.5",
        "--fractions",
        "2",
        "--samples",
        "10",
    ]
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert (a / "gaussian-sweep.csv").read_bytes() == (
        b / "gaussian-sweep.csv"
    ).read_bytes()


def test_sweep_rejects_nonpositive_sigma(tmp_path, capsys):
    code = main(
        [
            "gaussian-sweep",
            "--sigma",
            "0",
            "--fractions",
            "1",
            "--out",
            str(tmp_path),
        ]
    )
    assert code == 2
    assert "positive" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# check


def test_check_strict_pass_and_fail(tmp_path, capsys):
    good = tmp_path / "good.json"
    write_branch_spec(good, localized_branch_spec(((0, 1, 2), (1, 3, 0)), (0.5, 0.5)))
    assert main(["check", str(good), "--which", "strict"]) == 0
    assert "verdict: pass" in capsys.readouterr().out

    bad = tmp_path / "bad.json"
    write_branch_spec(
        bad, localized_branch_spec(((0, 0, 0), (1, 1, 1)), (0.5, 0.5))
    )
    assert main(["check", str(bad), "--which", "strict"]) == 1
    assert "d-relative-positions-distinct" in capsys.readouterr().out


def test_check_mixture_prints_new_spectrum(tmp_path, capsys):
    from framecast.checkers import BranchSpec, ConditionalState, Wavefunction

    spec = BranchSpec(
        p=(0.5, 0.5),
        system_wavefunctions=(
            Wavefunction((0.0,), (1.0,)),
            Wavefunction((4.0,), (1.0,)),
        ),
        env_conditionals=(
            (ConditionalState((0.0, 1.0), ((0.25, 0.0), (0.0, 0.75))),),
            (ConditionalState((2.0, 3.0), ((0.4, 0.0), (0.0, 0.6))),),
        ),
    )
    path = tmp_path / "mix.json"
    write_branch_spec(path, spec)
    report_path = tmp_path / "report.json"
    code = main(
        [
            "check",
            str(path),
            "--which",
            "mixture",
            "--report",
            str(report_path),
        ]
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "frame E1 spectrum" in out
    doc = json.loads(report_path.read_text())
    assert doc["schema"] == "check-report/1"
    assert doc["verdict"] == "pass"


def test_check_truncated_file_exits_2(tmp_path, capsys):
    path = tmp_path / "trunc.json"
    path.write_text('{"schema": "branch-spec/1", "p": [1.0')
    assert main(["check", str(path), "--which", "strict"]) == 2
    assert "error" in capsys.readouterr().err


def test_check_reduced_on_state_file(tmp_path, capsys):
    lay = SubsystemLayout(("S", "E1", "E2"), (3, 3, 3))
    path = tmp_path / "state.txt"
    write_state(path, classical_ring_state(3, 3), lay)
    assert main(["check", str(path), "--which", "reduced"]) == 0
    assert main(
        ["check", str(path), "--which", "reduced", "--frame", "E1"]
    ) == 0
    out = capsys.readouterr().out
    assert "degenerate" in out


def test_check_injectivity_file(tmp_path):
    x = tuple(np.linspace(0.0, 1.0, 9))
    xs = np.asarray(x)
    good = tmp_path / "maps.json"
    write_injectivity_maps(
        good,
        (
            TabulatedMap(x, tuple(2.0 * xs)),
            TabulatedMap(x, tuple(3.0 * xs + 0.2)),
        ),
    )
    assert main(["check", str(good), "--which", "injectivity"]) == 0
    bad = tmp_path / "same.json"
    write_injectivity_maps(
        bad,
        (
            TabulatedMap(x, tuple(2.0 * xs)),
            TabulatedMap(x, tuple(2.0 * xs)),
        ),
    )
    assert main(["check", str(bad), "--which", "injectivity"]) == 1


# ---------------------------------------------------------------------------
# transform


def test_transform_twice_restores_bitwise(tmp_path):
    rng = np.random.default_rng(5)
    D, parties = 3, 3
    dim = D**parties
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = DensityMatrix(a @ a.conj().T / np.trace(a @ a.conj().T).real)
    lay = SubsystemLayout(("S", "E1", "E2"), (D, D, D))

    original = tmp_path / "orig.txt"
    once = tmp_path / "once.txt"
    twice = tmp_path / "twice.txt"
    write_state(original, rho, lay)
    assert main(["transform", str(original), "--target", "E1", "--out", str(once)]) == 0
    moved, moved_lay = read_state(once)
    assert moved_lay.labels == ("S", "C", "E2")
    assert (
        main(
            [
                "transform",
                str(once),
                "--target",
                "C",
                "--source",
                "E1",
                "--out",
                str(twice),
            ]
        )
        == 0
    )
    assert twice.read_bytes() == original.read_bytes()


def test_transform_mismatched_layout_exits_2(tmp_path, capsys):
    path = tmp_path / "bad.txt"
    lay = SubsystemLayout(("S", "E1"), (2, 2))
    write_state(path, classical_ring_state(2, 2), lay)
    text = path.read_text().replace("dims: 2 2", "dims: 2 3")
    path.write_text(text)
    assert main(["transform", str(path), "--target", "E1", "--out", str(tmp_path / "o")]) == 2
    assert "error" in capsys.readouterr().err


def test_transform_unknown_target_exits_2(tmp_path, capsys):
    path = tmp_path / "st.txt"
    write_state(path, classical_ring_state(2, 2), SubsystemLayout(("S", "E1"), (2, 2)))
    assert main(["transform", str(path), "--target", "E9", "--out", str(tmp_path / "o")]) == 2
    assert "not one of" in capsys.readouterr().err


def test_transform_logs_spectrum_deviation(tmp_path, capsys):
    path = tmp_path / "st.txt"
    write_state(
        path, classical_ring_state(2, 3), SubsystemLayout(("S", "E1", "E2"), (2, 2, 2))
    )
    assert main(["transform", str(path), "--target", "E2", "--out", str(tmp_path / "o")]) == 0
    assert "spectrum deviation" in capsys.readouterr().out


# ---------------------------------------------------------------------------
# state file round trips


def test_state_file_round_trip_exact(tmp_path):
    rng = np.random.default_rng(11)
    a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    rho = DensityMatrix(a @ a.conj().T / np.trace(a @ a.conj().T).real)
    lay = SubsystemLayout(("S", "E1"), (2, 2))
    path = tmp_path / "state.txt"
    write_state(path, rho, lay)
    back, back_lay = read_state(path)
    assert np.array_equal(back.matrix, rho.matrix)
    assert back_lay == lay


def test_state_file_truncation_detected(tmp_path):
    lay = SubsystemLayout(("S", "E1"), (2, 2))
    path = tmp_path / "state.txt"
    write_state(path, classical_ring_state(2, 2), lay)
    lines = path.read_text().splitlines()
    path.write_text("\n".join(lines[:-1]) + "\n")
    from framecast.linalg import ValidationError

    with pytest.raises(ValidationError, match="rows"):
        read_state(path)
