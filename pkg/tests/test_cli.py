import json
import os

import jsonschema
import pytest

from nudirac import results
from nudirac.cli import main
from nudirac.models import NonPTParams, nonpt_solve


NONPT_FLAGS = ["--model", "nonpt-shifted", "--alpha", "1", "--gamma", "2", "--beta", "2"]


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_solve_exit_zero_and_energies(capsys):
    code, out, err = run_cli(capsys, "solve", *NONPT_FLAGS, "--nmax", "2")
    assert code == 0, err
    doc = json.loads(out)
    engine = [rec["E_engine"]["re"] for rec in doc["levels"]]
    paper = [rec["E_paper_formula"]["re"] for rec in doc["levels"]]
    assert engine == pytest.approx([0.0, 2.0, 4.0], abs=1e-10)
    assert paper == pytest.approx([0.0, 2.0, 4.0], abs=1e-12)


def test_solve_pt_slice(capsys):
    code, out, _ = run_cli(
        capsys, "solve", "--model", "pt-linear", "--a", "1", "--b", "2",
        "--gamma", "2", "--omega", "2", "--nmax", "1",
    )
    assert code == 0
    doc = json.loads(out)
    engine = [rec["E_engine"]["re"] for rec in doc["levels"]]
    assert engine == pytest.approx([2.0, 2.5], abs=1e-9)


def test_usage_error_exit_one(capsys):
    code, out, err = run_cli(capsys, "solve", "--model", "pt-linear")
    assert code == 1
    assert json.loads(err)["error"].startswith("model pt-linear requires")


def test_off_slice_requires_engine_only(capsys):
    code, out, err = run_cli(
        capsys, "solve", "--model", "nonpt-shifted", "--alpha", "1",
        "--gamma", "2", "--beta", "3",
    )
    assert code == 1
    assert "beta = alpha*gamma" in json.loads(err)["error"]
    code, out, err = run_cli(
        capsys, "solve", "--model", "nonpt-shifted", "--alpha", "1",
        "--gamma", "2", "--beta", "3", "--engine-only",
    )
    assert code == 0
    doc = json.loads(out)
    assert all(rec["E_engine"] is None for rec in doc["levels"])
    assert all(rec["E_engine_reason"] for rec in doc["levels"])


def test_solve_documents_are_deterministic(capsys):
    _, out1, _ = run_cli(capsys, "solve", *NONPT_FLAGS, "--nmax", "1")
    _, out2, _ = run_cli(capsys, "solve", *NONPT_FLAGS, "--nmax", "1")
    assert out1 == out2


def test_document_validates_against_shipped_schema(capsys, tmp_path):
    out_file = tmp_path / "doc.json"
    code, _, _ = run_cli(
        capsys, "verify", *NONPT_FLAGS, "--nmax", "1", "--grid", "120",
        "--out", str(out_file),
    )
    doc = json.loads(out_file.read_text())
    jsonschema.validate(doc, results.load_schema())
    assert doc["command"] == "verify"


def test_verify_flagship_exits_two_with_oracle_note(capsys):
    # the engine-side checks pass; pencil agreement fails by analysis, so
    # the verification verdict is honest red (exit 2) with the note recorded
    code, out, _ = run_cli(capsys, "verify", *NONPT_FLAGS, "--nmax", "1", "--grid", "120")
    assert code == 2
    doc = json.loads(out)
    checks = doc["checks"]
    assert checks["closed_form_residual"]["passed"]
    assert checks["coupled_system_residual"]["passed"]
    assert checks["quantization_discrimination"]["passed"]
    assert not checks["engine_oracle_agreement"]["passed"]
    assert any("pencil" in note for note in doc["discrepancy_notes"])


def test_verify_tiny_grid_exits_two(capsys):
    code, out, _ = run_cli(capsys, "verify", *NONPT_FLAGS, "--nmax", "0", "--grid", "16")
    assert code == 2


def test_config_file_with_flag_override(capsys, tmp_path):
    cfg = {
        "model": "nonpt-shifted",
        "parameters": {"alpha": 1.0, "beta": 2.0, "gamma": 2.0},
        "n_max": 3,
    }
    path = tmp_path / "run.json"
    path.write_text(json.dumps(cfg))
    code, out, _ = run_cli(capsys, "solve", "--config", str(path), "--nmax", "1")
    assert code == 0
    doc = json.loads(out)
    assert len(doc["levels"]) == 2  # flag wins over the file's n_max


def test_csv_levels_output(capsys):
    code, out, _ = run_cli(capsys, "solve", *NONPT_FLAGS, "--nmax", "1", "--output", "csv")
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0].startswith("n,re_E_engine")
    assert len(lines) == 3


def test_export_csv_block_shape(capsys):
    code, out, _ = run_cli(
        capsys, "export", *NONPT_FLAGS, "--nmax", "0", "--output", "csv",
        "--xmin", "-5", "--xmax", "5", "--points", "101",
    )
    assert code == 0
    lines = out.split("\n")
    assert lines[0] == "x,re_psi1,im_psi1,re_psi2,im_psi2,n"
    # one block: header + 101 rows (plus trailing newline)
    assert len([l for l in lines if l]) == 102


def test_export_csv_round_trip_bit_identical():
    states = nonpt_solve(NonPTParams(alpha=1, beta=2, gamma=2), 1, normalize=False)
    xs = [(-5.0 + 0.1 * j) for j in range(101)]
    text = results.wavefunction_csv(states, xs)
    blocks = results.parse_wavefunction_csv(text)
    xs2 = [x for b in blocks for x in b["x"]]
    text2 = results.wavefunction_csv(states, xs2[: len(xs)])
    # 17 significant digits round-trip exactly
    assert text.split("\n")[: len(xs) + 1] == text2.split("\n")[: len(xs) + 1]


def test_export_json_is_document(capsys):
    code, out, _ = run_cli(capsys, "export", *NONPT_FLAGS, "--nmax", "0", "--output", "json")
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, results.load_schema())


def test_sweep_writes_runs_and_index(capsys, tmp_path):
    out_dir = tmp_path / "sweep"
    code, _, err = run_cli(
        capsys, "sweep", "--model", "pt-linear", "--a", "1", "--b", "2",
        "--gamma", "2", "--nmax", "0", "--sweep-param", "omega",
        "--sweep-values", "1,2", "--out", str(out_dir),
    )
    assert code == 0, err
    index = json.loads((out_dir / "index.json").read_text())
    assert index["sweep_param"] == "omega"
    assert len(index["runs"]) == 2
    for run in index["runs"]:
        assert run["error"] is None
        run_doc = json.loads((out_dir / run["file"]).read_text())
        assert run_doc["levels"][0]["E_engine"] is not None


def test_sweep_records_invalid_points(capsys, tmp_path):
    # sweeping alpha with beta held fixed leaves the closed-form slice at
    # alpha = 2; that run is recorded as an error, the sweep continues
    out_dir = tmp_path / "sweep2"
    code, _, err = run_cli(
        capsys, "sweep", "--model", "nonpt-shifted", "--alpha", "1", "--gamma", "2",
        "--beta", "2", "--nmax", "0", "--sweep-param", "alpha",
        "--sweep-values", "1,2", "--out", str(out_dir),
    )
    assert code == 0, err
    index = json.loads((out_dir / "index.json").read_text())
    by_value = {run["value"]: run for run in index["runs"]}
    assert by_value[1.0]["error"] is None
    assert "beta = alpha*gamma" in by_value[2.0]["error"]


def test_report_renders_figures(capsys, tmp_path):
    out_dir = tmp_path / "report"
    code, _, err = run_cli(
        capsys, "report", *NONPT_FLAGS, "--nmax", "1", "--grid", "120",
        "--out", str(out_dir), "--points", "41", "--dpi", "60",
    )
    assert code == 2  # verify verdict is honest red (pencil disagreement)
    expected = [
        "result.json",
        "levels.csv",
        "wavefunctions.csv",
        "fig_spectrum.png",
        "fig_wavefunctions.png",
        "fig_norm_growth.png",
        "fig_discrimination.png",
    ]
    for name in expected:
        path = out_dir / name
        assert path.exists() and path.stat().st_size > 0, name


def test_custom_model_through_config(capsys, tmp_path):
    # the confining linear-velocity model expressed as raw coefficients
    cfg = {
        "model": "custom",
        "n_max": 1,
        "custom": {
            "v_f": [[1, 0], [2, 0]],
            "V": [[1, 0], [2, 0]],
            "W": [[2, 0]],
            "R": [[0, 0]],
        },
    }
    path = tmp_path / "custom.json"
    path.write_text(json.dumps(cfg))
    code, out, err = run_cli(capsys, "solve", "--config", str(path))
    assert code == 0, err
    doc = json.loads(out)
    engine = [rec["E_engine"]["re"] for rec in doc["levels"]]
    assert engine == pytest.approx([2.0, 2.5], abs=1e-8)
