import json
import math
import re

import numpy as np
import pytest

from sdirand.cli import EXIT_IO, EXIT_NO_VIOLATION, EXIT_OK, EXIT_USAGE, _curve_grid, main
from sdirand.cli import device_from_jsonable, device_to_jsonable, load_device
from sdirand.optimize import CurvePoint, default_curve_grid, write_curve
from sdirand.protocol import qrac_preset
from sdirand.qubit import behavior_table
from sdirand.witness import quantum_bound

QB = quantum_bound()


@pytest.fixture
def run(capsys):
    """Invoke the CLI in-process and capture (exit_code, stdout, stderr)."""

    def _run(*argv: str):
        code = main(list(argv))
        captured = capsys.readouterr()
        return code, captured.out, captured.err

    return _run


@pytest.fixture(scope="module")
def curve_file(tmp_path_factory):
    """Synthetic but well-formed certification curve covering [2, 2*sqrt(2)]."""

    def cp(t, h):
        return CurvePoint(t, 2.0**-h, h, (0.1,) * 10, t)

    points = [
        cp(2.0, 0.0),
        cp(2.3, 0.0),
        cp(2.64, 0.0),
        cp(2.66, 6.3e-4),
        cp(2.70, 6.5e-3),
        cp(2.76, 2.8e-2),
        cp(2.82, 0.129),
        cp(QB, 0.2256),
    ]
    path = tmp_path_factory.mktemp("curve") / "curve.csv"
    write_curve(str(path), points)
    return str(path)


# --- witness -----------------------------------------------------------------


def test_witness_qrac_output(run):
    code, out, _ = run("witness", "--preset", "qrac")
    assert code == EXIT_OK
    assert "device: preset:qrac" in out
    assert "  E[a=00, y=0] = 0.853553   E[a=00, y=1] = 0.853553" in out
    assert "T = 2.828427" in out
    assert "p_guess = 0.853553" in out
    assert "H_min certified = 0.228447" in out


def test_witness_bb84_output(run):
    code, out, _ = run("witness", "--preset", "bb84")
    assert code == EXIT_OK
    assert "T = 2.000000" in out
    assert "H_min certified = 0.000000" in out
    assert "-0.000000" not in out


def test_witness_json_and_manifest(run, tmp_path):
    out_path = tmp_path / "w.json"
    emitted = tmp_path / "dev.json"
    code, _, _ = run(
        "witness",
        "--preset",
        "qrac",
        "--out",
        str(out_path),
        "--emit-device",
        str(emitted),
    )
    assert code == EXIT_OK
    doc = json.loads(out_path.read_text())
    assert doc["t_value"] == pytest.approx(QB, abs=1e-12)
    assert doc["h_min"] == pytest.approx(0.228446696836, abs=1e-9)
    assert len(doc["table"]) == 4 and len(doc["table"][0]) == 2

    # the device round-trips through its JSON form
    reloaded = load_device(str(emitted))
    np.testing.assert_allclose(
        behavior_table(reloaded).e, behavior_table(qrac_preset()).e, atol=1e-15
    )

    # the manifest anchors on --out, not on the secondary device file
    manifest = json.loads((tmp_path / "w.json.manifest.json").read_text())
    assert manifest["command"] == "witness"
    assert str(out_path) in manifest["output_paths"]
    assert str(emitted) in manifest["output_paths"]


def test_witness_requires_device_choice(run):
    code, _, _ = run("witness")
    assert code == EXIT_USAGE


def test_device_jsonable_round_trip():
    device = qrac_preset()
    rebuilt = device_from_jsonable(device_to_jsonable(device))
    np.testing.assert_allclose(
        behavior_table(rebuilt).e, behavior_table(device).e, atol=1e-15
    )


def test_device_file_syntax_error(run, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{\n  "preparations": [,]\n}\n')
    code, _, err = run("witness", "--device", str(bad))
    assert code == EXIT_USAGE
    assert "line 2" in err


def test_device_file_structural_error(run, tmp_path):
    doc = device_to_jsonable(qrac_preset())
    del doc["measurements"][0]["theta"]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    code, _, err = run("witness", "--device", str(bad))
    assert code == EXIT_USAGE
    assert "measurements[0]" in err


def test_device_file_missing(run, tmp_path):
    code, _, err = run("witness", "--device", str(tmp_path / "nope.json"))
    assert code == EXIT_IO
    assert "error:" in err


def test_witness_unwritable_out(run, tmp_path):
    target = tmp_path / "no_such_dir" / "w.json"
    code, _, err = run("witness", "--preset", "qrac", "--out", str(target))
    assert code == EXIT_IO
    assert not target.exists()


# --- oracle ------------------------------------------------------------------


def test_oracle_reports_reference_point(run, tmp_path):
    out = tmp_path / "oracle.json"
    code, stdout, _ = run(
        "oracle", "--t", "2.7", "--resolution", "9", "--band", "0.05", "--out", str(out)
    )
    assert code == EXIT_OK
    assert "p_guess = 0.961939766256" in stdout
    doc = json.loads(out.read_text())
    assert doc["p_guess"] == pytest.approx(0.961939766255643, abs=1e-12)
    assert doc["h_min"] == pytest.approx(-math.log2(0.961939766255643), abs=1e-9)
    assert {"preparations", "measurement_0", "measurement_1"} <= doc["argmax"].keys()
    assert (tmp_path / "oracle.json.manifest.json").exists()


def test_oracle_infeasible_band(run):
    code, _, err = run("oracle", "--t", "2.82", "--resolution", "5", "--band", "1e-4")
    assert code == EXIT_NO_VIOLATION
    assert "error:" in err


def test_oracle_bad_resolution(run):
    code, _, _ = run("oracle", "--t", "2.5", "--resolution", "4")
    assert code == EXIT_USAGE


# --- usage errors ------------------------------------------------------------


def test_simulate_requires_n(run):
    code, _, _ = run("simulate", "--preset", "qrac")
    assert code == EXIT_USAGE


def test_simulate_rejects_zero_rounds(run):
    code, _, _ = run("simulate", "--preset", "qrac", "--n", "0")
    assert code == EXIT_USAGE


def test_simulate_rejects_bad_confidence(run, tmp_path):
    code, _, _ = run(
        "simulate",
        "--preset",
        "qrac",
        "--n",
        "100",
        "--confidence",
        "1.5",
        "--out",
        str(tmp_path / "r.json"),
    )
    assert code == EXIT_USAGE


def test_curve_rejects_low_t_min(run):
    code, _, err = run("curve", "--t-min", "1.5")
    assert code == EXIT_USAGE
    assert "t-min" in err


def test_curve_rejects_t_max_above_bound(run):
    code, _, _ = run("curve", "--t-max", "2.9")
    assert code == EXIT_USAGE


def test_bad_seed_rejected(run):
    code, _, _ = run("simulate", "--preset", "qrac", "--n", "10", "--seed", "-3")
    assert code == EXIT_USAGE


def test_version_flag(run):
    code, out, _ = run("--version")
    assert code == 0
    assert re.match(r"sdirand \d+\.\d+\.\d+", out)


def test_curve_grid_default_matches_library():
    assert _curve_grid(2.0, QB, 0.02) == list(default_curve_grid())


# --- simulate ----------------------------------------------------------------


def test_simulate_report_and_round_log(run, tmp_path):
    out = tmp_path / "report.json"
    log_path = tmp_path / "rounds.csv"
    code, stdout, _ = run(
        "simulate",
        "--preset",
        "qrac",
        "--n",
        "10000",
        "--seed",
        "7",
        "--out",
        str(out),
        "--round-log",
        str(log_path),
        "--threads",
        "4",
    )
    assert code == EXIT_OK
    assert "t_hat = " in stdout and "t_lower = " in stdout

    doc = json.loads(out.read_text())
    assert set(doc) == {
        "device",
        "n_rounds",
        "seed",
        "noise",
        "consumed_input_bits",
        "report",
        "assumption",
    }
    assert doc["n_rounds"] == 10000
    assert doc["consumed_input_bits"] == 30000
    assert doc["report"]["t_hat"] == pytest.approx(2.828, abs=0.05)
    assert doc["report"]["t_lower"] < doc["report"]["t_hat"]
    assert "identically distributed" in doc["assumption"]

    lines = log_path.read_text().splitlines()
    assert lines[0] == "round_index,a,y,b"
    assert len(lines) == 10001
    assert re.fullmatch(r"0,[01]{2},[01],[01]", lines[1])

    manifest = json.loads((tmp_path / "report.json.manifest.json").read_text())
    assert manifest["rng_seeds"] == {"rounds": 7}
    assert manifest["parameters"]["threads"] == 4
    assert str(log_path) in manifest["output_paths"]


def test_simulate_manifest_override(run, tmp_path):
    out = tmp_path / "r.json"
    manifest_path = tmp_path / "custom_manifest.json"
    code, _, _ = run(
        "simulate",
        "--preset",
        "qrac",
        "--n",
        "1000",
        "--out",
        str(out),
        "--manifest",
        str(manifest_path),
    )
    assert code == EXIT_OK
    assert manifest_path.exists()
    assert not (tmp_path / "r.json.manifest.json").exists()
    assert json.loads(manifest_path.read_text())["command"] == "simulate"


# --- expand ------------------------------------------------------------------


def expand_args(tmp_path, curve_file, *extra):
    return (
        "expand",
        "--preset",
        "qrac",
        "--n",
        "200000",
        "--seed",
        "1",
        "--curve",
        curve_file,
        "--out",
        str(tmp_path / "out.bin"),
        *extra,
    )


def test_expand_produces_bits(run, tmp_path, curve_file):
    code, stdout, _ = run(*expand_args(tmp_path, curve_file))
    assert code == EXIT_OK
    assert "status: ok" in stdout

    payload = json.loads((tmp_path / "out.bin.report.json").read_text())
    assert payload["status"] == "ok"
    assert payload["produced_output_bits"] > 0
    assert payload["output_file"] == str(tmp_path / "out.bin")
    assert payload["curve_file"] == curve_file
    assert payload["report"]["h_min_certified"] > 0

    blob = (tmp_path / "out.bin").read_bytes()
    assert len(blob) == -(-payload["produced_output_bits"] // 8)

    manifest = json.loads((tmp_path / "out.bin.manifest.json").read_text())
    assert manifest["rng_seeds"] == {"rounds": 1, "extractor": 1}
    assert curve_file in manifest["input_paths"]


def test_expand_reruns_bit_identical(run, tmp_path, curve_file):
    first = tmp_path / "a"
    second = tmp_path / "b"
    first.mkdir()
    second.mkdir()
    code_a, _, _ = run(*expand_args(first, curve_file))
    code_b, _, _ = run(*expand_args(second, curve_file))
    assert code_a == code_b == EXIT_OK
    assert (first / "out.bin").read_bytes() == (second / "out.bin").read_bytes()


def test_expand_classical_device_no_violation(run, tmp_path, curve_file):
    code, stdout, _ = run(
        "expand",
        "--preset",
        "bb84",
        "--n",
        "50000",
        "--curve",
        curve_file,
        "--out",
        str(tmp_path / "out.bin"),
    )
    assert code == EXIT_NO_VIOLATION
    assert "status: no violation" in stdout
    assert not (tmp_path / "out.bin").exists()
    payload = json.loads((tmp_path / "out.bin.report.json").read_text())
    assert payload["status"] == "no violation"
    assert payload["produced_output_bits"] == 0
    assert payload["output_file"] is None
    assert payload["report"]["h_min_certified"] == 0.0


def test_expand_noisy_device_no_violation(run, tmp_path, curve_file):
    code, _, _ = run(
        *expand_args(tmp_path, curve_file, "--depolarizing-q", "1.0")
    )
    assert code == EXIT_NO_VIOLATION
    assert not (tmp_path / "out.bin").exists()


def test_expand_missing_curve_file(run, tmp_path):
    code, _, err = run(
        "expand",
        "--preset",
        "qrac",
        "--n",
        "1000",
        "--curve",
        str(tmp_path / "absent.csv"),
        "--out",
        str(tmp_path / "out.bin"),
    )
    assert code == EXIT_IO
    assert "not found" in err


def test_expand_malformed_curve_file(run, tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("not,a,curve\n1,2,3\n")
    code, _, _ = run(
        "expand",
        "--preset",
        "qrac",
        "--n",
        "1000",
        "--curve",
        str(bad),
        "--out",
        str(tmp_path / "out.bin"),
    )
    assert code == EXIT_USAGE


def test_expand_rejects_bad_epsilon(run, tmp_path, curve_file):
    code, _, _ = run(*expand_args(tmp_path, curve_file, "--epsilon", "2.0"))
    assert code == EXIT_USAGE
