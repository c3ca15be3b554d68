import csv
import io
import json
import math
from pathlib import Path

import pytest

from etbell import formats
from etbell.cli import main
from etbell.lhv import InstructionSet, LhvModel, paper_model

ROOT = Path(__file__).resolve().parents[1]
GENUINE_CONFIG = ROOT / "configs" / "genuine_1km.ini"


def run_cli(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_simulate_quantum_report(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, stdout, _ = run_cli(["simulate", "--scheme", "genuine", "--source", "qm",
                               "--phases", "0,1.5708,-0.7854,0.7854", "--trials", 200_000,
                               "--seed", 7, "--out", out], capsys)
    assert code == 0
    assert stdout.startswith("beta = ")
    report = formats.RunReport.from_json(out.read_text())
    est = report.estimate
    assert abs(est["beta_hat"] - 2 * math.sqrt(2)) <= 4 * est["stderr"] + 1e-4
    assert report.schema_version == 1
    assert report.runtime["threads"] == 1
    assert sum(report.split_fractions.values()) == pytest.approx(1.0)


def test_simulate_lhv_endpoint(capsys):
    code, stdout, stderr = run_cli(["simulate", "--scheme", "franson", "--source", "lhv",
                                    "--p", "1.0", "--trials", 100_000, "--seed", 1], capsys)
    assert code == 0
    report = json.loads(stdout)
    assert report["estimate"]["beta_hat"] == 4.0
    assert "beta = 4.000000" in stderr


@pytest.mark.parametrize("argv", [
    ["simulate", "--trials", "0"],
    ["simulate", "--scheme", "nope"],
    ["simulate", "--phases", "0,1,2"],
    ["simulate", "--source", "lhv"],
    ["simulate", "--source", "lhv", "--p", "2"],
    ["simulate", "--source", "qm", "--p", "0.5"],
    ["enumerate", "--class", "bogus"],
    ["fake", "--target", "5"],
    ["validate", "--config", "/nonexistent.ini"],
])
def test_usage_errors_exit_2(argv, capsys):
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    capsys.readouterr()
    assert code == 2


def test_runtime_failure_exit_3(tmp_path, capsys):
    model_file = tmp_path / "m.txt"
    model_file.write_text("S+ L+ S+ S+ 1\n")
    code, _, err = run_cli(["simulate", "--source", "lhv", "--model-file", model_file,
                            "--trials", 100], capsys)
    assert code == 3
    assert "no kept" in err


def test_model_file_round_trip(tmp_path, capsys):
    path = tmp_path / "model.txt"
    code, _, _ = run_cli(["export-model", "--p", "0.25", "--out", path], capsys)
    assert code == 0
    assert formats.load_model(path) == paper_model(0.25)
    code, stdout, _ = run_cli(["simulate", "--source", "lhv", "--model-file", path,
                               "--scheme", "franson", "--trials", 1000, "--no-timestamp"], capsys)
    from_file = json.loads(stdout)
    code, stdout, _ = run_cli(["simulate", "--source", "lhv", "--p", "0.25",
                               "--scheme", "franson", "--trials", 1000, "--no-timestamp"], capsys)
    from_p = json.loads(stdout)
    assert from_file["tallies"] == from_p["tallies"]


def test_model_file_grammar():
    text = "# comment\n\nS+ S+ S+ S+ 1/4  # trailing\nS- S- S- S- 0.75\n"
    model = formats.parse_model(text)
    assert model == LhvModel({InstructionSet.parse("S+ S+ S+ S+"): 0.25,
                              InstructionSet.parse("S- S- S- S-"): 0.75})
    for bad in ["S+ S+ S+ 1", "S+ S+ S+ X+ 1", "S+ S+ S+ S+ 0.5", "", "S+ S+ S+ S+ 1/0"]:
        with pytest.raises(ValueError):
            formats.parse_model(bad)


def test_enumerate(capsys):
    code, stdout, _ = run_cli(["enumerate", "--class", "path-fixed", "--scheme", "genuine"], capsys)
    assert code == 0
    data = json.loads(stdout)
    assert (data["max_beta"], data["min_beta"]) == (2.0, -2.0)
    code, stdout, _ = run_cli(["enumerate", "--class", "path-dependent", "--scheme", "franson"], capsys)
    data = json.loads(stdout)
    assert (data["max_beta"], data["min_beta"]) == (4.0, -4.0)
    assert len(data["argmax"]) == 32


def test_fake(capsys):
    code, stdout, _ = run_cli(["fake", "--target", "2.8284", "--trials", 20_000], capsys)
    assert code == 0
    data = json.loads(stdout)
    assert data["p"] == pytest.approx(0.85355, abs=1e-5)
    assert data["exact_beta"] == pytest.approx(2.8284, abs=1e-12)


def test_validate_pass_and_fail(tmp_path, capsys):
    code, stdout, _ = run_cli(["validate", "--config", GENUINE_CONFIG], capsys)
    assert code == 0
    assert json.loads(stdout)["all_pass"]
    bad = tmp_path / "bad.ini"
    bad.write_text(GENUINE_CONFIG.read_text().replace("dead_time = 1e-9", "dead_time = 2e-9"))
    code, stdout, _ = run_cli(["validate", "--config", bad], capsys)
    assert code == 1
    malformed = tmp_path / "m.ini"
    malformed.write_text("[geometry]\nscheme = genuine\ndelta_l = abc\n")
    code, _, _ = run_cli(["validate", "--config", malformed], capsys)
    assert code == 2


def test_simulate_config_defaults(capsys):
    code, stdout, _ = run_cli(["simulate", "--config", GENUINE_CONFIG, "--trials", 5000,
                               "--no-timestamp"], capsys)
    assert code == 0
    report = json.loads(stdout)
    assert report["config"]["seed"] == 7
    assert report["config"]["n_trials"] == 5000
    assert report["config"]["scheme"] == "genuine"


def test_identical_invocations_byte_identical(tmp_path, capsys):
    paths = []
    for threads in (1, 4):
        path = tmp_path / f"r{threads}.json"
        run_cli(["simulate", "--source", "lhv", "--p", "0.7", "--trials", 50_000, "--seed", 5,
                 "--threads", threads, "--no-timestamp", "--out", path], capsys)
        paths.append(path.read_bytes())
    assert paths[0] == paths[1]


def test_json_round_trip(capsys):
    code, stdout, _ = run_cli(["simulate", "--trials", 3000, "--seed", 2], capsys)
    report = formats.RunReport.from_json(stdout)
    assert report.to_json() == stdout
    assert formats.RunReport.from_dict(report.to_dict()) == report
    with pytest.raises(ValueError):
        formats.RunReport.from_dict({**report.to_dict(), "schema_version": 99})


def test_csv_matches_json_to_15_digits(capsys):
    argv = ["simulate", "--source", "qm", "--trials", 4000, "--seed", 3, "--no-timestamp"]
    _, json_text, _ = run_cli(argv, capsys)
    _, csv_text, _ = run_cli(argv + ["--format", "csv"], capsys)
    flat = dict(formats.flatten(json.loads(json_text)))
    rows = list(csv.reader(io.StringIO(csv_text)))
    assert rows[0] == ["key", "value"]
    assert len(rows) - 1 == len(flat)
    for key, value in rows[1:]:
        expected = flat[key]
        if isinstance(expected, float):
            assert float(value) == float(f"{expected:.15g}")
        elif isinstance(expected, int) and not isinstance(expected, bool):
            assert int(value) == expected
