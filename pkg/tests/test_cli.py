import csv
import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from liouvillekit import cli

DESCRIPTORS = Path(__file__).resolve().parent.parent / "descriptors"
EXP_SYM = str(DESCRIPTORS / "exp-symmetric-cat.json")
EXP_COS = str(DESCRIPTORS / "exp-cos-cat.json")
EXP_COS_QUARTER = str(DESCRIPTORS / "exp-cos-quarter-cat.json")


def run_main(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    report = json.loads(out) if out.strip() else None
    return code, report, err


def payload_fields(report):
    return {k: v for k, v in report.items() if k != "wall_time"}


class TestSuite:
    def test_cat_suite_passes(self, capsys):
        code, report, err = run_main(capsys, "suite", "--model", "cat")
        assert code == cli.EXIT_OK, err
        assert report["ok"] and report["checks"]
        assert all(c["ok"] for c in report["checks"])

    def test_unknown_model(self, capsys):
        code, _, err = run_main(capsys, "suite", "--model", "torus")
        assert code == cli.EXIT_USAGE
        assert "torus" in err


class TestExitCodes:
    def test_malformed_json(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"model": "cat", "gauge": ')
        code, report, err = run_main(capsys, "verify", bad)
        assert code == cli.EXIT_USAGE and report is None
        assert "error" in err

    def test_missing_descriptor(self, capsys, tmp_path):
        code, _, _ = run_main(capsys, "verify", tmp_path / "nope.json")
        assert code == cli.EXIT_USAGE

    def test_da_precondition(self, capsys):
        code, _, err = run_main(capsys, "da-check", "--nubar", "2.0", "--mu", "1.0")
        assert code == cli.EXIT_USAGE
        assert "nubar" in err

    def test_check_failure_reports_point(self, capsys):
        code, report, err = run_main(capsys, "verify", EXP_COS)
        assert code == cli.EXIT_CHECK
        assert not report["ok"]
        assert "FAILED invariants" in err
        failures = report["checks"][0]["failures"]
        assert failures and all(" at " in f and "x=(" in f for f in failures)

    @pytest.mark.parametrize("argv", [
        ["verify", EXP_SYM, "--grid", "4"],
        ["verify", EXP_SYM, "--tol", "0"],
        ["verify", EXP_SYM, "--tol", "-1e-9"],
        ["verify", EXP_SYM, "--window=2,-2"],
        ["verify", EXP_SYM, "--window", "1,2,3"],
        ["bunching", "cat", "--tmax", "0.5"],
        ["flow", EXP_SYM],
        ["flow", EXP_SYM, "--start", "9,0,0,0"],
        ["persist", EXP_SYM, "--perturb", "{not json"],
        ["frobnicate"],
    ])
    def test_usage_errors(self, capsys, argv):
        code, report, _ = run_main(capsys, *argv)
        assert code == cli.EXIT_USAGE and report is None

    def test_unwritable_output(self, capsys, tmp_path):
        code, _, err = run_main(capsys, "skeleton", EXP_SYM, "--grid", "8", "--out",
                                tmp_path / "missing" / "out.csv")
        assert code == cli.EXIT_IO
        assert "does not exist" in err

    def test_output_is_directory(self, capsys, tmp_path):
        code, _, _ = run_main(capsys, "verify", EXP_SYM, "--out", tmp_path)
        assert code == cli.EXIT_IO


class TestCSV:
    def test_skeleton_line_count(self, capsys, tmp_path):
        out = tmp_path / "sk.csv"
        code, report, _ = run_main(capsys, "skeleton", EXP_COS_QUARTER, "--grid", "16",
                                   "--out", out)
        assert code == cli.EXIT_OK
        lines = out.read_text().splitlines()
        assert len(lines) == 257
        assert lines[0] == "u,v,theta,s_star,residual,normal_expansion"
        assert report["payload"]["n_points"] == 256

    def test_rows_sorted_and_fixed_precision(self, capsys, tmp_path):
        out = tmp_path / "sk.csv"
        run_main(capsys, "skeleton", EXP_SYM, "--grid", "8", "--out", out)
        rows = list(csv.reader(out.open()))[1:]
        keys = [tuple(float(v) for v in r[:3]) for r in rows]
        assert keys == sorted(keys)
        for r in rows:
            for v in r:
                assert len(v.lstrip("-").replace(".", "").split("e")[0].lstrip("0")) <= 15

    def test_failed_check_still_writes_table(self, capsys, tmp_path):
        # the amplitude-0.5 cosine system loses normal expansion somewhere on the grid
        out = tmp_path / "sk.csv"
        code, report, err = run_main(capsys, "skeleton", EXP_COS, "--grid", "16", "--out", out)
        assert code == cli.EXIT_CHECK
        assert "normal_expansion_positive" in err
        failed = [c for c in report["checks"] if not c["ok"]]
        assert failed[0]["min"] < 0 and len(failed[0]["point"]) == 3
        assert len(out.read_text().splitlines()) == 257

    def test_rerun_is_byte_identical(self, capsys, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run_main(capsys, "skeleton", EXP_COS, "--grid", "16", "--seed", "5", "--out", a)
        run_main(capsys, "skeleton", EXP_COS, "--grid", "16", "--seed", "5", "--out", b)
        assert a.read_bytes() == b.read_bytes()

    def test_empty_grid_is_header_only(self, tmp_path):
        out = tmp_path / "empty.csv"
        cli.export_csv(out, ["q1", "q2", "theta", "s_star"], [])
        assert out.read_text() == "q1,q2,theta,s_star\n"

    def test_negative_zero_is_normalised(self):
        assert cli.format_csv(["a"], [[-0.0]]) == "a\n0\n"

    def test_flow_csv(self, capsys, tmp_path):
        out = tmp_path / "flow.csv"
        code, report, _ = run_main(capsys, "flow", EXP_SYM, "--start", "1,0.1,0.2,0.3",
                                   "--start", "-1,0,0,0.5", "--T", "-0.5", "--dt", "0.01",
                                   "--out", out)
        assert code == cli.EXIT_OK
        rows = list(csv.reader(out.open()))
        assert rows[0] == ["orbit", "t", "s", "u", "v", "theta"]
        assert len(rows) == 1 + 2 * 51
        # backward flow pulls toward the skeleton s = 0
        assert all(abs(s) < 1 for s in report["payload"]["final_s"])


class TestReport:
    def test_hash_and_seed(self, capsys):
        _, a, _ = run_main(capsys, "verify", EXP_SYM, "--seed", "7")
        _, b, _ = run_main(capsys, "verify", EXP_SYM, "--seed", "7")
        _, c, _ = run_main(capsys, "verify", EXP_SYM, "--seed", "8")
        assert a["seed"] == 7 and len(a["config_hash"]) == 64
        assert a["config_hash"] == b["config_hash"] != c["config_hash"]
        assert payload_fields(a) == payload_fields(b)

    def test_schema(self, capsys):
        _, report, _ = run_main(capsys, "da-check", "--grid", "21")
        assert set(report) == {"command", "config", "config_hash", "seed", "backend", "ok",
                               "checks", "payload", "wall_time"}
        assert report["payload"]["liouville_at_zero"] == pytest.approx(4.0)
        assert report["payload"]["non_anosov_certificate"] is True

    def test_output_path_does_not_change_hash(self, capsys, tmp_path):
        _, a, _ = run_main(capsys, "verify", EXP_SYM)
        _, b, _ = run_main(capsys, "verify", EXP_SYM, "--report", tmp_path / "r.json")
        assert a["config_hash"] == b["config_hash"]
        assert json.loads((tmp_path / "r.json").read_text())["config_hash"] == a["config_hash"]

    def test_descriptor_content_changes_hash(self, capsys, tmp_path):
        d = tmp_path / "d.json"
        d.write_text(Path(EXP_SYM).read_text())
        _, a, _ = run_main(capsys, "verify", d)
        desc = json.loads(d.read_text())
        desc["window"] = [-4, 4]
        d.write_text(json.dumps(desc))
        _, b, _ = run_main(capsys, "verify", d)
        assert a["config_hash"] != b["config_hash"]

    def test_lis_verify_alias(self, capsys):
        code, report, _ = run_main(capsys, "lis", "verify", EXP_SYM)
        assert code == cli.EXIT_OK and report["command"] == "verify"

    @pytest.mark.parametrize("flag", [["--window", "-2,2"], ["--window=-2,2"]])
    def test_window_override(self, capsys, flag):
        code, report, _ = run_main(capsys, "verify", EXP_SYM, *flag)
        assert code == cli.EXIT_OK
        assert report["config"]["window"] == [-2.0, 2.0]
        assert report["payload"]["window"] == [-2.0, 2.0]


class TestCommands:
    def test_bunching_json(self, capsys):
        code, report, _ = run_main(capsys, "bunching", "cat", "--tmax", "8", "--orbits", "4")
        assert code == cli.EXIT_OK
        assert report["payload"]["B_s"] == pytest.approx(2.0, abs=1e-12)

    def test_bunching_threads_env(self, capsys, monkeypatch):
        _, a, _ = run_main(capsys, "bunching", "da-chart", "--tmax", "4", "--orbits", "12")
        monkeypatch.setenv(cli.THREADS_ENV, "3")
        assert cli.config_from_args(["bunching", "cat"]).threads == 3
        _, b, _ = run_main(capsys, "bunching", "da-chart", "--tmax", "4", "--orbits", "12")
        assert payload_fields(a) == payload_fields(b)

    def test_persist_expected_ratio(self, capsys):
        code, report, _ = run_main(capsys, "persist", EXP_SYM, "--eps-list", "1e-3",
                                   "--expect-ratio", "0.5", "--grid", "8")
        assert code == cli.EXIT_OK
        assert report["payload"]["sweep"][0]["ratio"] == pytest.approx(0.5, rel=1e-6)

    def test_persist_wrong_expectation_fails(self, capsys):
        code, report, err = run_main(capsys, "persist", EXP_SYM, "--eps-list", "1e-3",
                                     "--expect-ratio", "0.4", "--grid", "8")
        assert code == cli.EXIT_CHECK and "linear_response" in err

    def test_persist_json_perturbation(self, capsys):
        spec = json.dumps({"type": "cos_theta", "params": {"c0": 0, "a": 1}})
        code, report, _ = run_main(capsys, "persist", EXP_SYM, "--perturb", spec,
                                   "--eps-list", "1e-3", "--grid", "8")
        assert code == cli.EXIT_OK

    def test_da_check_default(self, capsys):
        code, report, _ = run_main(capsys, "da-check", "--grid", "51")
        assert code == cli.EXIT_OK
        assert report["payload"]["min_contact_plus"] == pytest.approx(0.5, abs=1e-12)


def test_console_entry_point(tmp_path):
    env = dict(os.environ)
    res = subprocess.run([sys.executable, "-m", "liouvillekit.cli", "verify", EXP_SYM,
                          "--grid", "8"], capture_output=True, text=True, env=env)
    assert res.returncode == 0, res.stderr
    assert json.loads(res.stdout)["ok"]
    res = subprocess.run([sys.executable, "-m", "liouvillekit.cli", "verify"],
                         capture_output=True, text=True, env=env)
    assert res.returncode == 2
