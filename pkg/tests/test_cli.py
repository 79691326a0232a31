import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest

from ortho_subselect import read_matrix_text
from ortho_subselect.cli import StudyConfig, run_study, study_summary

CMD = [sys.executable, "-m", "ortho_subselect"]


def run_cli(*args, env=None, cwd=None):
    full_env = dict(os.environ)
    if env:
        full_env.update(env)
    return subprocess.run(
        CMD + list(args), capture_output=True, text=True, env=full_env, cwd=cwd
    )


def test_gen_walsh_writes_matrix_and_report(tmp_path):
    out = tmp_path / "w.txt"
    res = run_cli("gen", "--kind", "walsh", "--n", "4", "--M", "8",
                  "--output", str(out))
    assert res.returncode == 0
    report = json.loads(res.stdout)
    assert report["t"] == 1.0
    mat = read_matrix_text(out)
    assert np.all(np.abs(np.abs(mat) - 1 / math.sqrt(8)) == 0.0)


def test_gen_rejects_bad_walsh_size(tmp_path):
    res = run_cli("gen", "--kind", "walsh", "--n", "4", "--M", "12",
                  "--output", str(tmp_path / "w.txt"))
    assert res.returncode == 1
    assert "power of 2" in res.stderr


def test_gen_random_is_deterministic(tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    r1 = run_cli("gen", "--kind", "random", "--n", "4", "--M", "64",
                 "--seed", "7", "--output", str(a))
    r2 = run_cli("gen", "--kind", "random", "--n", "4", "--M", "64",
                 "--seed", "7", "--output", str(b))
    assert r1.returncode == r2.returncode == 0
    assert a.read_bytes() == b.read_bytes()
    assert r1.stdout == r2.stdout


def test_usage_errors_exit_2(tmp_path):
    res = run_cli("gen", "--kind", "nope", "--n", "1", "--M", "2",
                  "--output", str(tmp_path / "x.txt"))
    assert res.returncode == 2
    res = run_cli("frobnicate")
    assert res.returncode == 2


def test_select_certify_round_trip(tmp_path):
    mat = tmp_path / "w.txt"
    cert_path = tmp_path / "cert.json"
    trace_path = tmp_path / "trace.json"
    run_cli("gen", "--kind", "walsh", "--n", "16", "--M", "256",
            "--output", str(mat))
    res = run_cli("select", "--input", str(mat), "--epsilon", "0.5",
                  "--seed", "42", "--output", str(cert_path),
                  "--trace", str(trace_path))
    assert res.returncode == 0
    assert res.stdout.startswith("|I|=")
    cert = json.loads(cert_path.read_text())
    assert cert["epsilon_achieved"] <= 0.5
    assert len(cert["subset"]) < 256

    recheck = run_cli("certify", "--input", str(mat),
                      "--subset", str(cert_path), "--epsilon", "0.5")
    assert recheck.returncode == 0
    recert = json.loads(recheck.stdout)
    assert recert["lambda_min"] == cert["lambda_min"]
    assert recert["lambda_max"] == cert["lambda_max"]
    assert recert["subset"] == cert["subset"]

    trace = json.loads(trace_path.read_text())
    assert trace["final_subset"] == cert["subset"]
    assert trace["epsilon_target"] == 0.5


def test_select_loose_budget_and_min_size(tmp_path):
    mat = tmp_path / "t.txt"
    run_cli("gen", "--kind", "trig", "--n", "3", "--M", "11",
            "--output", str(mat))
    res = run_cli("select", "--input", str(mat), "--epsilon", "0.999",
                  "--output", str(tmp_path / "c1.json"))
    assert res.returncode == 0
    res = run_cli("select", "--input", str(mat), "--epsilon", "0.5",
                  "--min-size", "11", "--output", str(tmp_path / "c2.json"))
    assert res.returncode == 0
    cert = json.loads((tmp_path / "c2.json").read_text())
    assert cert["epsilon_achieved"] <= 1e-10
    assert len(cert["subset"]) == 11


def test_certify_inline_subset_failure_path(tmp_path):
    mat = tmp_path / "skew.txt"
    a = math.sqrt(0.8)
    b = math.sqrt(0.2)
    mat.write_text(f"1 2\n{a:.17g} {b:.17g}\n")
    res = run_cli("certify", "--input", str(mat), "--subset", "1",
                  "--epsilon", "0.5")
    assert res.returncode == 1  # achieved 0.6 > 0.5
    cert = json.loads(res.stdout)
    assert abs(cert["epsilon_achieved"] - 0.6) <= 1e-12
    res = run_cli("certify", "--input", str(mat), "--subset", "1,2",
                  "--epsilon", "1e-9")
    assert res.returncode == 0
    res = run_cli("certify", "--input", str(mat), "--subset", "3",
                  "--epsilon", "0.5")
    assert res.returncode == 1
    assert "error" in res.stderr


def test_certify_rejects_malformed_matrix(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("2 2\n1 0\n")
    res = run_cli("certify", "--input", str(bad), "--subset", "1",
                  "--epsilon", "0.5")
    assert res.returncode == 1


def test_select_rejects_non_orthonormal_matrix(tmp_path):
    skewed = tmp_path / "skewed.txt"
    skewed.write_text("2 3\n1 0 0\n1 1 0\n")
    res = run_cli("select", "--input", str(skewed), "--epsilon", "0.5",
                  "--output", str(tmp_path / "c.json"))
    assert res.returncode == 1
    assert "orthonormal" in res.stderr


def test_study_csv_shape(tmp_path):
    csv_path = tmp_path / "study.csv"
    res = run_cli("study", "--kind", "walsh", "--n-list", "8", "--m-factor",
                  "16", "--epsilon", "0.5", "--trials", "1", "--seed", "0",
                  "--output", str(csv_path))
    assert res.returncode == 0
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "n,M,trial,final_size,epsilon_achieved,steps,total_retries,ratio"
    assert len(lines) == 2
    fields = lines[1].split(",")
    assert fields[0] == "8" and fields[1] == "128" and fields[2] == "0"
    assert float(fields[7]) > 0.0
    summary = json.loads(res.stdout)
    assert summary["per_n"][0]["n"] == 8
    assert summary["median_ratio_spread"] >= 1.0


def test_study_api_matches_cli(tmp_path):
    cfg = StudyConfig(kind="walsh", n_list=(8,), m_factor=16, epsilon=0.5,
                      trials=2, seed=3)
    rows = run_study(cfg)
    assert len(rows) == 2
    for row in rows:
        assert row.epsilon_achieved <= 0.5
        assert row.ratio == row.final_size / (8 * math.log(8))
    summary = study_summary(cfg, rows)
    assert set(summary) >= {"per_n", "median_ratio_min", "median_ratio_max",
                            "median_ratio_spread"}


def test_verify_suites_pass(tmp_path):
    res = run_cli("verify", "--suite", "quasimetric", "--trials", "5000",
                  "--seed", "1")
    assert res.returncode == 0
    lines = [json.loads(ln) for ln in res.stdout.splitlines()]
    assert all(ln["pass"] for ln in lines)
    assert any(ln["check"].startswith("quasi_triangle") for ln in lines)

    res = run_cli("verify", "--suite", "process", "--trials", "20", "--seed", "1")
    assert res.returncode == 0
    lines = [json.loads(ln) for ln in res.stdout.splitlines()]
    fixture = [ln for ln in lines if ln["check"] == "process_fixture_span_e1"][0]
    assert fixture["mean"] == 1.0

    res = run_cli("verify", "--suite", "sudakov", "--trials", "2000", "--seed", "1")
    assert res.returncode == 0


def test_cli_outputs_are_byte_identical(tmp_path):
    args = ("select", "--input", None, "--epsilon", "0.6", "--seed", "11")
    mat = tmp_path / "w.txt"
    run_cli("gen", "--kind", "walsh", "--n", "8", "--M", "64",
            "--output", str(mat))
    outs = []
    for tag in ("one", "two"):
        cert = tmp_path / f"{tag}.json"
        res = run_cli("select", "--input", str(mat), "--epsilon", "0.6",
                      "--seed", "11", "--output", str(cert))
        outs.append((res.stdout, cert.read_bytes()))
    assert outs[0] == outs[1]


def test_study_deterministic_under_parallelism(tmp_path):
    blobs = []
    for threads in ("1", "4", "0"):
        csv_path = tmp_path / f"study_{threads}.csv"
        res = run_cli("study", "--kind", "walsh", "--n-list", "8,16",
                      "--m-factor", "8", "--epsilon", "0.5", "--trials", "3",
                      "--seed", "5", "--output", str(csv_path),
                      env={"ORTHO_SUBSELECT_THREADS": threads})
        assert res.returncode == 0
        blobs.append((res.stdout, csv_path.read_bytes()))
    assert blobs[0] == blobs[1] == blobs[2]
