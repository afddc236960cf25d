import json
import subprocess
import sys

import pytest

from subshift_lab.cli import main


def run_cli(args):
    proc = subprocess.run(
        [sys.executable, "-m", "subshift_lab.cli", *args],
        capture_output=True,
        text=True,
    )
    return proc


def test_analyze_report():
    proc = run_cli(["analyze", "--inline", "1: 112; 2: 221"])
    assert proc.returncode == 0
    doc = json.loads(proc.stdout)
    assert doc["matrix"] == [["2", "1"], ["1", "2"]]
    assert doc["eigenvector_theta_1"] == ["1", "-1"]
    assert doc["liminf_constant_theta_1"] == "4"
    assert doc["constant_length"] == 3
    assert doc["primitive"] is True


def test_analyze_iet4_not_constant_length():
    proc = run_cli(["analyze", "--inline", "1: 14; 2: 14224; 3: 14232324; 4: 142324"])
    doc = json.loads(proc.stdout)
    assert doc["constant_length"] is None
    assert doc["char_poly"] == ["1", "-7", "11", "-7", "1"]
    # digit-automaton commands refuse non-constant length with a clear error
    proc = run_cli(
        ["automaton", "--inline", "1: 14; 2: 14224; 3: 14232324; 4: 142324", "--tau", "0"]
    )
    assert proc.returncode == 2
    assert "constant-length" in proc.stderr


def test_malformed_input_is_structured_error():
    proc = run_cli(["analyze", "--inline", "1 112"])
    assert proc.returncode == 2
    err = json.loads(proc.stderr.strip().splitlines()[-1])
    assert "error" in err


def test_gallery_passes(tmp_path):
    proc = run_cli(["gallery", "--out", str(tmp_path)])
    assert proc.returncode == 0
    assert "gallery: PASS" in proc.stdout
    assert (tmp_path / "nonsync2-tau1.dot").exists()
    assert (tmp_path / "sync3-tau0.dot").read_text().startswith("digraph")


def test_salem_cli():
    proc = run_cli(["salem", "--n-max", "10"])
    assert proc.returncode == 0
    doc = json.loads(proc.stdout)
    assert doc["all_salem"] is True
    assert len(doc["reports"]) == 10


def test_dist_runs_deterministically():
    args = [
        "dist", "--inline", "1: 112; 2: 221", "--t", "1", "--n", "40",
        "--samples", "20000", "--seed", "3",
    ]
    first = run_cli(args)
    second = run_cli(args)
    assert first.returncode == 0
    assert first.stdout == second.stdout
    doc = json.loads(first.stdout)
    assert doc["prediction"]["p0"] == "1/2"
    assert "KS_continuous" in doc


def test_dist_exact_mode(tmp_path):
    proc = run_cli(
        [
            "dist", "--inline", "1: 112; 2: 221", "--t", "3/2", "--n", "12",
            "--exact", "--format", "csv", "--out", str(tmp_path),
        ]
    )
    assert proc.returncode == 0
    hist = (tmp_path / "dist-exact-n12.csv").read_text().splitlines()
    assert hist[0] == "value,mass"
    masses = [float(line.split(",")[1]) for line in hist[1:]]
    assert abs(sum(masses) - 1.0) < 1e-9
    doc = json.loads((tmp_path / "dist.json").read_text())
    assert doc["mode"] == "exact"


def test_dist_growth_mode():
    proc = run_cli(
        [
            "dist", "--inline", "1: 112; 2: 221", "--t", "3/2",
            "--n", "20,40,80", "--exact",
        ]
    )
    doc = json.loads(proc.stdout)
    assert len(doc["variances"]) == 3
    assert 0.8 <= float(doc["slope"]) <= 1.1


def test_bounds_cli():
    proc = run_cli(
        ["bounds", "--inline", "1: 112; 2: 221", "--points", "3", "--horizon", "500"]
    )
    assert proc.returncode == 0
    doc = json.loads(proc.stdout)
    assert doc["C"] == "4"
    assert doc["all_below_C"] is True
    assert len(doc["probes"]) == 3


def test_simulate_cli(tmp_path):
    proc = run_cli(
        [
            "simulate", "--inline", "1: 112; 2: 221", "--t", "3/2", "--n", "25",
            "--samples", "4000", "--format", "csv", "--out", str(tmp_path),
        ]
    )
    assert proc.returncode == 0
    assert (tmp_path / "simulate-hist.csv").exists()
    doc = json.loads((tmp_path / "simulate.json").read_text())
    assert doc["n"] == 25 and doc["seed"] == 0


def test_classify_cli_block():
    proc = run_cli(
        ["classify", "--inline", "1: 112; 2: 221", "--block", "1,1", "--t", "3/2"]
    )
    assert proc.returncode == 0
    doc = json.loads(proc.stdout)
    assert doc["strongly_connected"] is True


def test_prefix_suffix_cli():
    proc = run_cli(["prefix-suffix", "--inline", "1: 12; 2: 13; 3: 23", "--format", "dot"])
    assert proc.returncode == 0
    assert proc.stdout.startswith("digraph")


def test_main_entry_point(capsys):
    code = main(["analyze", "--inline", "1: 112; 2: 221"])
    assert code == 0
    out = capsys.readouterr().out
    assert json.loads(out)["constant_length"] == 3
