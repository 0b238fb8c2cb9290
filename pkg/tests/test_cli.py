"""Command-line behavior: artifacts, manifests, determinism, exit codes."""

import hashlib
import json

import pytest

from kljn.cli import main


def run(argv):
    return main(argv)


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def check_manifest(out_dir):
    manifest = read_json(out_dir / "manifest.json")
    for name, digest in manifest["outputs"].items():
        actual = hashlib.sha256((out_dir / name).read_bytes()).hexdigest()
        assert actual == digest, f"digest mismatch for {name}"
    return manifest


class TestSimulate:
    def test_writes_session_and_manifest(self, tmp_path, capsys):
        code = run(
            ["simulate", "--bits", "20", "--samples-per-bit", "200", "--seed", "1", "--out", str(tmp_path)]
        )
        assert code == 0
        session = read_json(tmp_path / "session.json")
        assert len(session["bits"]) == 20
        assert 0.0 <= session["aggregates"]["secure_bit_fraction"] <= 1.0
        manifest = check_manifest(tmp_path)
        assert manifest["command"] == "simulate"
        assert manifest["seed"] == 1
        assert manifest["config"]["bits"] == 20
        assert "secure_fraction=" in capsys.readouterr().out
        assert not (tmp_path / "bits.csv").exists()

    def test_csv_flag_adds_per_bit_records(self, tmp_path):
        code = run(
            [
                "simulate",
                "--bits",
                "10",
                "--samples-per-bit",
                "150",
                "--seed",
                "2",
                "--csv",
                "--out",
                str(tmp_path),
            ]
        )
        assert code == 0
        lines = (tmp_path / "bits.csv").read_text().splitlines()
        assert len(lines) == 11
        assert lines[0].startswith("bit_index,")
        manifest = check_manifest(tmp_path)
        assert set(manifest["outputs"]) == {"session.json", "bits.csv"}

    def test_byte_identical_reruns(self, tmp_path):
        args = ["simulate", "--bits", "15", "--samples-per-bit", "150", "--seed", "3", "--csv"]
        d1, d2 = tmp_path / "a", tmp_path / "b"
        assert run(args + ["--out", str(d1)]) == 0
        assert run(args + ["--out", str(d2)]) == 0
        for name in ("session.json", "bits.csv", "manifest.json"):
            assert (d1 / name).read_bytes() == (d2 / name).read_bytes()

    def test_config_file_with_flag_override(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"bits": 30, "samples_per_bit": 150, "seed": 4}))
        out = tmp_path / "out"
        code = run(["simulate", "--config", str(cfg), "--bits", "12", "--out", str(out)])
        assert code == 0
        session = read_json(out / "session.json")
        assert len(session["bits"]) == 12
        manifest = read_json(out / "manifest.json")
        assert manifest["config"]["bits"] == 12
        assert manifest["config"]["samples_per_bit"] == 150

    def test_default_sigma_high_is_the_compliant_value(self, tmp_path):
        code = run(["simulate", "--bits", "5", "--samples-per-bit", "150", "--out", str(tmp_path)])
        assert code == 0
        manifest = read_json(tmp_path / "manifest.json")
        assert manifest["config"]["sigma_high"] == 2.0  # sqrt(4/1) * sigma_low

    def test_usage_errors(self, tmp_path):
        assert run(["simulate", "--bits", "0", "--out", str(tmp_path)]) == 2
        assert run(["simulate", "--kind", "cauchy", "--out", str(tmp_path)]) == 2
        assert run(["simulate", "--samples-per-bit", "50", "--out", str(tmp_path)]) == 2

    def test_bad_config_file(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text("{not json")
        assert run(["simulate", "--config", str(cfg), "--out", str(tmp_path)]) == 2
        cfg.write_text(json.dumps({"unknown_key": 1}))
        assert run(["simulate", "--config", str(cfg), "--out", str(tmp_path)]) == 2
        assert run(["simulate", "--config", str(tmp_path / "missing.json"), "--out", str(tmp_path)]) == 2


class TestAttack:
    def test_writes_accuracy_report(self, tmp_path, capsys):
        code = run(
            ["attack", "--samples", "1000", "--trials", "8", "--seed", "5", "--out", str(tmp_path)]
        )
        assert code == 0
        report = read_json(tmp_path / "attack.json")
        assert report["trials"] == 8
        assert report["correct"] + report["wrong"] + report["undecided"] == 8
        assert 0.0 <= report["accuracy"] <= 1.0
        manifest = check_manifest(tmp_path)
        assert manifest["config"]["samples"] == 1000
        assert "accuracy=" in capsys.readouterr().out

    def test_csv_flag_dumps_trials(self, tmp_path):
        code = run(
            [
                "attack",
                "--samples",
                "1000",
                "--trials",
                "6",
                "--seed",
                "5",
                "--csv",
                "--out",
                str(tmp_path),
            ]
        )
        assert code == 0
        lines = (tmp_path / "trials.csv").read_text().splitlines()
        assert lines[0] == "trial,true_alice,decision,credit"
        assert len(lines) == 7

    def test_shape_violation_detected_from_cli(self, tmp_path):
        code = run(
            [
                "attack",
                "--kind",
                "uniform",
                "--samples",
                "20000",
                "--trials",
                "10",
                "--seed",
                "6",
                "--out",
                str(tmp_path),
            ]
        )
        assert code == 0
        report = read_json(tmp_path / "attack.json")
        assert report["accuracy"] >= 0.9

    def test_usage_errors(self, tmp_path):
        assert run(["attack", "--trials", "0", "--out", str(tmp_path)]) == 2
        assert run(["attack", "--samples", "50", "--out", str(tmp_path)]) == 2
        assert run(["attack", "--significance", "0", "--out", str(tmp_path)]) == 2


class TestPdf:
    def test_gaussian_closure_from_cli(self, tmp_path):
        code = run(["pdf", "--out", str(tmp_path)])
        assert code == 0
        summary = read_json(tmp_path / "pdf.json")
        assert summary["residual"] <= 1e-6
        assert summary["kind"] == "gaussian"
        lines = (tmp_path / "pdf.csv").read_text().splitlines()
        assert lines[0] == "x,p_a,p_h"
        assert len(lines) > 1000
        x, p_a, p_h = lines[1].split(",")
        float(x), float(p_a), float(p_h)
        check_manifest(tmp_path)

    def test_uniform_residual_from_cli(self, tmp_path, capsys):
        code = run(["pdf", "--kind", "uniform", "--out", str(tmp_path)])
        assert code == 0
        summary = read_json(tmp_path / "pdf.json")
        assert summary["residual"] > 0.05
        assert summary["alpha"] == 1.6
        assert summary["beta"] == 1.2
        assert "residual=" in capsys.readouterr().out

    def test_explicit_grid_parameters(self, tmp_path):
        code = run(
            ["pdf", "--dx", "0.05", "--half-width", "40", "--sigma-low", "3.0", "--sigma-high", "4.0",
             "--r-low", "1.0", "--r-high", "1000000.0", "--out", str(tmp_path)]
        )
        # near-degenerate pair: alpha ~ 2 sigma_low, beta ~ sigma_high
        assert code == 0
        manifest = read_json(tmp_path / "manifest.json")
        assert manifest["config"]["dx"] == 0.05
        assert manifest["seed"] is None

    def test_usage_and_runtime_errors(self, tmp_path):
        assert run(["pdf", "--kind", "cauchy", "--out", str(tmp_path)]) == 2
        assert run(["pdf", "--dx", "0", "--out", str(tmp_path)]) == 2
        assert run(["pdf", "--dx", "-1", "--out", str(tmp_path)]) == 2
        # a grid too narrow for the tails is a computation failure
        assert run(["pdf", "--half-width", "1.0", "--out", str(tmp_path)]) == 3


class TestSweep:
    def test_writes_points(self, tmp_path, capsys):
        code = run(
            [
                "sweep",
                "--bits",
                "20",
                "--samples-per-bit",
                "300",
                "--multipliers",
                "1.0,2.0",
                "--seed",
                "7",
                "--out",
                str(tmp_path),
            ]
        )
        assert code == 0
        lines = (tmp_path / "sweep.csv").read_text().splitlines()
        assert lines[0] == "multiplier,eve_accuracy"
        assert len(lines) == 3
        summary = read_json(tmp_path / "sweep.json")
        assert [p["multiplier"] for p in summary["points"]] == [1.0, 2.0]
        manifest = check_manifest(tmp_path)
        assert manifest["config"]["multipliers"] == [1.0, 2.0]
        out = capsys.readouterr().out
        assert out.count("multiplier=") == 2

    def test_multipliers_from_config_file(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(
            json.dumps({"bits": 10, "samples_per_bit": 150, "multipliers": [1.5], "seed": 3})
        )
        out = tmp_path / "out"
        code = run(["sweep", "--config", str(cfg), "--out", str(out)])
        assert code == 0
        summary = read_json(out / "sweep.json")
        assert [p["multiplier"] for p in summary["points"]] == [1.5]

    def test_usage_errors(self, tmp_path):
        assert run(["sweep", "--multipliers", "", "--out", str(tmp_path)]) == 2
        assert run(["sweep", "--multipliers", "1.0,-2.0", "--out", str(tmp_path)]) == 2
        assert run(["sweep", "--multipliers", "abc", "--out", str(tmp_path)]) == 2
        assert run(["sweep", "--kind", "cauchy", "--out", str(tmp_path)]) == 2


class TestParser:
    def test_no_command_is_usage_error(self):
        assert run([]) == 2

    def test_unknown_flag_is_usage_error(self):
        assert run(["simulate", "--frombulate"]) == 2

    def test_unknown_kind_is_usage_error(self):
        assert run(["simulate", "--kind", "poisson"]) == 2

    def test_version_flag(self, capsys):
        assert run(["--version"]) == 0
        assert "kljn" in capsys.readouterr().out
