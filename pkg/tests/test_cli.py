"""End-to-end CLI tests: formats, schemas, determinism, exit codes."""

import json
import math
import re
import subprocess
import sys

import jsonschema
import numpy as np
import pytest

from conftest import load_schema, run_cli

FLOAT_RE = re.compile(r"^-?\d\.\d{12}e[+-]\d{2,3}$")

CRITICAL_CFG = {"mu": 5.0}
BIFURCATION_CFG = {"mu": 5.0, "eta_min": 3.0, "eta_max": 8.0, "n_samples": 60}
PORTRAIT_CFG = {"mu": 5.0, "eta": 5.0, "nz": 48, "ntheta": 48}
SIMULATE_CFG = {"mu": 5.0, "eta": 5.0, "z0": 0.4, "theta0": math.pi, "tau_end": 2.0}
REDUCE_CFG = {"family": "quartic", "a": 1.0, "b": 1.0, "hbar": 0.4, "mu": 1.0,
              "epsilons": [0.0, 0.5, 1.0]}

OUTPUTS = {
    "critical": (CRITICAL_CFG, ["critical.json"], []),
    "bifurcation": (BIFURCATION_CFG, ["bifurcation.csv", "bifurcation_meta.json"],
                    ["bifurcation.svg"]),
    "portrait": (PORTRAIT_CFG, ["portrait_grid.csv", "portrait_meta.json"],
                 ["portrait.svg"]),
    "simulate": (SIMULATE_CFG, ["trajectory.csv", "simulate_summary.json"],
                 ["trajectory.svg"]),
    "reduce": (REDUCE_CFG, ["reduction.json", "eigenfunctions.csv"],
               ["eigenfunctions.svg"]),
}


class TestOutputsAndSchemas:
    def test_critical_report(self, tmp_path):
        proc = run_cli("critical", CRITICAL_CFG, tmp_path)
        assert proc.returncode == 0, proc.stderr
        report = json.loads((tmp_path / "critical.json").read_text())
        jsonschema.validate(report, load_schema("critical"))
        assert report["regime"] == "saddle-node + inverse pitchfork"
        assert report["eta_star"] == 6.4
        assert abs(report["eta_plus"] - 4.411179502651) < 1e-9
        assert "eta_star" in proc.stdout

    def test_critical_pitchfork_regime(self, tmp_path):
        proc = run_cli("critical", {"mu": 1.0}, tmp_path)
        assert proc.returncode == 0, proc.stderr
        report = json.loads((tmp_path / "critical.json").read_text())
        jsonschema.validate(report, load_schema("critical"))
        assert report["regime"] == "supercritical pitchfork"
        assert report["eta_plus"] is None
        assert report["eta_star"] == 2.0

    def test_bifurcation_files(self, tmp_path):
        proc = run_cli("bifurcation", BIFURCATION_CFG, tmp_path)
        assert proc.returncode == 0, proc.stderr
        meta = json.loads((tmp_path / "bifurcation_meta.json").read_text())
        jsonschema.validate(meta, load_schema("bifurcation_meta"))
        labels = [b["label"] for b in meta["branches"]]
        assert labels.count("asymmetric_stable") == 2
        assert labels.count("asymmetric_unstable") == 2
        lines = (tmp_path / "bifurcation.csv").read_text().splitlines()
        assert lines[0] == "eta,z,theta,stability,branch_label"
        cells = lines[1].split(",")
        assert FLOAT_RE.match(cells[0]) and FLOAT_RE.match(cells[1])
        assert cells[3] in ("center", "saddle", "degenerate")

    def test_portrait_files(self, tmp_path):
        proc = run_cli("portrait", PORTRAIT_CFG, tmp_path)
        assert proc.returncode == 0, proc.stderr
        meta = json.loads((tmp_path / "portrait_meta.json").read_text())
        jsonschema.validate(meta, load_schema("portrait_meta"))
        assert len(meta["fixed_points"]) == 6
        assert len(meta["separatrix_energies"]) == 2
        lines = (tmp_path / "portrait_grid.csv").read_text().splitlines()
        assert lines[0] == "z,theta,H"
        assert len(lines) == 1 + 48 * 48

    def test_simulate_files(self, tmp_path):
        proc = run_cli("simulate", SIMULATE_CFG, tmp_path)
        assert proc.returncode == 0, proc.stderr
        summary = json.loads((tmp_path / "simulate_summary.json").read_text())
        jsonschema.validate(summary, load_schema("simulate_summary"))
        assert summary["chart"] == "phase"
        assert not summary["escaped"]
        assert summary["norm_drift"] is None
        lines = (tmp_path / "trajectory.csv").read_text().splitlines()
        assert lines[0] == "tau,z,theta,H,norm"
        assert len(lines) == 1 + summary["n_samples"]

    def test_simulate_amplitude_chart(self, tmp_path):
        cfg = dict(SIMULATE_CFG, chart="amplitude")
        proc = run_cli("simulate", cfg, tmp_path)
        assert proc.returncode == 0, proc.stderr
        summary = json.loads((tmp_path / "simulate_summary.json").read_text())
        jsonschema.validate(summary, load_schema("simulate_summary"))
        assert summary["chart"] == "amplitude"
        assert summary["energy_definition"] == "H_amp"
        assert summary["norm_drift"] is not None

    def test_reduce_files(self, tmp_path):
        proc = run_cli("reduce", REDUCE_CFG, tmp_path)
        assert proc.returncode == 0, proc.stderr
        report = json.loads((tmp_path / "reduction.json").read_text())
        jsonschema.validate(report, load_schema("reduction"))
        assert report["lambda_plus"] < report["lambda_minus"] < report["lambda_2"]
        assert report["eta_of_epsilon"][0] == {"epsilon": 0.0, "eta": 0.0}
        # eta = c * eps / omega, after 12-digit rounding of each field
        eps_row = report["eta_of_epsilon"][1]
        expect = report["c"] * eps_row["epsilon"] / report["omega"]
        assert eps_row["eta"] == pytest.approx(expect, rel=1e-9)
        lines = (tmp_path / "eigenfunctions.csv").read_text().splitlines()
        assert lines[0] == "x,phi_plus,phi_minus,phi_R,phi_L"
        assert len(lines) == 1 + report["grid_nodes"]

    def test_simulate_linear_limit_beating(self, tmp_path):
        # closed form for eta -> 0 from (z, theta) = (0, pi/2): z(tau) = sin(2 tau),
        # so the emitted z column is 2*pi-periodic (fundamental period pi)
        cfg = {"mu": 1.0, "eta": 1e-300, "chart": "amplitude", "z0": 0.0,
               "theta0": math.pi / 2, "tau_end": 2 * math.pi}
        proc = run_cli("simulate", cfg, tmp_path)
        assert proc.returncode == 0, proc.stderr
        rows = np.loadtxt(tmp_path / "trajectory.csv", delimiter=",", skiprows=1)
        tau, z = rows[:, 0], rows[:, 1]
        assert np.max(np.abs(z - np.sin(2 * tau))) <= 1e-7
        assert abs(z[-1]) <= 1e-7  # back to zero after a full 2*pi period

    def test_simulate_phase_chart_escape_flagged(self, tmp_path):
        cfg = {"mu": 1.0, "eta": 1e-300, "z0": 0.0, "theta0": math.pi / 2,
               "tau_end": 2 * math.pi}
        proc = run_cli("simulate", cfg, tmp_path)
        assert proc.returncode == 0, proc.stderr
        summary = json.loads((tmp_path / "simulate_summary.json").read_text())
        assert summary["escaped"] is True
        assert summary["tau_last"] < math.pi / 4 + 0.02

    def test_thread_cap_does_not_change_output(self, tmp_path):
        import os

        d1, d2 = tmp_path / "serial", tmp_path / "threaded"
        assert run_cli("bifurcation", BIFURCATION_CFG, d1).returncode == 0
        env = dict(os.environ, DIMERLAB_THREADS="4")
        assert run_cli("bifurcation", BIFURCATION_CFG, d2, env=env).returncode == 0
        for name in ("bifurcation.csv", "bifurcation_meta.json"):
            assert (d1 / name).read_bytes() == (d2 / name).read_bytes()

    def test_reduce_tabulated_family(self, tmp_path):
        x = np.linspace(-4, 4, 801)
        table = tmp_path / "table.txt"
        table.write_text("# x V\n" + "\n".join(
            f"{a:.17g} {b:.17g}" for a, b in zip(x, (x * x - 1) ** 2)))
        cfg = {"family": "tabulated", "table": str(table), "hbar": 0.4, "mu": 1.0}
        proc = run_cli("reduce", cfg, tmp_path)
        assert proc.returncode == 0, proc.stderr
        report = json.loads((tmp_path / "reduction.json").read_text())
        assert report["family"] == "tabulated"


class TestDeterminismAndSvg:
    @pytest.mark.parametrize("command", sorted(OUTPUTS))
    def test_byte_identical_reruns(self, tmp_path, command):
        cfg, data_files, _ = OUTPUTS[command]
        d1, d2 = tmp_path / "run1", tmp_path / "run2"
        assert run_cli(command, cfg, d1).returncode == 0
        assert run_cli(command, cfg, d2).returncode == 0
        for name in data_files:
            assert (d1 / name).read_bytes() == (d2 / name).read_bytes(), name

    @pytest.mark.parametrize("command", ["bifurcation", "portrait", "simulate"])
    def test_svg_opt_in_only_and_harmless(self, tmp_path, command):
        cfg, data_files, svg_files = OUTPUTS[command]
        plain, with_svg = tmp_path / "plain", tmp_path / "svg"
        assert run_cli(command, cfg, plain).returncode == 0
        assert run_cli(command, cfg, with_svg, svg=True).returncode == 0
        for name in svg_files:
            assert not (plain / name).exists()
            assert (with_svg / name).exists()
            assert (with_svg / name).read_text().startswith("<svg")
        for name in data_files:
            assert (plain / name).read_bytes() == (with_svg / name).read_bytes()


class TestErrorHandling:
    def test_invalid_json_is_config_error(self, tmp_path):
        cfg = tmp_path / "bad.json"
        cfg.write_text("{not json")
        proc = subprocess.run(
            [sys.executable, "-m", "dimerlab", "critical", "--config", str(cfg)],
            capture_output=True, text=True)
        assert proc.returncode == 2
        assert "config error" in proc.stderr

    def test_missing_required_field(self, tmp_path):
        proc = run_cli("critical", {}, tmp_path)
        assert proc.returncode == 2
        assert "field 'mu'" in proc.stderr

    def test_precondition_violation_named_field(self, tmp_path):
        proc = run_cli("critical", {"mu": -2.0}, tmp_path)
        assert proc.returncode == 2
        assert "field 'mu'" in proc.stderr

    def test_unknown_field_rejected(self, tmp_path):
        proc = run_cli("critical", {"mu": 1.0, "muu": 2.0}, tmp_path)
        assert proc.returncode == 2
        assert "muu" in proc.stderr

    def test_phase_chart_endpoint_start_rejected(self, tmp_path):
        cfg = dict(SIMULATE_CFG, z0=1.0)
        proc = run_cli("simulate", cfg, tmp_path)
        assert proc.returncode == 2
        assert "z0" in proc.stderr
        # the amplitude chart accepts the same start
        cfg["chart"] = "amplitude"
        assert run_cli("simulate", cfg, tmp_path).returncode == 0

    def test_numeric_failure_exit_code(self, tmp_path):
        # no doublet gap at hbar = 1: module-qualified numeric failure
        cfg = {"family": "quartic", "a": 1.0, "b": 1.0, "hbar": 1.0, "mu": 1.0}
        proc = run_cli("reduce", cfg, tmp_path)
        assert proc.returncode == 3
        assert "NoDoubletGap" in proc.stderr
        assert "dimerlab" in proc.stderr

    def test_io_failure_exit_code(self, tmp_path):
        blocker = tmp_path / "blocked"
        blocker.write_text("a file, not a directory")
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"mu": 1.0}))
        proc = subprocess.run(
            [sys.executable, "-m", "dimerlab", "critical", "--config", str(cfg),
             "--out-dir", str(blocker)],
            capture_output=True, text=True)
        assert proc.returncode == 4
        assert "i/o error" in proc.stderr

    def test_missing_config_file(self, tmp_path):
        proc = subprocess.run(
            [sys.executable, "-m", "dimerlab", "critical", "--config",
             str(tmp_path / "nope.json")],
            capture_output=True, text=True)
        assert proc.returncode == 2
