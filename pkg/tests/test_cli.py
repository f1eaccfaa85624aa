"""Front-end behaviour: output formats, exit codes, artifacts, determinism."""

import json

import pytest

from bosonlab.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, *argv):
    code, out = run(capsys, *argv)
    return code, json.loads(out)


class TestNormalOrder:
    def test_prints_canonical_form(self, capsys):
        code, out = run(capsys, "normal-order", "--expr", "a0*ad0")
        assert code == 0
        assert out == "ad0*a0 + 1\n"

    def test_json_report_structure(self, capsys):
        code, report = run_json(capsys, "normal-order", "--expr", "a0*ad0",
                                "--format", "json")
        assert code == 0
        assert report["command"] == "normal-order"
        assert report["results"]["canonical"] == "ad0*a0 + 1"
        assert report["results"]["normal_product"] == "ad0*a0"
        assert "bosonlab" in report["versions"]
        assert "elapsed_seconds" in report["timing"]

    def test_classical_expression(self, capsys):
        code, out = run(capsys, "normal-order", "--expr", "(conj(al0)*al0 - 1)^2")
        assert code == 0
        assert "al0" in out


class TestQuantize:
    def test_raw_vs_normal(self, capsys):
        code, out = run(capsys, "quantize", "--g", "conj(al0)*al0")
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "normal: ad0*a0"
        assert lines[1] == "raw: ad0*a0 + 1"
        assert lines[2] == "raw - normal: 1"


class TestSpectrum:
    def test_zero_modes_example(self, capsys):
        code, report = run_json(capsys, "spectrum", "--h", "conj(al0)*al0",
                                "--energy", "2", "--cutoff", "12")
        assert code == 0
        assert report["results"]["zero_space_dimension"] == 2
        assert sorted(report["results"]["zero_modes"]) == [[1], [4]]

    def test_ensemble_residual_check(self, capsys):
        code, report = run_json(capsys, "spectrum", "--h", "conj(al0)*al0",
                                "--energy", "1", "--cutoff", "24",
                                "--ensemble", "phase:64:1.0")
        assert code == 0
        (check,) = report["checks"]
        assert check["name"] == "ensemble_residual_small"
        assert check["passed"] is True
        assert abs(check["value"]) <= 1e-7


class TestTraceCheck:
    def test_level_set_example(self, capsys):
        code, report = run_json(capsys, "trace-check",
                                "--g", "(conj(al0)*al0 - 1)^2",
                                "--ensemble", "phase:64:1.0", "--cutoff", "24")
        assert code == 0
        (check,) = report["checks"]
        assert check["passed"] is True
        assert check["value"] <= 1e-8

    def test_failing_tolerance_exits_one(self, capsys):
        code, _ = run_json(capsys, "trace-check",
                           "--g", "conj(al0)*al0",
                           "--ensemble", "point:1.0,0.5", "--cutoff", "24",
                           "--tol", "1e-30")
        assert code == 1

    def test_truncation_exit_code(self, capsys):
        code = main(["trace-check", "--g", "conj(al0)*al0",
                     "--ensemble", "point:2.0,0.0", "--cutoff", "5"])
        assert code == 3

    def test_bad_expression_exit_code(self, capsys):
        code = main(["trace-check", "--g", "conj(al0)*al0 + $",
                     "--ensemble", "point:1.0,0.0"])
        assert code == 2


class TestLatticeCheck:
    def test_free_model_inline(self, capsys):
        code, report = run_json(capsys, "lattice-check", "--sites", "2",
                                "--cutoff", "8", "--samples", "4")
        assert code == 0
        names = {c["name"] for c in report["checks"]}
        assert {"energy_consistency", "trace_theorem",
                "vacuum_energy_zero", "free_spectrum_exact"} <= names
        assert all(c["passed"] for c in report["checks"])

    def test_model_file(self, capsys, tmp_path):
        path = tmp_path / "model.cfg"
        path.write_text(
            "sites = 2\nspacing = 1.0\nmasses = 1.0\n"
            "interaction = 0.1*phi0^4\ncutoffs = 10\n"
        )
        code, report = run_json(capsys, "lattice-check", "--model", str(path),
                                "--samples", "4")
        assert code == 0
        assert report["config"]["cutoffs"] == [10, 10]


class TestIncompressibility:
    def test_hamiltonian_flow(self, capsys):
        code, report = run_json(capsys, "incompressibility",
                                "--h", "0.5*pi0^2 + 0.5*phi0^2 + 0.1*phi0^4")
        assert code == 0
        assert report["results"]["incompressible"] is True
        assert report["results"]["max_abs_divergence"] == 0.0

    def test_damped_field_expectation(self, capsys):
        code, report = run_json(capsys, "incompressibility",
                                "--field", "pi0; -phi0 - 0.25*pi0",
                                "--expect", "compressible")
        assert code == 0
        assert report["results"]["max_abs_divergence"] == pytest.approx(0.25, abs=1e-12)

    def test_wrong_expectation_fails(self, capsys):
        code, _ = run_json(capsys, "incompressibility",
                           "--field", "pi0; -phi0 - 0.25*pi0",
                           "--expect", "incompressible")
        assert code == 1


class TestBoltzmannAndInvariance:
    def test_oracle_checks_pass(self, capsys):
        code, report = run_json(capsys, "boltzmann",
                                "--h", "0.5*pi0^2 + 0.5*phi0^2", "--k", "2",
                                "--count", "4000", "--seed", "5")
        assert code == 0
        assert {c["name"] for c in report["checks"]} == {
            "mean_energy_matches_oracle", "phi0^2_matches_oracle",
            "pi0^2_matches_oracle",
        }
        assert all(c["passed"] for c in report["checks"])

    def test_invariance_run(self, capsys):
        code, report = run_json(capsys, "invariance",
                                "--h", "0.5*pi0^2 + 0.5*phi0^2", "--k", "2",
                                "--count", "1500", "--horizon", "3.0", "--seed", "5")
        assert code == 0
        assert report["results"]["invariant"] is True


class TestDualCheck:
    def test_example_values(self, capsys):
        code, report = run_json(capsys, "dual-check", "--h", "conj(al0)*al0",
                                "--k", "0.5", "--order", "8", "--state", "0.5,0")
        assert code == 0
        assert report["results"]["error"] <= 1e-6
        (check,) = report["checks"]
        assert check["passed"] is True


class TestArtifacts:
    def test_dump_and_plots(self, capsys, tmp_path):
        dump = tmp_path / "dump"
        plots_dir = tmp_path / "plots"
        code, _ = run_json(capsys, "spectrum", "--h", "conj(al0)*al0",
                           "--energy", "2", "--cutoff", "16",
                           "--ensemble", "phase:16:1.4142135623730951",
                           "--dump", str(dump), "--plot-dir", str(plots_dir))
        assert code == 0
        assert (dump / "spectral_operator.poly.txt").exists()
        assert (dump / "spectral_operator.matrix.txt").exists()
        assert (dump / "ensemble.txt").exists()
        assert (plots_dir / "spectrum.png").stat().st_size > 0
        assert (plots_dir / "ensemble.png").stat().st_size > 0

    def test_csv_format(self, capsys):
        code, out = run(capsys, "trace-check", "--g", "conj(al0)*al0",
                        "--ensemble", "point:0.5,0.0", "--cutoff", "16",
                        "--format", "csv")
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "name,value,tolerance,passed"
        assert lines[1].startswith("trace_residual,")

    def test_out_file(self, capsys, tmp_path):
        out_path = tmp_path / "report.json"
        code, out = run(capsys, "quantize", "--g", "al0^2", "--format", "json",
                        "--out", str(out_path))
        assert code == 0
        assert out == ""
        assert json.loads(out_path.read_text())["command"] == "quantize"


class TestDeterminism:
    def test_seeded_reports_are_identical(self, capsys, tmp_path):
        argv = ["spectrum", "--h", "conj(al0)*al0", "--energy", "1",
                "--cutoff", "20", "--ensemble", "levelset:1:12:3",
                "--seed", "3", "--format", "json"]
        outputs = []
        for run_idx in range(2):
            path = tmp_path / f"r{run_idx}.json"
            assert main(argv + ["--out", str(path)]) == 0
            report = json.loads(path.read_text())
            del report["timing"]
            outputs.append(json.dumps(report, sort_keys=False))
        assert outputs[0] == outputs[1]
