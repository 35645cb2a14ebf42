"""Command-line behaviour: exit codes, file outputs, manifests, determinism."""

import json
import math

import pytest

from solitonlab.cli import main
from solitonlab.reporting import config_hash


def write_config(path, **overrides):
    config = {
        "potential": {"kind": "algebraic", "q": 0.5, "s": 3.0},
        "delta": 0.6,
        "v": 8.0,
    }
    config.update(overrides)
    path.write_text(json.dumps(config))
    return path


class TestSimulate:
    def test_valid_run(self, tmp_path):
        cfg = write_config(tmp_path / "c.json")
        out = tmp_path / "out"
        assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == 0
        rows = (out / "series.csv").read_text().strip().splitlines()
        assert rows[0] == "t,err_l2,mass,energy,a_abs,edge_mass"
        assert len(rows) >= 3
        report = json.loads((out / "report.json").read_text())
        assert report["valid"] is True
        assert report["sup_error"] > 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["status"] == "complete"
        listed = {p.split("/")[-1] for p in manifest["outputs"]}
        produced = {p.name for p in out.iterdir()}
        assert produced <= listed | {"manifest.json"} and "series.csv" in listed
        assert (out / "final_field.bin").exists()
        assert (out / "summary.svg").read_text().startswith("<svg")

    def test_delta_out_of_range_exits_1(self, tmp_path):
        cfg = write_config(tmp_path / "c.json", delta=0.4)
        assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1

    def test_dt_over_cap_exits_1(self, tmp_path):
        cfg = write_config(tmp_path / "c.json", dt=0.05)
        assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1

    def test_inadmissible_without_override_exits_1(self, tmp_path):
        cfg = write_config(tmp_path / "c.json", potential={"kind": "sech2_scaled", "beta": 1.0})
        assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1

    def test_unworkable_geometry_exits_4(self, tmp_path):
        # margin too small for the soliton tail: the run geometry is invalid
        cfg = write_config(tmp_path / "c.json", margin=10.0)
        out = tmp_path / "o"
        assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == 4
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["status"] == "invalid"

    def test_bad_json_exits_1(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert main(["simulate", "--config", str(bad), "--out", str(tmp_path / "o")]) == 1

    def test_missing_file_exits_1(self, tmp_path):
        assert main(["simulate", "--config", str(tmp_path / "none.json")]) == 1

    def test_env_var_out_dir(self, tmp_path, monkeypatch):
        cfg = write_config(tmp_path / "c.json")
        target = tmp_path / "envout"
        monkeypatch.setenv("SOLITONLAB_OUT_DIR", str(target))
        assert main(["simulate", "--config", str(cfg)]) == 0
        assert (target / "series.csv").exists()

    def test_single_entry_velocity_list(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({
            "potential": {"kind": "algebraic", "q": 0.5, "s": 3.0},
            "delta": 0.6,
            "velocities": [8.0],
        }))
        assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0

    def test_multi_velocity_list_without_v_rejected(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({
            "potential": {"kind": "algebraic", "q": 0.5, "s": 3.0},
            "delta": 0.6,
            "velocities": [8.0, 16.0],
        }))
        assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1


class TestSpectral:
    def test_resonant_well(self, tmp_path):
        out = tmp_path / "spec"
        code = main(
            ["spectral", "--kind", "sech2_scaled", "--beta", "1.0",
             "--lambda-min", "0.5", "--lambda-max", "10", "--lambda-points", "6",
             "--out", str(out)]
        )
        assert code == 0
        payload = json.loads((out / "spectral_report.json").read_text())
        assert payload["resonance"]["detected"] is True
        assert len(payload["bound_state_energies"]) == 1
        assert payload["bound_state_energies"][0] == pytest.approx(-0.5, abs=1e-3)
        assert payload["admissibility"]["admissible"] is False
        rows = (out / "coefficients.csv").read_text().strip().splitlines()
        assert rows[0] == "lambda,re_T,im_T,re_R,im_R,unitarity_defect"
        assert len(rows) == 7
        worst = max(abs(float(r.split(",")[5])) for r in rows[1:])
        assert worst <= 1e-6

    def test_zero_kind(self, tmp_path):
        out = tmp_path / "spec0"
        assert main(["spectral", "--kind", "zero", "--lambda-points", "4", "--out", str(out)]) == 0
        payload = json.loads((out / "spectral_report.json").read_text())
        assert payload["resonance"]["detected"] is True
        assert payload["bound_state_energies"] == []

    def test_algebraic_admissible(self, tmp_path):
        out = tmp_path / "speca"
        code = main(
            ["spectral", "--kind", "algebraic", "--q", "0.5", "--s", "3",
             "--lambda-points", "4", "--out", str(out)]
        )
        assert code == 0
        payload = json.loads((out / "spectral_report.json").read_text())
        assert payload["admissibility"]["admissible"] is True


class TestPotentialReport:
    def test_writes_json(self, tmp_path, capsys):
        out = tmp_path / "pot"
        code = main(
            ["potential-report", "--kind", "gaussian", "--q", "2.0", "--sigma", "1.0",
             "--half-width", "40", "--n", "2048", "--out", str(out)]
        )
        assert code == 0
        d = json.loads((out / "admissibility.json").read_text())
        assert d["resonance_detected"] is False
        assert d["decay_super_algebraic"] is True
        assert d["admissible"] is True


class TestStudy:
    def _study_config(self, path, **overrides):
        # delta near the top of the admissible window keeps the horizons
        # (1-delta) log v short, so this integration test stays quick
        config = {
            "potential": {"kind": "algebraic", "q": 0.5, "s": 3.0},
            "delta": 0.74,
            "velocities": [8.0, 16.0, 32.0, 64.0],
        }
        config.update(overrides)
        path.write_text(json.dumps(config))
        return path

    def test_single_velocity_exits_1(self, tmp_path):
        cfg = self._study_config(tmp_path / "c.json", velocities=[8.0])
        assert main(["study", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1

    def test_inadmissible_exits_1(self, tmp_path):
        cfg = self._study_config(
            tmp_path / "c.json", potential={"kind": "sech2_scaled", "beta": 1.0}, delta=0.7
        )
        assert main(["study", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1

    @pytest.mark.slow
    def test_small_study_passes(self, tmp_path):
        cfg = self._study_config(tmp_path / "c.json")
        out = tmp_path / "study"
        assert main(["study", "--config", str(cfg), "--out", str(out)]) == 0
        study = json.loads((out / "study.json").read_text())
        assert study["pass"] is True
        assert study["slope"] <= study["slope_limit"]
        assert len(study["per_v_error"]) == 4
        rows = (out / "scaling.csv").read_text().strip().splitlines()
        assert rows[0] == "log_v,log_err"
        lv, le = map(float, rows[1].split(","))
        assert lv == pytest.approx(math.log(8.0), abs=1e-12)
        assert le == pytest.approx(math.log(study["per_v_error"][0]), abs=1e-12)
        for v in (8, 16, 32, 64):
            run_dir = out / "runs" / f"v{v}"
            assert (run_dir / "series.csv").exists()
            assert (run_dir / "floor_series.csv").exists()
            assert (run_dir / "report.json").exists()
        assert (out / "scaling.svg").exists()
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["status"] == "complete"
        assert manifest["flags"]["passed"] is True


class TestCheck:
    @pytest.mark.slow
    def test_passes_and_deterministic(self, tmp_path, capsys):
        assert main(["check"]) == 0
        first = capsys.readouterr().out
        assert main(["check"]) == 0
        second = capsys.readouterr().out
        assert first == second
        assert "overall" in first and "FAIL" not in first

    @pytest.mark.slow
    def test_report_files(self, tmp_path, capsys):
        out = tmp_path / "check"
        assert main(["check", "--out", str(out)]) == 0
        capsys.readouterr()
        payload = json.loads((out / "check_report.json").read_text())
        assert payload["passed"] is True
        assert len(payload["checks"]) >= 10


class TestManifestHash:
    def test_key_order_invariant(self):
        a = {"potential": {"kind": "algebraic", "q": 0.5, "s": 3.0}, "delta": 0.6, "v": 8.0}
        b = {"v": 8.0, "delta": 0.6, "potential": {"s": 3.0, "q": 0.5, "kind": "algebraic"}}
        assert config_hash(a) == config_hash(b)

    def test_value_change_changes_hash(self):
        a = {"delta": 0.6, "v": 8.0}
        b = {"delta": 0.6, "v": 16.0}
        assert config_hash(a) != config_hash(b)
