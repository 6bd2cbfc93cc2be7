import json
import math
import subprocess
import sys

import numpy as np
import pytest

from mewpt import __version__
from mewpt.cli import main
from mewpt.interface import load_of_theta
from mewpt.io import MANIFEST_PREFIX, atomic_write, fmt, write_csv
from mewpt.transducer import (
    TRILAYER, BvdModel, model_to_dict, resonance_frequencies, synthesize_samples, write_impedance_csv,
)


def run(*argv):
    return main([str(a) for a in argv])


def read_csv(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith(MANIFEST_PREFIX)
    manifest = json.loads(lines[0][len(MANIFEST_PREFIX):])
    header = lines[1].split(",")
    rows = [dict(zip(header, line.split(","))) for line in lines[2:]]
    return manifest, header, rows


@pytest.fixture
def sweep_csv(tmp_path):
    res = resonance_frequencies(TRILAYER)
    f = np.linspace(0.8 * res["f_short"], 1.2 * res["f_open"], 60)
    path = tmp_path / "z.csv"
    write_impedance_csv(path, synthesize_samples(TRILAYER, f), digits=17)
    return path


class TestIo:
    def test_fmt_precision(self):
        assert fmt(1 / 3) == "0.333333333"
        assert fmt(12) == "12" and fmt(True) == "1" and fmt(float("nan")) == "nan"

    def test_atomic_write_leaves_no_temp(self, tmp_path):
        atomic_write(tmp_path / "a" / "x.txt", "hi\n")
        assert [p.name for p in (tmp_path / "a").iterdir()] == ["x.txt"]

    def test_csv_rows(self, tmp_path):
        write_csv(tmp_path / "t.csv", ["a", "b"], [(1.0, 2), (math.pi, "x")])
        assert (tmp_path / "t.csv").read_text() == "a,b\n1,2\n3.14159265,x\n"


class TestFit:
    def test_noiseless_sweep(self, tmp_path, sweep_csv):
        assert run("fit", "--csv", sweep_csv, "--out", tmp_path / "o") == 0
        rep = json.loads((tmp_path / "o" / "fit_report.json").read_text())
        assert rep["residual"] < 1e-9
        assert rep["coupling"] == pytest.approx(2.5, rel=0.01)
        model = json.loads((tmp_path / "o" / "model.json").read_text())
        assert model["model"]["c_p_f"] == pytest.approx(TRILAYER.c_p, rel=1e-6)
        assert model["manifest"]["version"] == __version__
        man, header, rows = read_csv(tmp_path / "o" / "fit_curves.csv")
        assert header[0] == "freq_hz" and len(rows) == 60
        assert man["command"] == "fit" and len(man["input_hash"]) == 64

    def test_truncated_sweep_warns(self, tmp_path, capsys):
        res = resonance_frequencies(TRILAYER)
        f = np.linspace(0.7 * res["f_short"], 0.98 * res["f_open"], 40)
        path = tmp_path / "z.csv"
        write_impedance_csv(path, synthesize_samples(TRILAYER, f, noise=0.01, rng=np.random.default_rng(1)))
        code = run("fit", "--csv", path, "--out", tmp_path / "o")
        assert code in (0, 3)
        rep = json.loads((tmp_path / "o" / "fit_report.json").read_text())
        assert any("open-circuit" in w for w in rep["warnings"])
        assert "warning" in capsys.readouterr().err

    def test_malformed_csv_names_line(self, tmp_path, capsys):
        path = tmp_path / "bad.csv"
        path.write_text("freq_hz,z_re_ohm,z_im_ohm\n1e5,1,2\n2e5,x,3\n")
        assert run("fit", "--csv", path, "--out", tmp_path) == 2
        err = capsys.readouterr().err
        assert "line 3" in err

    def test_non_convergence_exit_code(self, tmp_path, sweep_csv):
        far = BvdModel(1.0, 5.0, 1e-2, 1e-12, 1e-11)
        init = tmp_path / "init.json"
        init.write_text(json.dumps(model_to_dict(far)))
        code = run("fit", "--csv", sweep_csv, "--init", init, "--max-iter", 2, "--out", tmp_path / "o")
        assert code == 3
        rep = json.loads((tmp_path / "o" / "fit_report.json").read_text())
        assert rep["converged"] is False
        assert (tmp_path / "o" / "model.json").exists()

    def test_missing_csv_flag(self, tmp_path):
        assert run("fit", "--out", tmp_path) == 2


class TestAnalyze:
    def test_duty_invariant_across_scales(self, tmp_path):
        assert run("analyze", "--vs-scale", "0.5,1,2,4", "--out", tmp_path) == 0
        s = json.loads((tmp_path / "mpp_summary.json").read_text())
        assert s["duty_invariant"] is True
        assert len({m["grid_index"] for m in s["mpp"]}) == 1
        assert s["grid_convergence"]["pass"] and s["grid_convergence"]["rel_diff"] < 1e-3
        _, header, rows = read_csv(tmp_path / "theta_sweep.csv")
        assert header[1:] == ["theta_rad", "duty", "v_rect_v", "r_l_ohm", "p_out_w"]
        assert len(rows) == 4 * 256

    def test_uncoupled_is_half(self, tmp_path):
        assert run("analyze", "--uncoupled", "--out", tmp_path) == 0
        s = json.loads((tmp_path / "mpp_summary.json").read_text())
        assert abs(s["optimal_duty"] - 0.5) <= 1 / 2048

    def test_invalid_model_is_schema_error(self, tmp_path):
        bad = tmp_path / "m.json"
        bad.write_text(json.dumps({"r_m_ohm": 1.0}))
        assert run("analyze", "--model", bad, "--out", tmp_path) == 2
        bad.write_text(json.dumps({"r_m_ohm": -1.0, "l_m_h": 1, "c_m_f": 1, "c_p_f": 1}))
        assert run("analyze", "--model", bad, "--out", tmp_path) == 2

    def test_config_file_and_flag_precedence(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"vs-scale": [1, 3], "grid": 512}))
        assert run("analyze", "--config", cfg, "--grid", 1024, "--out", tmp_path) == 0
        s = json.loads((tmp_path / "mpp_summary.json").read_text())
        assert [m["v_s_scale"] for m in s["mpp"]] == [1, 3]
        assert s["grid_points"] == 1024

    def test_config_unknown_key(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"bogus": 1}))
        assert run("analyze", "--config", cfg, "--out", tmp_path) == 2


class TestFreqSweep:
    def test_default_sweep(self, tmp_path):
        assert run("freqsweep", "--out", tmp_path) == 0
        s = json.loads((tmp_path / "freq_summary.json").read_text())
        assert s["rows"] == 200 and s["distinct_argmax"]
        assert s["argmax_p_mpp_hz"] != s["argmax_v_oc_hz"]
        _, _, rows = read_csv(tmp_path / "freq_sweep.csv")
        for r in rows[::17]:
            r_l = load_of_theta(float(r["theta_rad"]), 2 * math.pi * float(r["freq_hz"]), TRILAYER.c_p)
            assert float(r["r_match_ohm"]) == pytest.approx(r_l, rel=1e-7)

    def test_two_points(self, tmp_path):
        assert run("freqsweep", "--n", 2, "--fmin", 3e5, "--fmax", 4e5, "--out", tmp_path) == 0
        _, _, rows = read_csv(tmp_path / "freq_sweep.csv")
        assert len(rows) == 2

    def test_range_without_resonances_warns(self, tmp_path, capsys):
        assert run("freqsweep", "--n", 5, "--fmin", 1e3, "--fmax", 2e3, "--out", tmp_path) == 0
        assert "excludes both resonances" in capsys.readouterr().err
        s = json.loads((tmp_path / "freq_summary.json").read_text())
        assert s["warnings"]

    @pytest.mark.parametrize("argv", [["--n", 1], ["--fmin", 5e5, "--fmax", 4e5], ["--fmin", -1, "--fmax", 4e5]])
    def test_bad_range(self, tmp_path, argv):
        assert run("freqsweep", *argv, "--out", tmp_path) == 2

    def test_threads_do_not_change_output(self, tmp_path, monkeypatch):
        assert run("freqsweep", "--n", 20, "--out", tmp_path) == 0
        one = (tmp_path / "freq_sweep.csv").read_bytes()
        monkeypatch.setenv("TOOL_THREADS", "2")
        assert run("freqsweep", "--n", 20, "--out", tmp_path) == 0
        assert (tmp_path / "freq_sweep.csv").read_bytes() == one

    def test_bad_threads(self, tmp_path, monkeypatch):
        monkeypatch.setenv("TOOL_THREADS", "zero")
        assert run("freqsweep", "--n", 2, "--out", tmp_path) == 2


class TestSimulate:
    def test_figure9(self, tmp_path):
        assert run("simulate", "--scenario", "figure9_like", "--out", tmp_path) == 0
        m = json.loads((tmp_path / "metrics.json").read_text())
        assert m["mode_sequence"][:2] == ["STARTUP", "NORMAL_MPPT"]
        assert any(e["event"] == "sto_pause" for e in m["events"])
        _, header, rows = read_csv(tmp_path / "trace.csv")
        assert "sto_paused" in header and rows[-1]["sto_paused"] == "1"

    def test_figure16_one_transition(self, tmp_path):
        assert run("simulate", "--scenario", "figure16_like", "--out", tmp_path) == 0
        m = json.loads((tmp_path / "metrics.json").read_text())
        assert len([e for e in m["events"] if e["event"] == "cr_sto"]) == 1
        assert m["metrics"]["eta_mppt"] >= 0.94

    def test_hv12v_transition_rows(self, tmp_path):
        assert run("simulate", "--scenario", "hv12v", "--out", tmp_path) == 0
        _, _, rows = read_csv(tmp_path / "trace.csv")
        changes = [(float(a["v_hv"]), float(b["v_hv"]), b["cr_hv"])
                   for a, b in zip(rows, rows[1:]) if a["cr_hv"] != b["cr_hv"]]
        assert [c[2] for c in changes] == ["8", "12"]
        assert changes[0][0] <= 3.6 < changes[0][1] or changes[0][1] == 3.6
        m = json.loads((tmp_path / "metrics.json").read_text())
        xs = [e for e in m["events"] if e["event"] == "cr_hv"]
        assert [e["v_hv"] for e in xs] == [3.6, 7.2]

    def test_brownout_exit_zero(self, tmp_path):
        assert run("simulate", "--scenario", "storage_reuse", "--out", tmp_path) == 0
        m = json.loads((tmp_path / "metrics.json").read_text())
        assert m["brownout"] is True

    def test_rerun_byte_identical(self, tmp_path):
        for _ in range(2):
            assert run("simulate", "--scenario", "hv12v", "--out", tmp_path) == 0
            snap = {p.name: p.read_bytes() for p in tmp_path.iterdir()}
            if _ == 0:
                first = snap
        assert snap == first

    def test_schema_error_lists_path(self, tmp_path, capsys):
        sc = tmp_path / "s.json"
        sc.write_text(json.dumps({"duration_s": 0.01, "schedule": [{"t_start_s": 0.0, "hv_trigger": 99}]}))
        assert run("simulate", "--scenario", sc, "--out", tmp_path) == 2
        assert "$.schedule[0].hv_trigger" in capsys.readouterr().err

    def test_bad_override(self, tmp_path):
        assert run("simulate", "--scenario", "hv12v", "--set", "f_sw=1", "--out", tmp_path) == 2
        assert run("simulate", "--scenario", "hv12v", "--set", "nope", "--out", tmp_path) == 2

    def test_unknown_bundled(self, tmp_path):
        assert run("simulate", "--scenario", "nope", "--out", tmp_path) == 2

    def test_energy_failure_exit_code(self, tmp_path, monkeypatch):
        import mewpt.pmu.engine as engine

        monkeypatch.setattr(engine, "_ENERGY_TOL", -1.0)
        assert run("simulate", "--scenario", "hv12v", "--out", tmp_path) == 4
        m = json.loads((tmp_path / "metrics.json").read_text())
        assert m["error"] == "energy_balance"


class TestValidate:
    def test_sinusoidal_points(self, tmp_path, capsys):
        code = run("validate", "--modes", "sinusoidal_current", "--points", 6, "--out", tmp_path)
        assert code == 0
        out = capsys.readouterr().out
        assert "PASS" in out
        rep = json.loads((tmp_path / "validate_report.json").read_text())
        zero = rep["points"][0]
        assert zero["theta_rad"] == 0.0
        assert zero["p_analytic_w"] == 0.0 and zero["p_oracle_w"] == 0.0

    def test_full_bvd_recorded_not_failed(self, tmp_path):
        assert run("validate", "--modes", "full_bvd", "--points", 2, "--out", tmp_path) == 0
        rep = json.loads((tmp_path / "validate_report.json").read_text())
        assert rep["summary"]["full_bvd"]["pass"] is None

    def test_bad_mode(self, tmp_path):
        assert run("validate", "--modes", "square", "--out", tmp_path) == 2


def test_console_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "mewpt.cli", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and __version__ in res.stdout
    res = subprocess.run([sys.executable, "-m", "mewpt.cli", "explode"], capture_output=True, text=True)
    assert res.returncode == 2
