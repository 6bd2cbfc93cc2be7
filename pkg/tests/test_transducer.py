import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mewpt.errors import DomainError, FitError, InputError
from mewpt.interface import find_mpp
from mewpt.transducer import (
    BILAYER, TRILAYER, BvdModel, ImpedanceSample, coupling_factor, fit_bvd,
    load_model_json, model_from_dict, model_to_dict, motional_impedance,
    read_impedance_csv, resonance_frequencies, synthesize_samples,
    terminal_impedance, write_impedance_csv,
)

from conftest import OMEGA_350K, random_model

models = st.builds(
    BvdModel,
    v_s_amp=st.floats(0.0, 10.0),
    r_m=st.floats(1.0, 1e5),
    l_m=st.floats(1e-5, 1.0),
    c_m=st.floats(1e-13, 1e-8),
    c_p=st.floats(1e-12, 1e-7),
)


def test_model_rejects_nonpositive_parameters():
    with pytest.raises(DomainError):
        BvdModel(1.0, 0.0, 1e-3, 1e-10, 1e-9)
    with pytest.raises(DomainError):
        BvdModel(-1.0, 1.0, 1e-3, 1e-10, 1e-9)


class TestMotionalImpedance:
    def test_series_resonance_cancels_reactance(self, trilayer):
        w0 = 1.0 / math.sqrt(trilayer.l_m * trilayer.c_m)
        z = motional_impedance(trilayer, w0)
        assert z.real == trilayer.r_m
        assert abs(z.imag) < 1e-9 * trilayer.r_m

    def test_reference_value(self):
        # 30-digit mpmath evaluation of R + j(wL - 1/(wC))
        m = BvdModel(1.0, 500.0, 0.1, 2e-12, 1e-9)
        z = motional_impedance(m, 2 * math.pi * 350e3)
        assert z.real == pytest.approx(500.0, rel=1e-14)
        assert z.imag == pytest.approx(-7452.71866570781012, rel=1e-12)

    def test_low_frequency_is_capacitive(self, trilayer):
        z = motional_impedance(trilayer, 1e-3)
        assert abs(z.imag) == pytest.approx(1.0 / (1e-3 * trilayer.c_m), rel=1e-9)

    @pytest.mark.parametrize("w", [0.0, -1.0])
    def test_domain(self, trilayer, w):
        with pytest.raises(DomainError):
            motional_impedance(trilayer, w)


class TestTerminalImpedance:
    def test_open_parallel_branch(self, trilayer):
        m = BvdModel(1.0, trilayer.r_m, trilayer.l_m, trilayer.c_m, 1e-30)
        z = terminal_impedance(m, OMEGA_350K)
        assert z == pytest.approx(motional_impedance(m, OMEGA_350K), rel=1e-12)

    def test_low_branch_dominates_at_series_resonance(self):
        m = BvdModel(1.0, 10.0, 0.01, 1e-11, 1e-12)
        w0 = 1.0 / math.sqrt(m.l_m * m.c_m)
        assert abs(terminal_impedance(m, w0)) == pytest.approx(10.0, rel=1e-3)

    def test_trilayer_reference_value(self, trilayer):
        z = terminal_impedance(trilayer, OMEGA_350K)
        assert z.real == pytest.approx(311.173744805191768, rel=1e-9)
        assert z.imag == pytest.approx(-167.801001047891197, rel=1e-9)

    def test_vectorised(self, trilayer):
        w = np.array([1e5, 2e6, 3e6])
        z = terminal_impedance(trilayer, w)
        assert z.shape == (3,)
        assert z[1] == terminal_impedance(trilayer, 2e6)

    @settings(max_examples=60, deadline=None)
    @given(models)
    def test_one_minimum_one_maximum_between_resonances(self, m):
        res = resonance_frequencies(m)
        f = np.linspace(0.5 * res["f_short"], 1.5 * res["f_open"], 20001)
        mag = np.abs(terminal_impedance(m, 2 * np.pi * f))
        d = np.sign(np.diff(mag))
        d = d[d != 0]
        turns = np.diff(d)
        assert np.count_nonzero(turns > 0) <= 1  # local minima
        assert np.count_nonzero(turns < 0) <= 1  # local maxima


class TestCoupling:
    def test_hand_value(self):
        m = BvdModel(1.0, 1e3, 0.1, 1e-12, 1e-9)
        assert coupling_factor(m).coupling == pytest.approx(2 * math.sqrt(1e-13) / 1e-6, rel=1e-12)
        assert coupling_factor(m).coupling == pytest.approx(0.632, abs=5e-4)
        assert coupling_factor(m).regime == "moderate"

    def test_published_films(self):
        assert coupling_factor(TRILAYER).coupling == pytest.approx(2.5, rel=1e-9)
        assert coupling_factor(BILAYER).coupling == pytest.approx(8.6, rel=1e-9)

    def test_sqrt_scaling(self, trilayer):
        m4 = BvdModel(1.0, trilayer.r_m, 4 * trilayer.l_m, trilayer.c_m, trilayer.c_p)
        assert coupling_factor(m4).coupling == pytest.approx(2 * coupling_factor(trilayer).coupling)

    def test_regimes_are_configurable(self, trilayer):
        assert coupling_factor(trilayer, thresholds=(0.3, 2.0)).regime == "strong"
        assert coupling_factor(trilayer, thresholds=(3.0, 10.0)).regime == "weak"

    @given(models, st.floats(0.0, 100.0))
    def test_source_amplitude_does_not_matter(self, m, k):
        assert coupling_factor(m.with_source(m.v_s_amp * k)).coupling == coupling_factor(m).coupling


class TestResonances:
    def test_hand_value(self):
        m = BvdModel(1.0, 100.0, 0.1, 2e-12, 1e-9)
        assert resonance_frequencies(m)["f_short"] == pytest.approx(355881.2717085885, rel=1e-12)

    def test_large_cp_merges_resonances(self):
        m = BvdModel(1.0, 100.0, 0.1, 2e-12, 1.0)
        res = resonance_frequencies(m)
        assert res["f_open"] == pytest.approx(res["f_short"], rel=1e-11)

    @settings(max_examples=200)
    @given(models)
    def test_ordering_and_ratio(self, m):
        res = resonance_frequencies(m)
        assert res["f_open"] > res["f_short"]
        assert res["f_open"] / res["f_short"] == pytest.approx(math.sqrt(1 + m.c_m / m.c_p), rel=1e-12)


class TestDefaultModels:
    """The shipped films satisfy the anchors they were derived from."""

    def test_trilayer_anchors(self):
        assert resonance_frequencies(TRILAYER)["f_short"] == pytest.approx(335e3, rel=1e-9)
        op = find_mpp(TRILAYER, OMEGA_350K, 4096)
        assert op.r_l == pytest.approx(550.0, rel=2e-3)
        f = np.linspace(340e3, 360e3, 401)
        p = [find_mpp(TRILAYER, 2 * math.pi * fi, 512).p_out for fi in f]
        assert f[int(np.argmax(p))] == pytest.approx(350e3, abs=100.0)

    def test_bilayer_anchor(self):
        op = find_mpp(BILAYER, OMEGA_350K, 4096)
        assert op.r_l == pytest.approx(4750.0, rel=2e-3)


class TestFit:
    def _sweep(self, m, n=60):
        res = resonance_frequencies(m)
        return np.linspace(0.9 * res["f_short"], 1.1 * res["f_open"], n)

    def test_exact_data_fixed_point(self, trilayer):
        samples = synthesize_samples(trilayer, self._sweep(trilayer))
        fit = fit_bvd(samples, init=trilayer)
        assert fit.residual < 1e-12
        for name in ("r_m", "l_m", "c_m", "c_p"):
            assert getattr(fit.model, name) == pytest.approx(getattr(trilayer, name), rel=1e-9)
        assert fit.model.v_s_amp == trilayer.v_s_amp

    def test_noisy_recovery_without_init(self):
        truth = BvdModel(1.0, 600.0, 80e-3, 2.6e-12, 2e-9)
        rng = np.random.default_rng(7)
        samples = synthesize_samples(truth, self._sweep(truth), noise=0.01, rng=rng)
        fit = fit_bvd(samples)
        for name in ("r_m", "l_m", "c_m", "c_p"):
            assert getattr(fit.model, name) == pytest.approx(getattr(truth, name), rel=0.05)
        assert fit.model.v_s_amp == 1.0

    def test_trilayer_sweep_gives_published_coupling(self, trilayer):
        rng = np.random.default_rng(3)
        samples = synthesize_samples(trilayer, self._sweep(trilayer, 80), noise=0.005, rng=rng)
        fit = fit_bvd(samples)
        assert coupling_factor(fit.model).coupling == pytest.approx(2.5, rel=0.05)

    def test_randomised_round_trip(self, rng):
        ok = 0
        for _ in range(10):
            m = random_model(rng)
            fit = fit_bvd(synthesize_samples(m, self._sweep(m), noise=0.01, rng=rng))
            ok += all(abs(getattr(fit.model, k) / getattr(m, k) - 1) < 0.05
                      for k in ("r_m", "l_m", "c_m", "c_p"))
        assert ok >= 9

    def test_too_few_samples(self, trilayer):
        with pytest.raises(InputError):
            fit_bvd(synthesize_samples(trilayer, np.linspace(3e5, 4e5, 7)))

    def test_non_increasing_frequencies(self, trilayer):
        s = synthesize_samples(trilayer, np.linspace(3e5, 4e5, 10))
        with pytest.raises(InputError):
            fit_bvd(s[::-1])

    def test_iteration_budget_exhausted(self, trilayer):
        samples = synthesize_samples(trilayer, self._sweep(trilayer), noise=0.01,
                                     rng=np.random.default_rng(1))
        bad = BvdModel(1.0, trilayer.r_m * 5, trilayer.l_m / 3, trilayer.c_m * 2, trilayer.c_p * 4)
        with pytest.raises(FitError) as info:
            fit_bvd(samples, init=bad, max_iter=2)
        assert info.value.best is not None
        assert info.value.best.model.r_m > 0

    def test_truncated_sweep_warns(self, trilayer):
        res = resonance_frequencies(trilayer)
        f = np.linspace(0.9 * res["f_short"], 0.5 * (res["f_short"] + res["f_open"]), 40)
        fit = fit_bvd(synthesize_samples(trilayer, f), init=trilayer)
        assert any("open-circuit" in w for w in fit.warnings)


class TestFiles:
    def test_csv_round_trip(self, tmp_path, trilayer):
        s = synthesize_samples(trilayer, np.linspace(3e5, 4e5, 12))
        p = tmp_path / "z.csv"
        write_impedance_csv(p, s)
        back = read_impedance_csv(p)
        assert len(back) == 12
        assert back[3].z_im == pytest.approx(s[3].z_im, rel=1e-8)

    def test_polar_header(self, tmp_path):
        p = tmp_path / "z.csv"
        p.write_text("freq_hz,z_mag_ohm,z_phase_deg\n1000,2,90\n2000,1,-45\n")
        s = read_impedance_csv(p)
        assert s[0].z_re == pytest.approx(0.0, abs=1e-12)
        assert s[0].z_im == pytest.approx(2.0)
        assert s[1].z_re == pytest.approx(math.sqrt(0.5))
        assert s[1].z_im == pytest.approx(-math.sqrt(0.5))

    def test_parse_error_names_line(self, tmp_path):
        p = tmp_path / "z.csv"
        p.write_text("freq_hz,z_re_ohm,z_im_ohm\n1000,2,3\n2000,abc,1\n")
        with pytest.raises(InputError, match="line 3"):
            read_impedance_csv(p)

    def test_bad_header(self, tmp_path):
        p = tmp_path / "z.csv"
        p.write_text("f,re,im\n1,2,3\n")
        with pytest.raises(InputError, match="line 1"):
            read_impedance_csv(p)

    def test_model_json(self, tmp_path, trilayer):
        d = model_to_dict(trilayer, residual=0.0)
        assert set(d) == {"v_s_amp_v", "r_m_ohm", "l_m_h", "c_m_f", "c_p_f", "coupling",
                          "f_short_hz", "f_open_hz", "residual"}
        p = tmp_path / "m.json"
        p.write_text(json.dumps(d))
        assert load_model_json(p) == trilayer
        with pytest.raises(InputError):
            model_from_dict({"r_m_ohm": 1})

    def test_sample_validation(self):
        with pytest.raises(InputError):
            ImpedanceSample(0.0, 1.0, 1.0)
        with pytest.raises(InputError):
            ImpedanceSample(1.0, float("nan"), 1.0)
