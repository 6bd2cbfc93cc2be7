import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from mewpt.errors import DomainError
from mewpt.interface import (
    equivalent_impedance, find_mpp, frequency_sweep, fundamental_component,
    load_of_theta, mpp_grid_index, open_circuit_voltage, operating_point,
    power_curve, theta_from_load, theta_sweep, uncoupled_variant, v_rect_of_theta,
    vac_waveform,
)
from mewpt.transducer import TRILAYER, BvdModel, motional_impedance, resonance_frequencies

from conftest import OMEGA_350K

I0, CP = 1e-3, 2e-9
thetas = st.floats(0.0, math.pi)


class TestWaveform:
    def test_reference_value(self):
        # mpmath, 30 digits
        v = vac_waveform(2.0, I0, OMEGA_350K, CP, 1.0)
        assert v == pytest.approx(-0.0564717489159747, rel=1e-12)

    def test_continuous_at_breakpoints(self):
        th = 1.3
        eps = 1e-9
        for bp in (th, math.pi, th + math.pi, 2 * math.pi):
            a = vac_waveform(th, I0, OMEGA_350K, CP, bp - eps)
            b = vac_waveform(th, I0, OMEGA_350K, CP, bp + eps)
            assert a == pytest.approx(b, abs=1e-6)

    def test_clamped_at_vrect(self):
        th = 1.0
        v = v_rect_of_theta(th, I0, OMEGA_350K, CP)
        assert vac_waveform(th, I0, OMEGA_350K, CP, 2.0) == v
        assert vac_waveform(th, I0, OMEGA_350K, CP, 5.0) == -v

    def test_theta_domain(self):
        with pytest.raises(DomainError):
            vac_waveform(3.2, I0, OMEGA_350K, CP, 0.0)
        with pytest.raises(DomainError):
            v_rect_of_theta(-0.1, I0, OMEGA_350K, CP)

    def test_vrect_limits(self):
        assert v_rect_of_theta(0.0, I0, OMEGA_350K, CP) == 0.0
        assert v_rect_of_theta(math.pi, I0, OMEGA_350K, CP) == pytest.approx(I0 / (OMEGA_350K * CP))


class TestFundamental:
    def test_reference_value(self):
        c = fundamental_component(math.pi / 2, I0, OMEGA_350K, CP)
        assert c["cos_coeff"] == pytest.approx(-0.113682102208497, rel=1e-12)
        assert c["sin_coeff"] == pytest.approx(0.0723722740302413, rel=1e-12)

    @settings(max_examples=25, deadline=None)
    @given(thetas)
    def test_matches_fourier_quadrature(self, th):
        f = lambda ph: vac_waveform(th, I0, OMEGA_350K, CP, ph)
        pts = sorted({th, math.pi, th + math.pi})
        a1 = quad(lambda p: f(p) * math.cos(p), 0, 2 * math.pi, points=pts, limit=200)[0] / math.pi
        b1 = quad(lambda p: f(p) * math.sin(p), 0, 2 * math.pi, points=pts, limit=200)[0] / math.pi
        c = fundamental_component(th, I0, OMEGA_350K, CP)
        scale = I0 / (OMEGA_350K * CP)
        assert c["cos_coeff"] == pytest.approx(a1, abs=1e-9 * scale)
        assert c["sin_coeff"] == pytest.approx(b1, abs=1e-9 * scale)

    @given(thetas)
    def test_equivalent_impedance_identity(self, th):
        # Z_E is the fundamental divided by the phasor of I_0 sin(wt)
        c = fundamental_component(th, I0, OMEGA_350K, CP)
        z = equivalent_impedance(th, OMEGA_350K, CP)
        phasor = (c["sin_coeff"] + 1j * c["cos_coeff"]) / I0
        assert z == pytest.approx(phasor, rel=1e-10, abs=1e-12)

    def test_equivalent_impedance_limits(self):
        # no conduction: bare C_P
        assert equivalent_impedance(math.pi, OMEGA_350K, CP) == pytest.approx(1 / (1j * OMEGA_350K * CP))
        assert equivalent_impedance(0.0, OMEGA_350K, CP) == 0.0


class TestLoad:
    @given(st.floats(1e-3, math.pi - 1e-3))
    def test_round_trip(self, th):
        r = load_of_theta(th, OMEGA_350K, CP)
        assert theta_from_load(r, OMEGA_350K, CP) == pytest.approx(th, rel=1e-9, abs=1e-9)

    def test_limits(self):
        k = math.pi / (2 * OMEGA_350K * CP)
        assert load_of_theta(math.pi / 2, OMEGA_350K, CP) == pytest.approx(k)
        assert load_of_theta(math.pi, OMEGA_350K, CP) == math.inf
        assert load_of_theta(0.0, OMEGA_350K, CP) == 0.0
        assert theta_from_load(math.inf, OMEGA_350K, CP) == pytest.approx(math.pi)
        assert theta_from_load(0.0, OMEGA_350K, CP) == 0.0
        with pytest.raises(DomainError):
            theta_from_load(-1.0, OMEGA_350K, CP)

    @settings(max_examples=50)
    @given(thetas)
    def test_power_balance(self, th):
        # P = V_RECT^2 / R_L must equal the closed-form power
        op = operating_point(TRILAYER, OMEGA_350K, th)
        if 1e-6 < th < math.pi - 1e-6:
            assert op.v_rect**2 / op.r_l == pytest.approx(op.p_out, rel=1e-9)
            assert op.p_out == pytest.approx(power_curve(TRILAYER, OMEGA_350K, th), rel=1e-12)
        assert op.duty_rect == pytest.approx(1 - th / math.pi)


class TestMpp:
    def test_power_vanishes_at_endpoints(self):
        assert power_curve(TRILAYER, OMEGA_350K, 0.0) == 0.0
        assert power_curve(TRILAYER, OMEGA_350K, math.pi) == 0.0

    def test_refinement_beats_grid(self):
        coarse = find_mpp(TRILAYER, OMEGA_350K, 64, refine=False)
        fine = find_mpp(TRILAYER, OMEGA_350K, 64)
        assert fine.p_out >= coarse.p_out
        dense = max(p.p_out for p in theta_sweep(TRILAYER, OMEGA_350K, 20001))
        assert fine.p_out == pytest.approx(dense, rel=1e-8)

    def test_trilayer_duty_window(self):
        op = find_mpp(TRILAYER, OMEGA_350K)
        assert 0.50 <= op.duty_rect <= 0.56

    def test_grid_too_small(self):
        with pytest.raises(DomainError):
            find_mpp(TRILAYER, OMEGA_350K, 63)

    @settings(max_examples=30, deadline=None)
    @given(st.floats(1e-3, 1e3))
    def test_duty_independent_of_source(self, k):
        a = find_mpp(TRILAYER, OMEGA_350K, 256)
        b = find_mpp(TRILAYER.scaled_source(k), OMEGA_350K, 256)
        assert a.theta == b.theta
        assert b.p_out == pytest.approx(a.p_out * k * k, rel=1e-9)
        assert mpp_grid_index(TRILAYER, OMEGA_350K, 2048) == mpp_grid_index(
            TRILAYER.scaled_source(k), OMEGA_350K, 2048)

    def test_uncoupled_approaches_half_duty(self):
        gaps = []
        for c in (1.0, 0.1, 0.01):
            op = find_mpp(uncoupled_variant(TRILAYER, c), OMEGA_350K, 4096)
            gaps.append(abs(op.duty_rect - 0.5))
        assert gaps[0] > gaps[1] > gaps[2]
        assert gaps[2] < 0.01

    def test_uncoupled_variant_keeps_resonances(self):
        u = uncoupled_variant(TRILAYER, 0.01)
        assert resonance_frequencies(u) == resonance_frequencies(TRILAYER)
        assert u.c_p == TRILAYER.c_p

    def test_mpp_is_conjugate_match_direction(self):
        # at the MPP, dP/dtheta = 0: neighbours are lower
        op = find_mpp(TRILAYER, OMEGA_350K)
        for d in (-1e-3, 1e-3):
            assert power_curve(TRILAYER, OMEGA_350K, op.theta + d) < op.p_out


class TestSweep:
    def test_open_circuit_reference(self):
        f = 10 * 367232.9727697
        v = open_circuit_voltage(TRILAYER, 2 * math.pi * f)
        assert v / TRILAYER.v_s_amp == pytest.approx(0.00169517700094153, rel=1e-8)

    def test_open_circuit_low_frequency_divider(self):
        v = open_circuit_voltage(TRILAYER, 2 * math.pi * 10.0)
        ratio = TRILAYER.c_m / (TRILAYER.c_m + TRILAYER.c_p)
        assert v / TRILAYER.v_s_amp == pytest.approx(ratio, rel=1e-6)

    def test_rows(self):
        freqs = np.linspace(300e3, 400e3, 11)
        rows = frequency_sweep(TRILAYER, freqs, 256)
        assert [r.freq for r in rows] == list(freqs)
        for r in rows:
            op = find_mpp(TRILAYER, 2 * math.pi * r.freq, 256)
            assert r.p_mpp == op.p_out and r.r_match == op.r_l

    def test_power_and_voltage_peaks_differ(self):
        f = np.linspace(300e3, 420e3, 200)
        rows = frequency_sweep(TRILAYER, f, 512)
        assert np.argmax([r.p_mpp for r in rows]) != np.argmax([r.v_oc for r in rows])

    def test_empty(self):
        with pytest.raises(DomainError):
            frequency_sweep(TRILAYER, [])
