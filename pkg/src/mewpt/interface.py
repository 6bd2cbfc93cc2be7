"""
Transducer + full-bridge rectifier interface under the fundamental-tone
approximation.

The rectifier with C_P is replaced by an equivalent linear impedance that
depends only on the conduction-angle parameter ``theta``: the rectifier
starts conducting at phase ``theta`` in each half cycle and conducts for the
rest of it, so the rectifier duty cycle is ``1 - theta/pi``.  For a fixed
transducer and carrier frequency, ``theta`` alone fixes V_RECT, the DC load
R_L and the output power.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError
from .transducer import TWO_PI, BvdModel, motional_impedance

__all__ = [
    "OperatingPoint",
    "FrequencyRow",
    "vac_waveform",
    "v_rect_of_theta",
    "fundamental_component",
    "equivalent_impedance",
    "load_of_theta",
    "theta_from_load",
    "operating_point",
    "power_curve",
    "theta_sweep",
    "find_mpp",
    "open_circuit_voltage",
    "frequency_sweep",
    "uncoupled_variant",
]

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class OperatingPoint:
    theta: float
    duty_rect: float
    v_rect: float
    i_0: float
    z_e: complex
    r_l: float
    p_out: float
    omega: float


@dataclass(frozen=True)
class FrequencyRow:
    freq: float
    r_match: float
    p_mpp: float
    v_oc: float
    theta: float = float("nan")


def _check_theta(theta):
    t = np.asarray(theta, dtype=float)
    if np.any(~np.isfinite(t)) or np.any(t < 0.0) or np.any(t > math.pi):
        raise DomainError("theta must lie in [0, pi]")
    return t


def _positive(**kw):
    for name, v in kw.items():
        if not (math.isfinite(v) and v > 0):
            raise DomainError(f"{name} must be positive, got {v!r}")


def vac_waveform(theta: float, i_0: float, omega: float, c_p: float, phase):
    """Terminal voltage V_AC at carrier ``phase`` (= omega*t mod 2*pi).

    Piecewise over one period: C_P charges from -V_RECT until ``theta``, the
    rectifier clamps at +V_RECT until pi, then the mirror image.
    """
    _check_theta(theta)
    _positive(i_0=i_0, omega=omega, c_p=c_p)
    ph = np.mod(np.asarray(phase, dtype=float), TWO_PI)
    a = i_0 / (omega * c_p)
    v = v_rect_of_theta(theta, i_0, omega, c_p)
    out = np.select(
        [ph < theta, ph < math.pi, ph < theta + math.pi],
        [a * (1.0 - np.cos(ph)) - v, np.full_like(ph, v), v - a * (1.0 + np.cos(ph))],
        default=-v,
    )
    return float(out) if out.ndim == 0 else out


def v_rect_of_theta(theta, i_0: float, omega: float, c_p: float):
    """Rectified DC voltage, ``I_0/(2wC_P) * (1 - cos theta)``."""
    t = _check_theta(theta)
    v = i_0 / (2.0 * omega * c_p) * (1.0 - np.cos(t))
    return float(v) if v.ndim == 0 else v


def fundamental_component(theta, i_0: float, omega: float, c_p: float) -> dict:
    """Cosine and sine coefficients of the fundamental of V_AC [V]."""
    t = _check_theta(theta)
    k = i_0 / (TWO_PI * omega * c_p)
    cos_c = k * (np.sin(2.0 * t) - 2.0 * t)
    sin_c = k * 2.0 * np.sin(t) ** 2
    if cos_c.ndim == 0:
        cos_c, sin_c = float(cos_c), float(sin_c)
    return {"cos_coeff": cos_c, "sin_coeff": sin_c}


def equivalent_impedance(theta, omega: float, c_p: float):
    """Equivalent impedance of C_P plus rectifier, ``Z_E(theta)``."""
    t = _check_theta(theta)
    s, c = np.sin(t), np.cos(t)
    z = (s * s + 1j * (s * c - t)) / (math.pi * omega * c_p)
    return complex(z) if z.ndim == 0 else z


def load_of_theta(theta, omega: float, c_p: float):
    """DC load resistance that sets ``theta``; +inf at theta = pi."""
    t = _check_theta(theta)
    c = np.cos(t)
    with np.errstate(divide="ignore"):
        r = np.where(c <= -1.0, np.inf, math.pi / (2.0 * omega * c_p) * (1.0 - c) / (1.0 + c))
    return float(r) if r.ndim == 0 else r


def theta_from_load(r_l, omega: float, c_p: float):
    """Invert :func:`load_of_theta`: ``cos theta = (K - R_L)/(K + R_L)``."""
    r = np.asarray(r_l, dtype=float)
    if np.any(np.isnan(r)) or np.any(r < 0):
        raise DomainError("load resistance must be non-negative")
    _positive(omega=omega, c_p=c_p)
    k = math.pi / (2.0 * omega * c_p)
    with np.errstate(invalid="ignore"):
        c = np.where(np.isinf(r), -1.0, (k - r) / (k + r))
    t = np.arccos(np.clip(c, -1.0, 1.0))
    return float(t) if t.ndim == 0 else t


def power_curve(model: BvdModel, omega: float, theta):
    """Rectifier output power ``sin^2(theta)/(2 pi w C_P) * V_S^2/|Z_M+Z_E|^2``."""
    t = _check_theta(theta)
    zm = motional_impedance(model, omega)
    ze = equivalent_impedance(t, omega, model.c_p)
    p = np.sin(t) ** 2 / (TWO_PI * omega * model.c_p) * model.v_s_amp**2 / np.abs(zm + ze) ** 2
    p = np.where((t <= 0.0) | (t >= math.pi), 0.0, p)
    return float(p) if p.ndim == 0 else p


def operating_point(model: BvdModel, omega: float, theta: float) -> OperatingPoint:
    """Full operating point of the interface at conduction angle ``theta``.

    Endpoints are defined by continuity: ``p_out = 0`` at theta in {0, pi},
    and ``r_l = inf`` at theta = pi.
    """
    theta = float(_check_theta(theta))
    _positive(omega=omega)
    z_e = equivalent_impedance(theta, omega, model.c_p)
    i_0 = model.v_s_amp / abs(motional_impedance(model, omega) + z_e)
    v_rect = v_rect_of_theta(theta, i_0, omega, model.c_p)
    r_l = load_of_theta(theta, omega, model.c_p)
    if theta <= 0.0 or theta >= math.pi:
        p_out = 0.0
    else:
        p_out = math.sin(theta) ** 2 / (TWO_PI * omega * model.c_p) * i_0**2
    return OperatingPoint(
        theta=theta, duty_rect=1.0 - theta / math.pi, v_rect=v_rect, i_0=i_0,
        z_e=z_e, r_l=r_l, p_out=p_out, omega=omega,
    )


def theta_sweep(model: BvdModel, omega: float, n: int = 1024) -> list[OperatingPoint]:
    """Operating points on a uniform theta grid over [0, pi]."""
    return [operating_point(model, omega, t) for t in np.linspace(0.0, math.pi, n)]


def _golden_max(fun, a, b, tol):
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = fun(c), fun(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = fun(d)
    return 0.5 * (a + b)


def find_mpp(model: BvdModel, omega: float, grid_points: int = 1024, tol: float = 1e-6,
             refine: bool = True) -> OperatingPoint:
    """Maximum power point over theta.

    A uniform grid of ``grid_points`` values over [0, pi] locates the best
    cell, and golden-section search refines inside the neighbouring cells.
    The search runs on the unit-source power curve, so the returned theta is
    exactly independent of ``v_s_amp``.
    """
    if grid_points < 64:
        raise DomainError("grid_points must be at least 64")
    unit = model.with_source(1.0)
    grid = np.linspace(0.0, math.pi, grid_points)
    p = power_curve(unit, omega, grid)
    k = int(np.argmax(p))
    theta = float(grid[k])
    if refine:
        a = float(grid[max(k - 1, 0)])
        b = float(grid[min(k + 1, grid_points - 1)])
        t_ref = _golden_max(lambda t: power_curve(unit, omega, t), a, b, tol)
        if power_curve(unit, omega, t_ref) >= p[k]:
            theta = t_ref
    return operating_point(model, omega, theta)


def mpp_grid_index(model: BvdModel, omega: float, grid_points: int) -> int:
    """Index of the best theta on the uniform grid (no refinement)."""
    grid = np.linspace(0.0, math.pi, grid_points)
    return int(np.argmax(power_curve(model, omega, grid)))


def open_circuit_voltage(model: BvdModel, omega):
    """Open-circuit terminal amplitude ``|V_S * Z_CP / (Z_M + Z_CP)|``."""
    w = np.asarray(omega, dtype=float)
    zm = motional_impedance(model, w)
    zc = 1.0 / (1j * w * model.c_p)
    v = np.abs(model.v_s_amp * zc / (zm + zc))
    return float(v) if np.ndim(v) == 0 else v


def frequency_sweep(model: BvdModel, freqs: Sequence[float], grid_points: int = 1024) -> list[FrequencyRow]:
    """MPP power, matched load and open-circuit voltage per carrier frequency."""
    freqs = [float(f) for f in freqs]
    if not freqs:
        raise DomainError("frequency list is empty")
    rows = []
    for f in freqs:
        _positive(freq=f)
        w = TWO_PI * f
        op = find_mpp(model, w, grid_points)
        rows.append(FrequencyRow(freq=f, r_match=op.r_l, p_mpp=op.p_out,
                                 v_oc=open_circuit_voltage(model, w), theta=op.theta))
    return rows


def uncoupled_variant(model: BvdModel, coupling: float) -> BvdModel:
    """Copy of ``model`` with C_P*R_M inflated until k_e^2/zeta equals ``coupling``.

    C_P is held and R_M grows, so resonances and the source are unchanged.
    """
    from .transducer import coupling_factor

    k = coupling_factor(model).coupling
    return BvdModel(model.v_s_amp, model.r_m * k / coupling, model.l_m, model.c_m, model.c_p)
