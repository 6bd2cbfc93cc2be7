"""
Brute-force transient simulation of the transducer + ideal full-bridge
rectifier, used to validate the closed-form interface analysis.

The circuit differential equations are integrated with fixed-step RK4 at
``steps_per_cycle`` points per carrier period.  Diode switching events are
located inside a step by linear interpolation of the event function and the
step is split there.  Two drives are available:

``sinusoidal_current``
    I_P = I_0 sin(wt) is injected into C_P (the constant-current source
    assumed by the fundamental-tone analysis).
``full_bvd``
    V_S sin(wt) drives the complete R_M-L_M-C_M branch into C_P.

Loads are either a resistor with a large output capacitor, or an ideal DC
sink holding V_RECT constant.  For resistor loads the output capacitor
starts at the voltage where a DC sink would absorb exactly V/R (found by a
root search on sink runs), so the main run begins close to steady state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.optimize import brentq

from .errors import DomainError, OracleError
from .transducer import TWO_PI, BvdModel, motional_impedance

__all__ = ["OracleResult", "transient_oracle"]

OFF, ON_POS, ON_NEG = 0, 1, -1


@dataclass(frozen=True)
class OracleResult:
    v_rect_avg: float
    p_out_avg: float
    duty_rect: float
    i_out_avg: float
    drift: float
    cycles: int


class _Circuit:
    """Switched state equations of one oracle configuration."""

    def __init__(self, model, omega, drive, i_0, r_load, v_sink, c_out, v_drop):
        self.w = omega
        self.cp = model.c_p
        self.rm, self.lm, self.cm = model.r_m, model.l_m, model.c_m
        self.vs = model.v_s_amp
        self.full = drive == "full_bvd"
        self.i0 = i_0
        self.r = r_load
        self.sink = v_sink
        self.cout = c_out
        self.drop = v_drop

    def i_p(self, t, y):
        return y[0] if self.full else self.i0 * math.sin(self.w * t)

    def deriv(self, t, y, mode):
        im, vcm, v, vo = y
        ip = im if self.full else self.i0 * math.sin(self.w * t)
        if self.full:
            dim = (self.vs * math.sin(self.w * t) - self.rm * im - vcm - v) / self.lm
            dvcm = im / self.cm
        else:
            dim = dvcm = 0.0
        if self.sink is not None:
            dvo = 0.0
            dv = 0.0 if mode else ip / self.cp
        elif mode == OFF:
            dvo = -vo / (self.r * self.cout)
            dv = ip / self.cp
        else:
            dvo = (mode * ip - vo / self.r) / (self.cp + self.cout)
            dv = mode * dvo
        return (dim, dvcm, dv, dvo)

    def diode_current(self, t, y, mode):
        """Current delivered through the conducting diode pair (>= 0 while on)."""
        ip = self.i_p(t, y)
        d = self.deriv(t, y, mode)
        return mode * ip - self.cp * mode * d[2]

    def event(self, t, y, mode, armed):
        """Sign change (positive to non-positive) marks the next switching event.

        While off, only the conduction direction opposite to the last one is
        armed (``armed`` = +1/-1, or 0 before the first conduction).
        """
        clamp = y[3] + self.drop
        if mode == OFF:
            if armed == 0:
                return clamp - abs(y[2]), (ON_POS if y[2] >= 0 else ON_NEG)
            return clamp - armed * y[2], armed
        return self.diode_current(t, y, mode), OFF

    def rk4(self, t, y, h, mode):
        f = self.deriv
        k1 = f(t, y, mode)
        y2 = tuple(a + 0.5 * h * b for a, b in zip(y, k1))
        k2 = f(t + 0.5 * h, y2, mode)
        y3 = tuple(a + 0.5 * h * b for a, b in zip(y, k2))
        k3 = f(t + 0.5 * h, y3, mode)
        y4 = tuple(a + h * b for a, b in zip(y, k3))
        k4 = f(t + h, y4, mode)
        y = tuple(a + h / 6.0 * (b + 2.0 * c + 2.0 * d + e)
                  for a, b, c, d, e in zip(y, k1, k2, k3, k4))
        if mode:
            clamp = y[3] + self.drop
            y = (y[0], y[1], mode * clamp, y[3])
        return y


def _integrate(circ: _Circuit, y, n_cycles, steps, record_from):
    """Run ``n_cycles``; return per-cycle (mean v_out, mean p, mean i, on-time)."""
    period = TWO_PI / circ.w
    h = period / steps
    mode = OFF
    armed = 0
    t = 0.0
    stats = []
    for cyc in range(n_cycles):
        v_acc = p_acc = i_acc = on = 0.0
        for _ in range(steps):
            remaining = h
            for _split in range(6):
                g0, nxt = circ.event(t, y, mode, armed)
                if mode == OFF and g0 <= 0.0 and nxt * circ.i_p(t, y) > 0.0:
                    # already at the clamp level (e.g. a 0 V sink) with the
                    # source current flowing outward: conduct immediately
                    mode = nxt
                    y = (y[0], y[1], mode * (y[3] + circ.drop), y[3])
                    g0, nxt = circ.event(t, y, mode, armed)
                y1 = circ.rk4(t, y, remaining, mode)
                g1, _ = circ.event(t + remaining, y1, mode, armed)
                crossed = g0 > 0.0 and g1 <= 0.0
                if not crossed:
                    sub = remaining
                    y_new = y1
                else:
                    sub = g0 / (g0 - g1) * remaining
                    y_new = circ.rk4(t, y, sub, mode) if sub > 0.0 else y
                if cyc >= record_from:
                    # trapezoid on the output quantities over the sub-step
                    i_a = circ.diode_current(t, y, mode) if mode else 0.0
                    i_b = circ.diode_current(t + sub, y_new, mode) if mode else 0.0
                    if circ.sink is not None:
                        vo_a = vo_b = circ.sink
                        p_ab = circ.sink * 0.5 * (i_a + i_b)
                    else:
                        vo_a, vo_b = y[3], y_new[3]
                        p_ab = 0.5 * (vo_a * vo_a + vo_b * vo_b) / circ.r
                    v_acc += 0.5 * (vo_a + vo_b) * sub
                    p_acc += p_ab * sub
                    i_acc += 0.5 * (i_a + i_b) * sub
                    if mode:
                        on += sub
                t += sub
                y = y_new
                remaining -= sub
                if crossed:
                    if mode:
                        armed = -mode
                        mode = OFF
                    else:
                        mode = nxt
                        y = (y[0], y[1], mode * (y[3] + circ.drop), y[3])
                if remaining <= 1e-12 * h:
                    break
        if cyc >= record_from:
            stats.append((v_acc / period, p_acc / period, i_acc / period, on / period))
    return y, stats


def _sink_current(model, omega, drive, i_0, v, steps, settle_cycles, v_drop):
    circ = _Circuit(model, omega, drive, i_0, None, v, None, v_drop)
    _, stats = _integrate(circ, (0.0, 0.0, 0.0, v), settle_cycles, steps, settle_cycles - 2)
    return stats[-1][2]


def transient_oracle(model: BvdModel, omega: float, load: dict, n_cycles: int = 100,
                     steps_per_cycle: int = 400, drive: str = "sinusoidal_current",
                     i_0: float | None = None, c_out: float | None = None,
                     v_drop: float = 0.0, drift_tol: float = 1e-4) -> OracleResult:
    """Steady-state averages of the switched rectifier circuit.

    Parameters
    ----------
    load : dict
        ``{"resistor": ohms}`` or ``{"sink": volts}``.
    drive : {"sinusoidal_current", "full_bvd"}
    i_0 : float, optional
        Current amplitude for the sinusoidal drive.  Defaults to the
        short-circuit current of the motional branch, ``V_S/|Z_M|``.
    c_out : float, optional
        Output capacitor for resistor loads (default: R*C_out = 200 periods).

    Averages are taken over the final 20% of ``n_cycles``.  Raises
    :class:`OracleError` when the last two cycles differ by more than
    ``drift_tol`` (relative, on mean output current).
    """
    if drive not in ("sinusoidal_current", "full_bvd"):
        raise DomainError(f"unknown drive {drive!r}")
    if steps_per_cycle < 200:
        raise DomainError("steps_per_cycle must be at least 200")
    if n_cycles < 50:
        raise DomainError("n_cycles must be at least 50")
    if omega <= 0:
        raise DomainError("omega must be positive")
    if drive == "sinusoidal_current" and i_0 is None:
        i_0 = model.v_s_amp / abs(motional_impedance(model, omega))
    period = TWO_PI / omega
    record_from = n_cycles - max(2, int(round(0.2 * n_cycles)))
    instance = {"omega": omega, "load": dict(load), "drive": drive, "i_0": i_0,
                "n_cycles": n_cycles, "steps_per_cycle": steps_per_cycle}

    if "sink" in load:
        v = float(load["sink"])
        circ = _Circuit(model, omega, drive, i_0, None, v, None, v_drop)
        _, stats = _integrate(circ, (0.0, 0.0, 0.0, v), n_cycles, steps_per_cycle, record_from)
    elif "resistor" in load:
        r = float(load["resistor"])
        if r <= 0:
            raise DomainError("load resistance must be positive")
        cout = c_out if c_out is not None else 200.0 * period / r
        settle = 3 if drive == "sinusoidal_current" else 40
        probe_steps = steps_per_cycle

        def mismatch(v):
            return _sink_current(model, omega, drive, i_0, v, probe_steps, settle, v_drop) - v / r

        hi = 1e-3
        while mismatch(hi) > 0.0:
            hi *= 2.0
            if hi > 1e6:
                raise OracleError("no output voltage bracket found", instance)
        v0 = brentq(mismatch, 0.0, hi, xtol=1e-12, rtol=1e-10) if hi > 1e-3 else 0.5 * hi
        circ = _Circuit(model, omega, drive, i_0, r, None, cout, v_drop)
        if drive == "full_bvd":
            # pre-charge the motional branch with the sink run at v0
            pre = _Circuit(model, omega, drive, i_0, None, v0, None, v_drop)
            y_pre, _ = _integrate(pre, (0.0, 0.0, 0.0, v0), settle, steps_per_cycle, settle)
            y0 = (y_pre[0], y_pre[1], y_pre[2], v0)
        else:
            y0 = (0.0, 0.0, 0.0, v0)
        _, stats = _integrate(circ, y0, n_cycles, steps_per_cycle, record_from)
    else:
        raise DomainError("load must specify 'resistor' or 'sink'")

    last, prev = stats[-1], stats[-2]
    scale = max(abs(last[2]), abs(prev[2]), 1e-300)
    drift = abs(last[2] - prev[2]) / scale if (last[2] or prev[2]) else 0.0
    if drift > drift_tol:
        raise OracleError(f"steady state not reached (cycle drift {drift:.2e})", instance)
    n = len(stats)
    return OracleResult(
        v_rect_avg=sum(s[0] for s in stats) / n,
        p_out_avg=sum(s[1] for s in stats) / n,
        duty_rect=sum(s[3] for s in stats) / n,
        i_out_avg=sum(s[2] for s in stats) / n,
        drift=drift,
        cycles=n_cycles,
    )
