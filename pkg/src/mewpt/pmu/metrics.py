"""Efficiency figures of merit computed from a simulation trace."""

from __future__ import annotations

import math

from ..errors import MetricUnavailableError
from ..interface import find_mpp
from .controllers import NORMAL_MPPT
from .engine import SimTrace

__all__ = ["efficiency_metrics"]


def _spans(clock):
    prev = 0.0
    out = []
    for c in clock:
        out.append(c - prev)
        prev = c
    return out


def efficiency_metrics(trace: SimTrace, model=None, omega: float | None = None,
                       window: tuple[float, float] | None = None) -> dict:
    """Windowed efficiencies.

    ``eta_mppt``
        rectifier output energy over maximum available energy, NORMAL_MPPT rows only.
    ``eta_overall``
        REG plus STO output energy over maximum available energy, same rows.
    ``hv_charge_eta``
        energy added to the HV capacitor over energy drawn by the HV charger.

    Rows are weighted by the interval they cover.  Rows lie in the window
    when ``start < clock <= end``; the default window is the whole trace.
    P_MPP comes from the trace, or, if ``model`` and ``omega`` are given, is
    recomputed per row from its ``v_s_amp`` with :func:`find_mpp`.
    Metrics with no applicable rows are ``None``; an empty window raises
    :class:`MetricUnavailableError`.
    """
    cols = trace.columns
    clock = cols["clock"]
    if not clock:
        raise MetricUnavailableError("trace is empty")
    lo, hi = window if window is not None else (-math.inf, math.inf)
    idx = [i for i, c in enumerate(clock) if lo < c <= hi]
    if not idx:
        raise MetricUnavailableError(f"no trace rows in window ({lo}, {hi}]")
    span = _spans(clock)

    if model is not None and omega is not None:
        unit = find_mpp(model.with_source(1.0), omega).p_out
        p_mpp = [unit * v * v for v in cols["v_s_amp"]]
    else:
        p_mpp = cols["p_mpp"]

    e_rect = e_out = e_mpp = 0.0
    e_hv_in = e_hv = 0.0
    t_norm = 0.0
    for i in idx:
        w = span[i]
        if cols["mode"][i] == NORMAL_MPPT and p_mpp[i] > 0:
            e_rect += cols["p_rect"][i] * w
            e_out += (cols["p_reg"][i] + cols["p_sto"][i]) * w
            e_mpp += p_mpp[i] * w
            t_norm += w
        e_hv_in += cols["p_in_hv"][i] * w
        e_hv += cols["p_hv"][i] * w

    return {
        "eta_mppt": e_rect / e_mpp if e_mpp > 0 else None,
        "eta_overall": e_out / e_mpp if e_mpp > 0 else None,
        "hv_charge_eta": e_hv / e_hv_in if e_hv_in > 0 else None,
        "p_rect_avg_w": e_rect / t_norm if t_norm > 0 else None,
        "p_mpp_avg_w": e_mpp / t_norm if t_norm > 0 else None,
        "window_s": [clock[idx[0]] - span[idx[0]], clock[idx[-1]]],
        "rows": len(idx),
    }
