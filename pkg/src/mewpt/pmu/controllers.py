"""Control state machines of the PMU and the state they act on."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .config import PmuConfig
from .rsc import OutputNode, Transfer, hv_bottom_plate_caps, rsc_transfer

__all__ = [
    "STARTUP",
    "NORMAL_MPPT",
    "STORAGE_REUSE",
    "PmuState",
    "mppt_fsm_step",
    "reg_optimizer_step",
    "hv_ratio",
    "hv_charge_step",
    "mode_controller_step",
    "enable_for_target",
]

STARTUP, NORMAL_MPPT, STORAGE_REUSE = "STARTUP", "NORMAL_MPPT", "STORAGE_REUSE"
N_RATIOS = 12


@dataclass
class PmuState:
    mode: str = STARTUP
    v_rect: float = 0.0
    v_reg: float = 0.0
    v_sto: float = 0.0
    v_hv: float = 0.0
    v_ldo: float = 0.0
    theta: float = 0.0
    duty_filtered: float = 0.0
    reg_en_duty: float = 1.0
    cr_sto_index: int = 0
    cr_reg_index: int = N_RATIOS - 1
    cr_hv: int = 4
    hv_active: bool = False
    aux_to: str = "REG"
    flags: dict = field(default_factory=lambda: {
        "flag_eta_low": False, "drop_vreg": False, "por": False, "sto_full": False})
    clock: float = 0.0


def mppt_fsm_step(state: PmuState, cfg: PmuConfig, n_ratios: int = N_RATIOS) -> int:
    """Skewed-duty MPPT: hold the filtered rectifier duty inside the window.

    Duty below the window means the rectifier is under-loaded, so the STO
    ratio steps up to draw more power; above the window it steps down.
    """
    lo, hi = cfg.duty_window
    i = state.cr_sto_index
    if state.duty_filtered < lo:
        return min(i + 1, n_ratios - 1)
    if state.duty_filtered > hi:
        return max(i - 1, 0)
    return i


def reg_optimizer_step(state: PmuState, cfg: PmuConfig, n_ratios: int = N_RATIOS) -> int:
    """Regulation-efficiency optimizer.

    A latched V_REG droop raises CR_REG (and wins over everything else);
    otherwise a REG_EN duty below ``eta_th`` lowers it.
    """
    i = state.cr_reg_index
    if state.flags.get("drop_vreg"):
        return min(i + 1, n_ratios - 1)
    if state.reg_en_duty < cfg.eta_th:
        return max(i - 1, 0)
    return i


def hv_ratio(v_hv: float, cfg: PmuConfig) -> int:
    """Total HV conversion ratio for the present output voltage."""
    if not cfg.hv_adaptive:
        return 12
    t1, t2 = cfg.hv_thresholds
    if v_hv <= t1:
        return 4
    if v_hv <= t2:
        return 8
    return 12


def enable_for_target(ratio: float, v_in: float, node: OutputNode, target: float, dt: float,
                      c_eff: float, cfg: PmuConfig) -> float:
    """Clock-enable fraction that brings ``node`` exactly to ``target`` by the end of ``dt``.

    Returns 1 when even continuous switching falls short (the stage is
    capacity-limited) and 0 when no charge is needed.
    """
    q_need = node.q_load + node.c * (target - node.v0)
    if q_need <= 0.0:
        return 0.0
    b = 1.0 / (2.0 * node.c) + node.esr / dt
    headroom = ratio * v_in - node.v0 + (node.q_load - q_need) * b
    if headroom <= 0.0:
        return 1.0
    a = q_need / headroom
    return min(1.0, a / (0.5 * c_eff * cfg.f_sw * dt))


def hv_charge_step(v_hv: float, cr_hv: int, v_in: float, target: float, dt: float,
                   cfg: PmuConfig) -> tuple[Transfer, float, int, list]:
    """One envelope step of the HV charger.

    The pre-stage times the fixed 4x stage is modeled as one charge-packet
    stage of ratio ``cr_hv`` whose bottom-plate loss scales with the number
    of switched capacitors.  A step that crosses a ratio threshold is split
    there, so CR_HV changes exactly at the threshold voltage; charging stops
    exactly at ``target``.  Returns the combined transfer, the new V_HV, the
    ratio for the next step and the crossings as ``(fraction_of_dt, old,
    new, v_hv)`` tuples.
    """
    goal = min(target, cfg.v_hv_guard)
    c_eff = cfg.c_stage_hv
    v, cr = v_hv, cr_hv
    rem = 1.0
    q_in = q_out = e_out = e_share = e_bp = cycles = 0.0
    crossings = []
    while rem > 0.0 and v < goal:
        nxt = _next_threshold(v, cfg)
        seg_goal = goal if nxt is None else min(goal, nxt)
        node = OutputNode(v0=v, c=cfg.c_hv)
        seg_dt = rem * dt
        en = enable_for_target(cr, v_in, node, seg_goal, seg_dt, c_eff, cfg)
        c_bp = cfg.bottom_plate_fraction * cfg.c_fly_hv * hv_bottom_plate_caps(cr)
        tr = rsc_transfer(cr, v_in, node, seg_dt, cfg, enable=en, c_eff=c_eff, c_bp=c_bp,
                          overhead=False)
        q_in += tr.q_in
        q_out += tr.q_out
        e_out += tr.q_out * tr.v_terminal
        e_share += tr.e_share
        e_bp += tr.e_bottom
        cycles += tr.cycles
        if en < 1.0 and tr.q_out > 0.0:
            v = seg_goal  # reached exactly by construction of the enable fraction
            rem *= 1.0 - en
            if seg_goal == nxt:
                new = hv_ratio(math.nextafter(v, math.inf), cfg)
                crossings.append((1.0 - rem, cr, new, v))
                cr = new
                continue
        else:
            v = v + tr.q_out / cfg.c_hv
        break
    e_oh = cfg.overhead_w * dt if (cycles > 0.0 and v_in > 0.0) else 0.0
    q_in += e_oh / v_in if e_oh else 0.0
    tr = Transfer(q_in=q_in, q_out=q_out, e_loss=e_share + e_bp + e_oh, e_share=e_share,
                  e_bottom=e_bp, e_overhead=e_oh, v_terminal=e_out / q_out if q_out > 0 else v_hv,
                  cycles=cycles, v_in=v_in)
    return tr, v, hv_ratio(v, cfg), crossings


def _next_threshold(v: float, cfg: PmuConfig) -> float | None:
    if not cfg.hv_adaptive:
        return None
    for t in cfg.hv_thresholds:
        if v < t:
            return t
    return None


def mode_controller_step(state: PmuState, cfg: PmuConfig, input_power_available: bool,
                         storage_usable: bool) -> tuple[str, bool]:
    """Operation-mode transitions; returns ``(mode, por)``.

    ``input_power_available`` is the debounced power-present detector and
    ``storage_usable`` says whether the supercapacitor can hold the rail.
    POR asserts when V_LDO reaches ``cfg.por_threshold`` and releases below
    ``cfg.por_release``.
    """
    held = state.flags.get("por", False)
    por = state.v_ldo >= (cfg.por_release if held else cfg.por_threshold)
    if input_power_available:
        mode = NORMAL_MPPT if por else STARTUP
    elif storage_usable:
        mode = STORAGE_REUSE
    else:
        mode, por = STARTUP, False
    return mode, por
