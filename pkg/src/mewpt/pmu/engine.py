"""
Envelope-level PMU simulator.

The carrier is never time-stepped.  Each step of length ``dt`` solves the
quasi-static rectifier operating point against the summed converter demand,
moves the corresponding charge packets, updates the duty filter and the
controllers, and books every joule: input, capacitor storage, loads and
losses.  Trace rows aggregate whole steps, so their powers are exact
interval averages.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from scipy.optimize import brentq

from ..errors import EnergyBalanceError
from ..interface import find_mpp
from .config import PmuConfig
from .controllers import (
    NORMAL_MPPT, STARTUP, STORAGE_REUSE, N_RATIOS, PmuState, enable_for_target, hv_charge_step,
    hv_ratio, mode_controller_step, mppt_fsm_step, reg_optimizer_step,
)
from .equilibrium import RectifierCurve, _finish, rectifier_equilibrium
from .rsc import OutputNode, rsc_ratio_set, rsc_transfer
from .scenario import Scenario

__all__ = ["SimTrace", "simulate", "TRACE_COLUMNS"]

TRACE_COLUMNS = (
    "clock", "mode", "v_s_amp", "v_rect", "v_reg", "v_sto", "v_hv", "v_ldo", "theta",
    "duty_filtered", "reg_en_duty", "cr_sto", "cr_reg", "cr_hv", "hv_active", "sto_paused",
    "aux_to", "por", "p_rect", "p_in_reg", "p_in_sto", "p_in_hv", "p_in_ldo", "p_reg", "p_sto",
    "p_hv", "p_load", "losses", "p_mpp", "eta_mppt", "eta_overall",
)
_ENERGY_KEYS = ("rect", "in_reg", "in_sto", "in_hv", "in_ldo", "reg", "sto", "hv", "load", "loss",
                "mpp")
_ENERGY_TOL = 1e-3


@dataclass
class SimTrace:
    """Time-ordered simulation record.

    ``columns`` maps each name in :data:`TRACE_COLUMNS` to a list.  Power
    columns are averages over the interval ending at ``clock``; voltages and
    controller states are sampled at ``clock``.
    """

    scenario: str
    columns: dict
    events: list = field(default_factory=list)
    energy: dict = field(default_factory=dict)
    dt: float = 0.0
    ratios: tuple = ()

    def __len__(self):
        return len(self.columns["clock"])

    def column(self, name):
        return self.columns[name]

    def rows(self):
        names = list(self.columns)
        for vals in zip(*(self.columns[n] for n in names)):
            yield dict(zip(names, vals))

    def modes(self) -> list[str]:
        """Mode sequence with consecutive repeats collapsed."""
        out = []
        for m in self.columns["mode"]:
            if not out or out[-1] != m:
                out.append(m)
        return out

    def events_named(self, name):
        return [e for e in self.events if e["event"] == name]


def _ratio_value(ratios, i):
    return float(ratios[i])


class _Engine:
    def __init__(self, scenario: Scenario, cfg: PmuConfig, dt: float | None):
        self.sc = scenario
        self.cfg = cfg
        self.dt = float(dt if dt is not None else scenario.dt)
        self.omega = scenario.omega
        self.model = scenario.model
        self.ratios = rsc_ratio_set("STO", cfg.adder_enabled)
        self.n_ratios = len(self.ratios)
        unit = find_mpp(self.model.with_source(1.0), self.omega)
        self.p_mpp_unit = unit.p_out
        self.unit_curve = RectifierCurve(self.model.with_source(1.0), self.omega)
        self.v_oc_unit = self.unit_curve.open_circuit()
        self.alpha = 1.0 - math.exp(-self.dt / cfg.filter_tau(self.omega))

        ini = scenario.initial
        s = PmuState()
        s.v_sto = float(ini.get("v_sto", 0.0))
        s.v_reg = float(ini.get("v_reg", 0.0))
        s.v_hv = float(ini.get("v_hv", 0.0))
        s.cr_sto_index = int(ini.get("cr_sto_index", 0))
        s.cr_reg_index = int(ini.get("cr_reg_index", self.n_ratios - 1))
        s.duty_filtered = float(ini.get("duty_filtered", 0.0))
        s.cr_hv = hv_ratio(s.v_hv, cfg)
        s.theta = math.pi
        self.s = s
        self.sto_paused = s.v_sto >= cfg.v_sto_full
        s.flags["sto_full"] = self.sto_paused
        self.locked = False

        seg0, v0 = scenario.segment_at(0.0)
        self.input_ok = v0 * self.v_oc_unit >= cfg.restore_v
        self.detect_count = 0
        self.n_debounce = max(1, round(cfg.brownout_debounce / self.dt))
        self.n_reg = max(1, round(cfg.t_wait_reg / self.dt))
        self.n_sto = max(1, round(cfg.t_wait_sto / self.dt))
        self.n_aux = max(self.n_reg, self.n_sto)
        self.reg_count = self.sto_count = self.aux_count = 0
        self.reg_en_acc = 0.0
        self.hv_done_target = None

        every = scenario.trace_every if scenario.trace_every else self.dt
        self.row_steps = max(1, round(every / self.dt))
        self.cols = {c: [] for c in TRACE_COLUMNS}
        self.events = []
        self.acc = dict.fromkeys(_ENERGY_KEYS, 0.0)
        self.acc_steps = 0
        self.cum = dict.fromkeys(("in", "load", "ldo", "loss"), 0.0)
        self.e_caps0 = self._e_caps()
        self.v_s = v0

    # -- helpers -------------------------------------------------------
    def _e_caps(self):
        c = self.cfg
        s = self.s
        return 0.5 * (c.c_reg * s.v_reg**2 + c.c_sto * s.v_sto**2 + c.c_hv * s.v_hv**2)

    def _event(self, t, name, **detail):
        self.events.append({"clock": t, "event": name, **detail})

    def _c_reg_eff(self):
        aux = self.cfg.aux_enabled and self.s.aux_to == "REG"
        return self.cfg.c_stage * (2 if aux else 1)

    def _c_sto_eff(self):
        aux = self.cfg.aux_enabled and self.s.aux_to == "STO"
        return self.cfg.c_stage * (2 if aux else 1)

    # -- consumers on a supply rail ----------------------------------------
    def _consumers(self, v, parts):
        """Charge drawn from a rail at voltage ``v`` during one step."""
        dt, cfg, s = self.dt, self.cfg, self.s
        out = {}
        q = 0.0
        if parts["reg"]:
            node = parts["reg_node"]
            r = _ratio_value(self.ratios, s.cr_reg_index)
            c_eff = self._c_reg_eff()
            en = min(enable_for_target(r, v, node, cfg.v_reg_target, dt, c_eff, cfg),
                     parts.get("reg_cap", 1.0))
            tr = rsc_transfer(r, v, node, dt, cfg, enable=en, c_eff=c_eff)
            out["reg"] = (tr, en)
            q += tr.q_in
        if parts["sto"]:
            r = _ratio_value(self.ratios, s.cr_sto_index)
            tr = rsc_transfer(r, v, parts["sto_node"], dt, cfg, c_eff=self._c_sto_eff())
            out["sto"] = tr
            q += tr.q_in
        if parts["hv"]:
            res = hv_charge_step(s.v_hv, s.cr_hv, v, parts["hv_target"], dt, cfg)
            out["hv"] = res
            q += res[0].q_in
        if parts["ldo"] and v > 0.0:
            out["ldo"] = cfg.i_ldo * dt
            q += cfg.i_ldo * dt
        return q, out

    # -- one step --------------------------------------------------------
    def step(self, k):
        cfg, s, dt = self.cfg, self.s, self.dt
        t = k * dt
        seg, v_s = self.sc.segment_at(t)
        self.v_s = v_s
        v_oc = v_s * self.v_oc_unit

        # power-present detector on the unloaded rectifier voltage, with
        # hysteresis and debounce (a heavily loaded rail is not lost input)
        raw = v_oc >= (cfg.brownout_v if self.input_ok else cfg.restore_v)
        if raw != self.input_ok:
            self.detect_count += 1
            if self.detect_count >= self.n_debounce:
                self.input_ok = raw
                self.detect_count = 0
                if not raw:
                    self._event(t, "brownout", v_oc=v_oc)
        else:
            self.detect_count = 0

        storage_ok = s.v_sto >= cfg.v_sto_min
        mode, por = mode_controller_step(s, cfg, self.input_ok, storage_ok)
        if mode != s.mode:
            self._flush(t)
            self._event(t, "mode", old=s.mode, new=mode)
        if por != s.flags["por"]:
            self._event(t, "por", value=por)
            if not por:
                self.locked = False
        s.mode, s.flags["por"] = mode, por
        running = por and mode in (NORMAL_MPPT, STORAGE_REUSE)

        # HV task
        target = seg.hv_target
        if target is None:
            self.hv_done_target = None
        hv = running and target is not None and self.hv_done_target != target
        if hv and not s.hv_active:
            self._event(t, "hv_start", target=target)
        s.hv_active = hv

        # REG output node: load plus the LDO once V_REG has locked
        q_load = 0.0
        q_ldo_reg = 0.0
        if self.locked:
            q_load = min(seg.load_current * dt, cfg.c_reg * s.v_reg)
            q_ldo_reg = min(cfg.i_ldo * dt, max(0.0, cfg.c_reg * s.v_reg - q_load))
        reg_node = OutputNode(s.v_reg, cfg.c_reg, 0.0, q_load + q_ldo_reg)
        parts = {"reg": running, "reg_node": reg_node, "sto": False, "hv": hv,
                 "hv_target": target, "ldo": not self.locked}

        e = {"rect": 0.0, "loss": 0.0, "esr": 0.0}
        sto_tr = None
        theta = s.theta
        duty_now = 0.0
        v_sto_new = s.v_sto
        if mode == STORAGE_REUSE:
            # rail tied to the supercapacitor terminal
            b = 1.0 / (2.0 * cfg.c_sto) + cfg.esr_sto / dt
            v = s.v_sto
            for _ in range(60):
                q, out = self._consumers(v, parts)
                v_new = max(0.0, s.v_sto - q * b)
                if abs(v_new - v) <= 1e-14 * max(1.0, v):
                    v = v_new
                    break
                v = v_new
            q, out = self._consumers(v, parts)
            v_mid = s.v_sto - q / (2.0 * cfg.c_sto)
            e["esr"] = q * (v_mid - v)
            v_sto_new = s.v_sto - q / cfg.c_sto
            v_rail = v
            theta = math.pi
        else:
            curve = RectifierCurve(self.model.with_source(v_s), self.omega) if v_s > 0 else None
            # STO joins once V_REG has locked; before that REG is throttled so the
            # rail keeps the LDO above its POR level
            sto_on = running and self.locked and mode == NORMAL_MPPT and not self.sto_paused
            if sto_on:
                parts["sto"] = True
                parts["sto_node"] = OutputNode(s.v_sto, cfg.c_sto, cfg.esr_sto, 0.0)
            eq, q, out = self._solve(curve, parts)
            if running and not self.locked and curve is not None:
                eq, q, out = self._throttle(curve, parts, eq, q, out)
            v_rail = eq.v_rect if eq is not None else 0.0
            theta = eq.theta if eq is not None else math.pi
            duty_now = (1.0 - theta / math.pi) if (eq is not None and not eq.brownout) else 0.0
            if eq is not None and eq.brownout:
                v_rail, duty_now = 0.0, 0.0
                q, out = self._consumers(0.0, parts)
            e["rect"] = q * v_rail
            sto_tr = out.get("sto")
            if sto_tr is not None:
                v_sto_new = s.v_sto + sto_tr.q_out / cfg.c_sto

        # apply transfers
        acc = self.acc
        p_in = dict.fromkeys(("reg", "sto", "hv", "ldo"), 0.0)
        en_reg = 0.0
        if "reg" in out:
            tr, en_reg = out["reg"]
            p_in["reg"] = tr.q_in * v_rail
            e["loss"] += tr.e_loss
            v_reg_mid = reg_node.v0 + (tr.q_out - reg_node.q_load) / (2.0 * reg_node.c)
            acc["reg"] += tr.q_out * v_reg_mid
            s.v_reg = reg_node.v0 + (tr.q_out - reg_node.q_load) / reg_node.c
        else:
            v_reg_mid = s.v_reg - reg_node.q_load / (2.0 * reg_node.c)
            s.v_reg -= reg_node.q_load / reg_node.c
        e_load = q_load * v_reg_mid
        e_ldo = q_ldo_reg * v_reg_mid
        if sto_tr is not None:
            p_in["sto"] = sto_tr.q_in * v_rail
            e["loss"] += sto_tr.e_loss
            v_mid = s.v_sto + sto_tr.q_out / (2.0 * cfg.c_sto)
            e["esr"] += sto_tr.q_out * (sto_tr.v_terminal - v_mid)
            acc["sto"] += sto_tr.q_out * sto_tr.v_terminal
        if "hv" in out:
            tr, v_hv_new, cr_next, crossings = out["hv"]
            p_in["hv"] = tr.q_in * v_rail
            e["loss"] += tr.e_loss
            acc["hv"] += tr.q_out * tr.v_terminal
            s.v_hv = v_hv_new
            for frac, old, new, v_x in crossings:
                self._event(t + frac * dt, "cr_hv", old=old, new=new, v_hv=v_x)
            s.cr_hv = cr_next
            if s.v_hv >= min(target, cfg.v_hv_guard) * (1.0 - 1e-9):
                self.hv_done_target = target
                self._event(t + dt, "hv_done", v_hv=s.v_hv)
        if "ldo" in out:
            p_in["ldo"] = out["ldo"] * v_rail
            e_ldo += out["ldo"] * v_rail
        s.v_sto = v_sto_new
        e["loss"] += e["esr"]

        # rectifier node and duty filter
        s.v_rect = v_rail
        s.theta = theta
        s.duty_filtered += (duty_now - s.duty_filtered) * self.alpha

        # LDO and lock
        if self.locked:
            supply = s.v_reg
        elif mode == STORAGE_REUSE:
            supply = v_rail
        else:
            supply = v_rail
        s.v_ldo = min(cfg.v_ldo_nom, max(0.0, supply - cfg.ldo_dropout))
        if running and not self.locked and s.v_reg >= cfg.v_reg_target - cfg.v_reg_hyst:
            self.locked = True
            self._event(t + dt, "reg_lock", v_reg=s.v_reg)

        # STO pause with hysteresis
        if not self.sto_paused and s.v_sto >= cfg.v_sto_full:
            self.sto_paused = True
            self._event(t + dt, "sto_pause", v_sto=s.v_sto)
        elif self.sto_paused and s.v_sto < cfg.v_sto_full - cfg.sto_resume_hyst:
            self.sto_paused = False
            self._event(t + dt, "sto_resume", v_sto=s.v_sto)
        s.flags["sto_full"] = self.sto_paused

        # controllers
        if running:
            self.reg_en_acc += en_reg
            self.reg_count += 1
            if self.reg_count >= self.n_reg:
                s.reg_en_duty = self.reg_en_acc / self.reg_count
                s.flags["drop_vreg"] = self.locked and s.v_reg < cfg.v_drop_ref
                s.flags["flag_eta_low"] = s.reg_en_duty < cfg.eta_th
                if cfg.reg_optimizer_enabled:
                    new = reg_optimizer_step(s, cfg, self.n_ratios)
                    if new != s.cr_reg_index:
                        self._event(t + dt, "cr_reg", old=s.cr_reg_index, new=new,
                                    reg_en_duty=s.reg_en_duty, drop=s.flags["drop_vreg"])
                    s.cr_reg_index = new
                self.reg_en_acc = 0.0
                self.reg_count = 0
            if mode == NORMAL_MPPT and not self.sto_paused and cfg.mppt_enabled:
                self.sto_count += 1
                if self.sto_count >= self.n_sto:
                    new = mppt_fsm_step(s, cfg, self.n_ratios)
                    if new != s.cr_sto_index:
                        self._event(t + dt, "cr_sto", old=s.cr_sto_index, new=new,
                                    duty=s.duty_filtered)
                    s.cr_sto_index = new
                    self.sto_count = 0
            else:
                self.sto_count = 0
            self.aux_count += 1
            if cfg.aux_enabled and self.aux_count >= self.n_aux:
                want = "STO" if (s.reg_en_duty >= cfg.eta_th and not self.sto_paused) else "REG"
                if want != s.aux_to:
                    self._event(t + dt, "aux", old=s.aux_to, new=want)
                s.aux_to = want
                self.aux_count = 0
        else:
            self.reg_count = self.sto_count = self.aux_count = 0
            self.reg_en_acc = 0.0

        # bookkeeping
        e_loss = e["loss"]
        self.cum["in"] += e["rect"]
        self.cum["load"] += e_load
        self.cum["ldo"] += e_ldo
        self.cum["loss"] += e_loss
        acc["rect"] += e["rect"]
        acc["in_reg"] += p_in["reg"]
        acc["in_sto"] += p_in["sto"]
        acc["in_hv"] += p_in["hv"]
        acc["in_ldo"] += p_in["ldo"]
        acc["load"] += e_load + e_ldo
        acc["loss"] += e_loss
        acc["mpp"] += self.p_mpp_unit * v_s * v_s * dt
        self.acc_steps += 1
        s.clock = t + dt

    def _solve(self, curve, parts):
        if curve is None:
            q, out = self._consumers(0.0, parts)
            return None, q, out

        def demand(v):
            return self._consumers(v, parts)[0] / self.dt

        eq = rectifier_equilibrium(curve.model, self.omega, demand, theta_hint=self.s.theta,
                                   curve=curve)
        q, out = self._consumers(0.0 if eq.brownout else eq.v_rect, parts)
        return eq, q, out

    def _throttle(self, curve, parts, eq, q, out):
        """Cap the REG enable so the rail stays at the LDO's POR headroom."""
        v_u = self.cfg.por_threshold + self.cfg.ldo_dropout
        if not (eq.brownout or eq.v_rect < v_u) or curve.open_circuit() <= v_u:
            return eq, q, out
        th_u = brentq(lambda th: float(curve.point(th)[0]) - v_u, 0.0, math.pi, xtol=1e-14)
        v_u, i_u = (float(x) for x in curve.point(th_u))

        def excess(cap):
            parts["reg_cap"] = cap
            return self._consumers(v_u, parts)[0] / self.dt - i_u

        if excess(0.0) >= 0.0:
            return eq, q, out
        brentq(excess, 0.0, 1.0, xtol=1e-15)
        q, out = self._consumers(v_u, parts)
        return _finish(curve, th_u, i_u - q / self.dt, False), q, out

    # -- trace -----------------------------------------------------------
    def residual(self):
        c = self.cum
        return c["in"] - (self._e_caps() - self.e_caps0) - c["load"] - c["ldo"] - c["loss"]

    def check_energy(self):
        denom = self.cum["in"] if self.cum["in"] > 0 else self.e_caps0
        res = self.residual()
        if abs(res) > _ENERGY_TOL * denom + 1e-18:
            raise EnergyBalanceError(
                f"energy balance residual {res:.3e} J exceeds {_ENERGY_TOL:.1%} of {denom:.3e} J "
                f"at t = {self.s.clock:.6g} s", clock=self.s.clock, residual=res)

    def _flush(self, t):
        if self.acc_steps == 0:
            return
        s, c, acc = self.s, self.cols, self.acc
        span = self.acc_steps * self.dt
        p = {k: acc[k] / span for k in _ENERGY_KEYS}
        c["clock"].append(t)
        c["mode"].append(s.mode)
        c["v_s_amp"].append(self.v_s)
        c["v_rect"].append(s.v_rect)
        c["v_reg"].append(s.v_reg)
        c["v_sto"].append(s.v_sto)
        c["v_hv"].append(s.v_hv)
        c["v_ldo"].append(s.v_ldo)
        c["theta"].append(s.theta)
        c["duty_filtered"].append(s.duty_filtered)
        c["reg_en_duty"].append(s.reg_en_duty)
        c["cr_sto"].append(str(self.ratios[s.cr_sto_index]))
        c["cr_reg"].append(str(self.ratios[s.cr_reg_index]))
        c["cr_hv"].append(s.cr_hv)
        c["hv_active"].append(int(s.hv_active))
        c["sto_paused"].append(int(self.sto_paused))
        c["aux_to"].append(s.aux_to)
        c["por"].append(int(s.flags["por"]))
        c["p_rect"].append(p["rect"])
        c["p_in_reg"].append(p["in_reg"])
        c["p_in_sto"].append(p["in_sto"])
        c["p_in_hv"].append(p["in_hv"])
        c["p_in_ldo"].append(p["in_ldo"])
        c["p_reg"].append(p["reg"])
        c["p_sto"].append(p["sto"])
        c["p_hv"].append(p["hv"])
        c["p_load"].append(p["load"])
        c["losses"].append(p["loss"])
        c["p_mpp"].append(p["mpp"])
        c["eta_mppt"].append(p["rect"] / p["mpp"] if p["mpp"] > 0 else float("nan"))
        c["eta_overall"].append((p["reg"] + p["sto"]) / p["mpp"] if p["mpp"] > 0 else float("nan"))
        self.acc = dict.fromkeys(_ENERGY_KEYS, 0.0)
        self.acc_steps = 0
        self.check_energy()

    def run(self) -> SimTrace:
        n = max(1, round(self.sc.duration / self.dt))
        for k in range(n):
            self.step(k)
            if self.acc_steps >= self.row_steps:
                self._flush(self.s.clock)
        self._flush(self.s.clock)
        self.check_energy()
        energy = {
            "input_j": self.cum["in"],
            "load_j": self.cum["load"],
            "ldo_j": self.cum["ldo"],
            "loss_j": self.cum["loss"],
            "stored_initial_j": self.e_caps0,
            "stored_final_j": self._e_caps(),
            "residual_j": self.residual(),
        }
        return SimTrace(scenario=self.sc.name, columns=self.cols, events=self.events, energy=energy,
                        dt=self.dt, ratios=tuple(str(r) for r in self.ratios))


def simulate(scenario: Scenario, cfg: PmuConfig | None = None, dt: float | None = None) -> SimTrace:
    """Run ``scenario`` and return its trace.

    ``cfg`` defaults to the scenario's own PMU section; ``dt`` overrides the
    scenario timestep.  Deterministic: identical inputs give identical
    traces.  Raises :class:`~mewpt.errors.EnergyBalanceError` when the
    bookkeeping residual exceeds 0.1% of the cumulative input energy (or of
    the initially stored energy for runs with no input).
    """
    cfg = cfg if cfg is not None else scenario.config()
    return _Engine(scenario, cfg, dt).run()
