"""Static configuration of the simulated power management unit."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from fractions import Fraction

from ..errors import ConfigError

__all__ = ["PmuConfig", "BUCK_RATIOS", "ETA_TH_LEVELS"]

BUCK_RATIOS = (Fraction(1, 4), Fraction(1, 3), Fraction(1, 2), Fraction(2, 3), Fraction(3, 4), Fraction(1))
# REG_EN duty thresholds selectable by the 2-bit code
ETA_TH_LEVELS = (0.125, 0.25, 0.375, 0.5)


@dataclass(frozen=True)
class PmuConfig:
    """PMU parameters.  Voltages in volts, times in seconds, capacitances in farads.

    Converter capacitance per stage is ``c_fly * n_fly * cells``; REG, STO
    and the AUX bank all use the same value.
    """

    adder_enabled: bool = True
    duty_window: tuple[float, float] = (0.50, 0.56)
    t_wait_sto: float = 2e-3
    t_wait_reg: float = 1e-3
    eta_th_code: int = 1
    eta_th_levels: tuple[float, ...] = ETA_TH_LEVELS
    v_drop_ref: float = 1.17
    v_reg_target: float = 1.2
    v_reg_hyst: float = 0.02
    c_reg: float = 1e-6
    c_fly: float = 83e-12
    n_fly: int = 2
    cells: int = 16
    f_sw: float = 10e6
    bottom_plate_fraction: float = 0.002
    overhead_w: float = 1e-6
    c_sto: float = 1e-3
    esr_sto: float = 5.0
    v_sto_full: float = 1.6
    sto_resume_hyst: float = 0.05
    c_hv: float = 100e-9
    c_fly_hv: float = 10e-12
    v_hv_target: float = 12.0
    hv_thresholds: tuple[float, float] = (3.6, 7.2)
    hv_adaptive: bool = True
    v_hv_guard: float = 12.6
    por_threshold: float = 0.8
    por_release: float = 0.7
    v_ldo_nom: float = 1.0
    ldo_dropout: float = 0.1
    i_ldo: float = 5e-6
    duty_filter_tau: float | None = None
    duty_filter_periods: float = 50.0
    brownout_v: float = 0.3
    brownout_debounce: float = 50e-6
    restore_v: float = 0.9
    v_sto_min: float = 0.9
    mppt_enabled: bool = True
    reg_optimizer_enabled: bool = True
    aux_enabled: bool = True

    def __post_init__(self):
        lo, hi = self.duty_window
        if not (0.0 < lo < hi < 1.0):
            raise ConfigError("duty_window must satisfy 0 < low < high < 1")
        t1, t2 = self.hv_thresholds
        if not (0.0 < t1 < t2):
            raise ConfigError("hv_thresholds must be positive and strictly increasing")
        if self.v_hv_target > 12.0:
            raise ConfigError("v_hv_target must not exceed 12 V")
        if self.v_hv_target <= 0:
            raise ConfigError("v_hv_target must be positive")
        if not 5e6 <= self.f_sw <= 11e6:
            raise ConfigError("f_sw must lie in [5 MHz, 11 MHz]")
        if not 0 <= self.eta_th_code < len(self.eta_th_levels):
            raise ConfigError(f"eta_th_code must index eta_th_levels (0..{len(self.eta_th_levels) - 1})")
        positive = ("t_wait_sto", "t_wait_reg", "c_reg", "c_fly", "c_sto", "c_hv", "c_fly_hv",
                    "v_reg_target", "por_threshold", "duty_filter_periods", "brownout_debounce",
                    "v_sto_full", "restore_v", "v_sto_min")
        for name in positive:
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ConfigError(f"{name} must be positive")
        if self.n_fly < 1 or self.cells < 1:
            raise ConfigError("n_fly and cells must be at least 1")
        nonneg = ("bottom_plate_fraction", "overhead_w", "esr_sto", "v_reg_hyst", "ldo_dropout",
                  "i_ldo", "brownout_v", "sto_resume_hyst")
        for name in nonneg:
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v >= 0):
                raise ConfigError(f"{name} must be non-negative")
        if self.duty_filter_tau is not None and not self.duty_filter_tau > 0:
            raise ConfigError("duty_filter_tau must be positive")
        if not 0 < self.por_release <= self.por_threshold:
            raise ConfigError("por_release must lie in (0, por_threshold]")
        if not self.v_drop_ref < self.v_reg_target:
            raise ConfigError("v_drop_ref must lie below v_reg_target")

    @property
    def eta_th(self) -> float:
        return self.eta_th_levels[self.eta_th_code]

    @property
    def c_stage(self) -> float:
        """Flying capacitance of one RSC stage (REG, STO or AUX)."""
        return self.c_fly * self.n_fly * self.cells

    @property
    def c_stage_hv(self) -> float:
        return self.c_fly_hv * self.n_fly

    def filter_tau(self, omega: float) -> float:
        if self.duty_filter_tau is not None:
            return self.duty_filter_tau
        return self.duty_filter_periods * 2.0 * math.pi / omega

    @classmethod
    def from_dict(cls, overrides: dict | None) -> "PmuConfig":
        """Build from a (possibly partial) mapping; unknown keys are rejected."""
        overrides = dict(overrides or {})
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(overrides) - names)
        if unknown:
            raise ConfigError(f"unknown pmu keys: {', '.join(unknown)}")
        for key in ("duty_window", "hv_thresholds", "eta_th_levels"):
            if key in overrides:
                overrides[key] = tuple(float(x) for x in overrides[key])
        try:
            return cls(**overrides)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        for key in ("duty_window", "hv_thresholds", "eta_th_levels"):
            d[key] = list(d[key])
        return d

    def replace(self, **kw) -> "PmuConfig":
        return dataclasses.replace(self, **kw)
