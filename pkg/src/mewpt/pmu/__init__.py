"""Envelope-level simulation of the wireless-power PMU and its controllers."""

from .config import BUCK_RATIOS, ETA_TH_LEVELS, PmuConfig
from .controllers import (
    NORMAL_MPPT, STARTUP, STORAGE_REUSE, PmuState, hv_charge_step, hv_ratio, mode_controller_step,
    mppt_fsm_step, reg_optimizer_step,
)
from .engine import TRACE_COLUMNS, SimTrace, simulate
from .equilibrium import EquilibriumPoint, RectifierCurve, rectifier_equilibrium
from .metrics import efficiency_metrics
from .rsc import OutputNode, RscStage, Transfer, rsc_ratio_set, rsc_transfer
from .scenario import Scenario, Segment, bundled_scenarios, load_bundled, load_scenario, scenario_from_dict

__all__ = [
    "BUCK_RATIOS", "ETA_TH_LEVELS", "PmuConfig", "PmuState", "STARTUP", "NORMAL_MPPT",
    "STORAGE_REUSE", "hv_charge_step", "hv_ratio", "mode_controller_step", "mppt_fsm_step",
    "reg_optimizer_step", "TRACE_COLUMNS", "SimTrace", "simulate", "EquilibriumPoint",
    "RectifierCurve", "rectifier_equilibrium", "efficiency_metrics", "OutputNode", "RscStage",
    "Transfer", "rsc_ratio_set", "rsc_transfer", "Scenario", "Segment", "bundled_scenarios",
    "load_bundled", "load_scenario", "scenario_from_dict",
]
