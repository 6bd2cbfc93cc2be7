"""
Behavioral charge-packet model of the reconfigurable switched-capacitor
(RSC) stages.

Each switching cycle with a positive differential ``delta = r*v_in - v_out``
moves ``q = C_eff*delta/2`` to the output and ``r*q`` out of the input; the
difference ``q*delta = C_eff*delta^2/2`` is the charge-sharing loss.  Cycles
with no positive differential are skipped, so they cost neither charge
sharing nor bottom-plate loss.  Bottom-plate parasitics draw
``C_bp*v_in`` per active cycle and dissipate all of it.  A fixed controller
overhead is drawn from the input for the whole interval.

The accounting is exact: ``q_in*v_in == q_out*v_terminal + e_loss``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..errors import DomainError
from .config import BUCK_RATIOS, PmuConfig

__all__ = [
    "RscStage",
    "OutputNode",
    "Transfer",
    "rsc_ratio_set",
    "rsc_transfer",
    "HV_PRE_RATIOS",
    "HV_FIXED_RATIO",
    "hv_bottom_plate_caps",
]

HV_PRE_RATIOS = (1, 2, 3)
HV_FIXED_RATIO = 4
_STAGES = ("REG", "STO", "AUX", "HV_PRE", "HV_4X")


def rsc_ratio_set(stage: str = "STO", adder_enabled: bool = True) -> list[Fraction]:
    """Legal conversion ratios of a stage, ascending.

    REG and STO: the six buck ratios plus, with the voltage adder, ``1 + r``
    for each of them (12 values).  HV_PRE: {1, 2, 3}.  HV_4X: {4}.
    """
    if stage in ("REG", "STO", "AUX"):
        out = set(BUCK_RATIOS)
        if adder_enabled:
            out |= {1 + r for r in BUCK_RATIOS}
        return sorted(out)
    if stage == "HV_PRE":
        return [Fraction(r) for r in HV_PRE_RATIOS]
    if stage == "HV_4X":
        return [Fraction(HV_FIXED_RATIO)]
    raise DomainError(f"unknown stage {stage!r}; expected one of {_STAGES}")


def hv_bottom_plate_caps(cr_hv: int) -> int:
    """Flying capacitors switched by the HV chain: 3 in the 4x stage plus pre-stage caps."""
    return 3 + HV_PRE_RATIOS.index(cr_hv // HV_FIXED_RATIO)


@dataclass
class RscStage:
    name: str
    current_ratio: Fraction
    assigned_to: str | None = None

    def __post_init__(self):
        if self.name not in _STAGES:
            raise DomainError(f"unknown stage {self.name!r}")
        if self.name == "AUX" and self.assigned_to not in ("REG", "STO"):
            raise DomainError("AUX stage must be assigned to REG or STO")


@dataclass(frozen=True)
class OutputNode:
    """Capacitive output: ``c`` (F) behind ``esr`` (ohm), with ``q_load`` drawn by other consumers."""

    v0: float
    c: float
    esr: float = 0.0
    q_load: float = 0.0


@dataclass(frozen=True)
class Transfer:
    q_in: float
    q_out: float
    e_loss: float
    e_share: float
    e_bottom: float
    e_overhead: float
    v_terminal: float
    cycles: float
    v_in: float

    @property
    def e_in(self) -> float:
        return self.q_in * self.v_in


def rsc_transfer(stage, v_in: float, v_out, dt: float, cfg: PmuConfig, *,
                 enable: float = 1.0, c_eff: float | None = None, c_bp: float | None = None,
                 overhead: bool = True) -> Transfer:
    """Charge moved by one stage during ``dt``.

    Parameters
    ----------
    stage : RscStage or ratio
        Its ``current_ratio`` (or the ratio itself) is the ideal gain.
    v_out : float or OutputNode
        A fixed output voltage, or a capacitive node.  For a node, the
        terminal voltage is the step midpoint ``v0 + (q - q_load)/(2C)``
        plus the ESR drop, and the transfer is solved implicitly so that
        charge and energy both balance exactly.
    enable : float
        Fraction of ``dt`` with the stage clocked (REG_EN duty).
    c_eff, c_bp : float, optional
        Flying and bottom-plate capacitance; default ``cfg.c_stage`` and
        ``cfg.bottom_plate_fraction * c_eff``.
    """
    if dt <= 0:
        raise DomainError("dt must be positive")
    if v_in < 0:
        raise DomainError("v_in must be non-negative")
    r = float(stage.current_ratio if isinstance(stage, RscStage) else stage)
    c = cfg.c_stage if c_eff is None else c_eff
    cbp = cfg.bottom_plate_fraction * c if c_bp is None else c_bp
    cycles = max(0.0, min(1.0, enable)) * cfg.f_sw * dt
    a = 0.5 * c * cycles

    if isinstance(v_out, OutputNode):
        node = v_out
        b = 1.0 / (2.0 * node.c) + node.esr / dt
        d0 = r * v_in - node.v0 + node.q_load * b
        q_out = a * d0 / (1.0 + a * b) if d0 > 0.0 else 0.0
        v_t = node.v0 + (q_out - node.q_load) * b
    else:
        v_t = float(v_out)
        if v_t < 0:
            raise DomainError("v_out must be non-negative")
        q_out = a * max(0.0, r * v_in - v_t)

    delta = r * v_in - v_t
    if q_out > 0.0:
        e_share = q_out * delta
        q_bp = cbp * v_in * cycles
    else:
        q_out, e_share, q_bp = 0.0, 0.0, 0.0
    e_bp = q_bp * v_in
    e_oh = cfg.overhead_w * dt if (overhead and v_in > 0.0) else 0.0
    q_oh = e_oh / v_in if v_in > 0.0 else 0.0
    q_in = r * q_out + q_bp + q_oh
    return Transfer(q_in=q_in, q_out=q_out, e_loss=e_share + e_bp + e_oh, e_share=e_share,
                    e_bottom=e_bp, e_overhead=e_oh, v_terminal=v_t, cycles=cycles if q_out > 0 else 0.0,
                    v_in=v_in)
