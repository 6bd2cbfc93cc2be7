"""Quasi-static operating point of the rectifier under a converter load."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from ..errors import DomainError
from ..interface import OperatingPoint, equivalent_impedance, operating_point
from ..transducer import BvdModel, motional_impedance

__all__ = ["EquilibriumPoint", "RectifierCurve", "rectifier_equilibrium"]


@dataclass(frozen=True)
class EquilibriumPoint(OperatingPoint):
    """Operating point plus the supply/demand balance that produced it."""

    i_supply: float = 0.0
    imbalance: float = 0.0
    brownout: bool = False


class RectifierCurve:
    """DC output characteristic of the rectifier, parametrized by theta.

    Along the curve ``v(theta) = I_0(1 - cos theta)/(2 w C_P)`` and the
    average rectified current is ``p/v = I_0 (1 + cos theta)/pi``.
    """

    def __init__(self, model: BvdModel, omega: float):
        if not omega > 0:
            raise DomainError("omega must be positive")
        self.model = model
        self.omega = omega
        self._zm = complex(motional_impedance(model, omega))

    def point(self, theta, v_s=None):
        v_s = self.model.v_s_amp if v_s is None else v_s
        if isinstance(theta, float):
            return self._point_scalar(theta, v_s)
        th = np.asarray(theta, dtype=float)
        i0 = v_s / np.abs(self._zm + equivalent_impedance(th, self.omega, self.model.c_p))
        c = np.cos(th)
        v = i0 * (1.0 - c) / (2.0 * self.omega * self.model.c_p)
        i = i0 * (1.0 + c) / math.pi
        return v, i

    def _point_scalar(self, th, v_s):
        # hot path of the equilibrium solver; same formulas as point()
        if not 0.0 <= th <= math.pi:
            raise DomainError("theta must lie in [0, pi]")
        sn, c = math.sin(th), math.cos(th)
        k = 1.0 / (math.pi * self.omega * self.model.c_p)
        z = self._zm + complex(sn * sn * k, (sn * c - th) * k)
        i0 = v_s / abs(z)
        return i0 * (1.0 - c) / (2.0 * self.omega * self.model.c_p), i0 * (1.0 + c) / math.pi

    def open_circuit(self, v_s=None) -> float:
        return float(self.point(math.pi, v_s)[0])


def rectifier_equilibrium(model: BvdModel, omega: float, converter_demand: Callable[[float], float],
                          tol: float = 1e-12, theta_hint: float | None = None, grid: int = 48,
                          curve: RectifierCurve | None = None) -> EquilibriumPoint:
    """Balance rectifier supply current against the converter demand.

    Finds theta where ``i_supply(theta) = converter_demand(v_rect(theta))``.
    When several crossings exist the one with the highest rectified voltage
    is returned, which is the stable point for a demand that rises with
    voltage.  A bracket around ``theta_hint`` is tried before the full grid
    scan.  If demand exceeds supply everywhere, the theta = 0 point is
    returned with ``brownout=True``.
    """
    curve = curve or RectifierCurve(model, omega)

    def g(th):
        v, i = curve.point(th)
        return float(i) - converter_demand(float(v))

    g_pi = g(math.pi)
    if g_pi >= 0.0:
        return _finish(curve, math.pi, g_pi, False)

    root = None
    if theta_hint is not None and 0.0 < theta_hint < math.pi:
        for half in (0.01, 0.05):
            a, b = max(theta_hint - half, 1e-9), min(theta_hint + half, math.pi)
            ga, gb = g(a), (g(b) if b < math.pi else g_pi)
            if ga > 0.0 >= gb:
                root = brentq(g, a, b, xtol=tol, rtol=4 * np.finfo(float).eps) if ga * gb < 0 else b
                break
            if ga <= 0.0:
                break  # hint sits above the highest root: rescan
    if root is None:
        ths = np.linspace(0.0, math.pi, grid + 1)
        gs = [g(t) for t in ths[:-1]] + [g_pi]
        k = None
        for j in range(grid - 1, -1, -1):
            if gs[j] > 0.0 >= gs[j + 1]:
                k = j
                break
        if k is None:
            return _finish(curve, 0.0, gs[0], True)
        a, b = ths[k], ths[k + 1]
        root = b if gs[k + 1] == 0.0 else brentq(g, a, b, xtol=tol, rtol=4 * np.finfo(float).eps)
    return _finish(curve, root, g(root), False)


def _finish(curve, theta, imbalance, brownout):
    op = operating_point(curve.model, curve.omega, theta)
    _, i = curve.point(theta)
    return EquilibriumPoint(**{f: getattr(op, f) for f in op.__dataclass_fields__},
                            i_supply=float(i), imbalance=float(imbalance), brownout=brownout)
