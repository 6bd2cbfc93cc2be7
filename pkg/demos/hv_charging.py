"""Charging a 12 V stimulation capacitor from a 1 V rail.

The HV charger multiplies the storage voltage through a pre-stage ratio
of 4, 8 or 12.  Starting at the lowest ratio and stepping up at 3.6 V and
7.2 V keeps the charge-sharing loss small while the capacitor is still
low, where a fixed x12 charger would throw energy away.  This demo runs
the bundled ``hv12v`` scenario and then repeats each charge with the
adaptive schedule turned off.

Run:  python3 demos/hv_charging.py
"""

import numpy as np

from mewpt.pmu import Segment, load_bundled, simulate

sc = load_bundled("hv12v")
tr = simulate(sc)
print("ratio changes:")
for e in tr.events_named("cr_hv"):
    print(f"  t = {e['clock'] * 1e3:.3f} ms at V_HV = {e['v_hv']:.4f} V: x{e['old']} -> x{e['new']}")
print(f"final V_HV {tr.column('v_hv')[-1]:.6f} V")


def charge(target, adaptive):
    segs = tuple(Segment(s.t_start, s.v_s_amp, s.load_current, target if s.hv_target else None, s.ramp_s)
                 for s in sc.schedule)
    run = simulate(sc.with_changes(schedule=segs, pmu=dict(sc.pmu, hv_adaptive=adaptive)))
    span = np.diff([0.0] + run.column("clock"))
    return float(np.dot(span, run.column("p_in_hv")))


print(f"\n{'target':>7s} {'adaptive':>11s} {'fixed x12':>11s} {'saving':>7s}")
for target in (3.0, 6.0, 9.0, 12.0):
    a, f = charge(target, True), charge(target, False)
    print(f"{target:6.1f}V {a * 1e6:8.2f} uJ {f * 1e6:8.2f} uJ {1 - a / f:7.0%}")
