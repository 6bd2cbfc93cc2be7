"""MPPT loop response to a sudden drop in received power.

The bundled ``figure16_like`` scenario holds the receiver at its maximum
power point, then cuts the source amplitude by 40%.  The storage converter
behaves like a voltage sink, so after the drop it pulls less current than
the new maximum power point needs and the rectifier duty leaves the
tracking window on the low side.  The MPPT state machine answers by
stepping the storage conversion ratio CR_STO up by one notch, which pulls
the duty back into the window.

Run:  python3 demos/pmu_step_response.py
"""

from mewpt.pmu import efficiency_metrics, load_bundled, simulate

sc = load_bundled("figure16_like")
cfg = sc.config()
t_step = sc.schedule[1].t_start
tr = simulate(sc)

print(sc.description)
print(f"\nduty window {cfg.duty_window}, source step at {t_step * 1e3:g} ms")
print(f"{'t [ms]':>7s} {'v_s':>6s} {'duty':>7s} {'CR_STO':>7s} {'P_rect':>9s} {'P_MPP':>9s}")
# every 0.25 ms from 1 ms before the step to 4 ms after it
shown = -1.0
for row in tr.rows():
    t = row["clock"]
    if t_step - 1e-3 <= t <= t_step + 4e-3 and t >= shown + 0.25e-3 - 1e-12:
        shown = t
        print(f"{t * 1e3:7.2f} {row['v_s_amp']:6.3f} {row['duty_filtered']:7.4f} {row['cr_sto']:>7s} "
              f"{row['p_rect'] * 1e3:6.4f} mW {row['p_mpp'] * 1e3:6.4f} mW")

print("\nCR_STO changes:")
for e in tr.events_named("cr_sto"):
    print(f"  t = {e['clock'] * 1e3:.3f} ms, duty {e['duty']:.4f}: "
          f"{tr.ratios[e['old']]} -> {tr.ratios[e['new']]}")
m = efficiency_metrics(tr, window=sc.metrics_window)
print(f"\nMPPT efficiency over the scoring window: {m['eta_mppt']:.4f}")
