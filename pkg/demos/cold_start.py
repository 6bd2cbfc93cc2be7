"""Cold start and regulator ratio search.

The source ramps up while the storage capacitor holds too little charge
to run the system.  Once power-on reset releases, the regulator starts at
its highest conversion ratio and, while the ramp continues, steps down one
notch per decision period as long as its enable duty says the ratio is
oversized.  It settles on the cheapest ratio that still holds the 1.2 V
rail.

Run:  python3 demos/cold_start.py
"""

from mewpt.pmu import load_bundled, simulate

sc = load_bundled("cold_start")
tr = simulate(sc)
print(sc.description)
print("\nmode sequence:", " -> ".join(tr.modes()))
for name in ("por", "reg_lock", "mode"):
    for e in tr.events_named(name):
        extra = {k: v for k, v in e.items() if k not in ("clock", "event")}
        print(f"  {e['clock'] * 1e3:8.3f} ms  {name:9s} {extra}")

print("\nCR_REG steps:")
for e in tr.events_named("cr_reg"):
    print(f"  {e['clock'] * 1e3:8.3f} ms  {tr.ratios[e['old']]} -> {tr.ratios[e['new']]}")

tail = len(tr) // 3
v_reg = tr.column("v_reg")[-tail:]
eta = sum(tr.column("p_reg")[-tail:]) / sum(tr.column("p_in_reg")[-tail:])
print(f"\nlast third of the run: V_REG in [{min(v_reg):.4f}, {max(v_reg):.4f}] V, "
      f"REG efficiency {eta:.3f}")
