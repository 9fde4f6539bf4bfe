"""Every sequence family at a glance: layouts, cycle times, pulse counts.

Compiles each family at the same inter-pulse delay and prints the timing
table, then dumps one full timeline to show the event format.
"""

from spinbath import (
    compile_cdd,
    compile_cpmg,
    compile_hahn,
    compile_pdd,
    compile_udd,
    cycle_stats,
    dump_timeline,
)

TAU = 30.0
TAU_P = 10.4

rows = [
    ("hahn", compile_hahn(TAU, TAU_P)),
    ("cp", compile_cpmg(TAU, TAU_P, variant="cp")),
    ("cpmg", compile_cpmg(TAU, TAU_P)),
    ("cpmg2", compile_cpmg(TAU, TAU_P, variant="cpmg2")),
    ("pdd", compile_pdd(TAU, TAU_P)),
    ("cdd2", compile_cdd(2, TAU, TAU_P)),
    ("cdd3", compile_cdd(3, TAU, TAU_P)),
    ("udd4", compile_udd(4, 4 * (TAU + TAU_P), TAU_P)),
]

print(f"tau = {TAU} us, tau_p = {TAU_P} us")
print(f"{'family':8} {'pulses':>6} {'tau_c_us':>9}  axes")
for name, tl in rows:
    stats = cycle_stats(tl)
    axes = ",".join(e.axis for e in tl.events)
    if len(axes) > 40:
        axes = axes[:37] + "..."
    print(f"{name:8} {stats.pulses_per_cycle:6d} {stats.tau_c:9.1f}  {axes}")

# concatenation grows fast: each level wraps the previous one in four
# copies plus four new pulses
print()
for n in (1, 2, 3, 4):
    tl = compile_cdd(n, TAU, TAU_P)
    print(f"concatenation level {n}: {tl.pulses_per_cycle:3d} pulses, "
          f"tau_c = {tl.cycle_time:7.1f} us")

print()
print(dump_timeline(compile_cpmg(TAU, TAU_P)))
