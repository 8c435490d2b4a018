"""Measure the drop-detection delay across every route size and drop
position, confirm it follows (n - 1 - x) * per_hop, and plot the law.

Run: python demos/02_detection_time_law.py  (writes detection_law.png)
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from uaanet import expected_detection_time, sweep_detection_law, sweep_table2

# --- the published five-row table --------------------------------------------

print("published drop rows at a constant 2.9 s per hop:")
result = sweep_table2()
print(f"  {'n':>3} {'x':>3} {'measured':>9} {'predicted':>9}")
for row in result["constant_mode"]["rows"]:
    predicted = expected_detection_time(row["n"], row["x"], 2.9)
    print(f"  {row['n']:>3} {row['x']:>3} {row['delay_s']:>8.3f}s {predicted:>8.3f}s")
print(f"  per-row-delay mode average per hop: "
      f"{result['per_row_mode']['avg_per_hop_s']:.3f} s")

# --- the full sweep -----------------------------------------------------------

print("\nfull sweep, n in 3..10, every drop position:")
rows = sweep_detection_law(per_hop=2.9)
mismatches = [r for r in rows if abs(r["delay_s"] - r["expected_delay_s"]) > 0.005
              or r["culprit"] != r["expected_culprit"]]
print(f"  {len(rows)} runs, {len(rows) - len(mismatches)} exact matches,"
      f" {len(mismatches)} mismatches")
assert not mismatches

# --- plot ----------------------------------------------------------------------

fig, ax = plt.subplots(figsize=(7, 4.5))
for n in range(3, 11):
    points = [(r["x"], r["delay_s"]) for r in rows if r["n"] == n]
    xs, ys = zip(*points)
    ax.plot(xs, ys, "o-", label=f"n={n}")
ax.set_xlabel("hops completed before the drop (x)")
ax.set_ylabel("detection delay (s)")
ax.set_title("drop detection delay = (n - 1 - x) * 2.9 s")
ax.legend(ncol=2, fontsize=8)
ax.grid(True, alpha=0.3)
fig.tight_layout()
fig.savefig("detection_law.png", dpi=120)
print("\nwrote detection_law.png")
