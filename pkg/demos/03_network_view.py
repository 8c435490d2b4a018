"""Render the simulator's 3D network view at the key moments of a drop
scenario: forwarding in progress, the drop, detection, and the culprit's
return after paying its penalty.

Run: python demos/03_network_view.py  (writes network_view.png)
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from uaanet import Engine, chain_scenario

cfg = chain_scenario(5, per_hop_delay_s=0.5, drop_at=2, horizon_s=20,
                     margin_s=16.0)
cfg.actions.append({"at_s": 8.0, "type": "pay_penalty", "node": "uav2"})
cfg.actions.append({"at_s": 9.0, "type": "inject_behavior",
                    "node": "uav2", "behavior": "honest"})
cfg.actions.append({"at_s": 10.0, "type": "start_transaction",
                    "source": "uav0", "dest": "uav4", "plaintext": "retry"})
engine = Engine(cfg)

EDGE_STYLE = {
    "range": dict(color="lightgray", linestyle="-", linewidth=0.8),
    "forwarding": dict(color="tab:blue", linestyle=":", linewidth=2.0),
    "dropped": dict(color="black", linestyle=":", linewidth=2.0),
}


def draw(ax, snap, title):
    pos = {n["name"]: (n["x"], n["y"], n["z"]) for n in snap["nodes"]}
    for edge in snap["edges"]:
        (x1, y1, z1), (x2, y2, z2) = pos[edge["a"]], pos[edge["b"]]
        ax.plot([x1, x2], [y1, y2], [z1, z2], **EDGE_STYLE[edge["kind"]])
    for node in snap["nodes"]:
        ax.scatter(node["x"], node["y"], node["z"], color=node["color"],
                   s=60, depthshade=False)
        ax.text(node["x"], node["y"], node["z"] + 4, node["name"], fontsize=7)
    ax.set_title(title, fontsize=9)
    ax.set_zlim(0, 40)


def run_until(predicate):
    snap = engine.step()
    while not predicate(snap) and engine.clock.tick < engine.horizon_ticks:
        snap = engine.step()
    return snap


fig = plt.figure(figsize=(12, 9))
frames = []

snap = run_until(lambda s: any(e["kind"] == "forwarding" for e in s["edges"]))
frames.append((snap, "forwarding (blue dotted)"))

snap = run_until(lambda s: any(e["kind"] == "dropped" for e in s["edges"]))
frames.append((snap, "uav2 drops the packet (black dotted)"))

snap = run_until(lambda s: any(n["color"] == "red" for n in s["nodes"]))
frames.append((snap, "detection: culprit turns red"))

snap = run_until(lambda s: any(n["color"] == "green" for n in s["nodes"]))
frames.append((snap, "after penalty: retry succeeds, destination green"))

for i, (snap, title) in enumerate(frames, start=1):
    draw(fig.add_subplot(2, 2, i, projection="3d"), snap,
         f"t={snap['sim_time_s']:.2f}s  {title}")

fig.suptitle("drop, detection, penalty, recovery")
fig.tight_layout()
fig.savefig("network_view.png", dpi=120)
print("wrote network_view.png")
for snap, title in frames:
    colors = {n["name"]: n["color"] for n in snap["nodes"]}
    print(f"  t={snap['sim_time_s']:6.2f}s  {title:45s} {colors}")
