"""Drive a live gateway the way the web console does: connect to the
snapshot/command stream, steer a node, start a transaction, inject a
fault, and watch colors change; all over the wire.

Run: python demos/05_live_console.py
(spawns its own gateway on port 8765; the browser console in frontend/
speaks exactly this protocol)
"""

import json
import threading
import time

from starlette.testclient import TestClient

from uaanet import Engine, chain_scenario
from uaanet.service import EngineRunner, build_app

cfg = chain_scenario(4, per_hop_delay_s=0.2, horizon_s=3600)
cfg.actions.clear()
engine = Engine(cfg)
runner = EngineRunner(engine, speed=20.0)
runner.start()
client = TestClient(build_app(runner, push_interval_s=0.01))


def snapshots_until(ws, predicate, timeout_s=20.0):
    deadline = time.time() + timeout_s
    while time.time() < deadline:
        frame = json.loads(ws.receive_text())
        if frame["type"] != "snapshot":
            print("  reply:", frame)
            continue
        if predicate(frame["data"]):
            return frame["data"]
    raise TimeoutError("no snapshot matched")


with client.websocket_connect("/stream") as ws:
    snap = snapshots_until(ws, lambda s: True)
    print(f"connected at tick {snap['tick']}; nodes:",
          [n["name"] for n in snap["nodes"]])

    print("\nsteering uav1 upward at 2 m/s...")
    ws.send_text(json.dumps({"v": 1, "type": "set_velocity", "node": "uav1",
                             "vx": 0.0, "vy": 0.0, "vz": 2.0}))
    snap = snapshots_until(
        ws, lambda s: any(n["name"] == "uav1" and n["z"] > 1.0 for n in s["nodes"]))
    uav1 = next(n for n in snap["nodes"] if n["name"] == "uav1")
    print(f"  uav1 climbed to z={uav1['z']:.2f} m")

    ws.send_text(json.dumps({"v": 1, "type": "set_velocity", "node": "uav1",
                             "vx": 0.0, "vy": 0.0, "vz": 0.0}))

    print("\nstarting an honest transaction uav0 -> uav3...")
    ws.send_text(json.dumps({"v": 1, "type": "start_transaction",
                             "source": "uav0", "dest": "uav3",
                             "plaintext": "hello from the console"}))
    snap = snapshots_until(
        ws, lambda s: s["transaction"] is not None and s["transaction"]["successful"])
    dest = next(n for n in snap["nodes"] if n["name"] == "uav3")
    print(f"  delivered; destination color: {dest['color']}")

    print("\ninjecting a drop at uav2 and retrying...")
    ws.send_text(json.dumps({"v": 1, "type": "inject_behavior",
                             "node": "uav2", "behavior": "drop@2"}))
    ws.send_text(json.dumps({"v": 1, "type": "start_transaction",
                             "source": "uav0", "dest": "uav3",
                             "plaintext": "second try"}))
    snap = snapshots_until(
        ws, lambda s: any(n["color"] == "red" for n in s["nodes"]))
    culprit = next(n for n in snap["nodes"] if n["color"] == "red")
    print(f"  detected culprit: {culprit['name']} (red)")

    print("\npaying the penalty...")
    ws.send_text(json.dumps({"v": 1, "type": "pay_penalty", "node": "uav2"}))
    snap = snapshots_until(
        ws, lambda s: all(not n["faulty"] for n in s["nodes"]))
    print("  culprit cleared; node table now:")
    for row in snap["node_table"]:
        print(f"    {row['address'][:12]}...  count={row['blacklist_count']}"
              f"  faulty_time={row['fault_time_s']:.0f}s"
              f"  penalty={row['penalty_token_meth'] / 1000:.0f}eth"
              f"  balance={row['balance_meth'] / 1000:.2f}eth")

runner.stop()
print("\ndone; run `uaanet serve <scenario>` and open frontend/ for the real console")
