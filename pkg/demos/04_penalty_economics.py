"""Follow one persistent offender through the escalating penalty ladder
to permanent removal: each offense doubles the penalty and stretches the
payment window tenfold, and the tenth offense ends in removal at the
next abort.

Run: python demos/04_penalty_economics.py
"""

from uaanet import ETHER, run_scenario
from uaanet.scenario import NodeSpec, ScenarioConfig

nodes = [
    NodeSpec("gcs", is_gcs=True, position=(-30.0, 30.0, 0.0)),
    NodeSpec("uav0", position=(0.0, 0.0, 0.0)),
    NodeSpec("offender", position=(50.0, 0.0, 0.0), behavior="drop@1"),
    NodeSpec("uav2", position=(100.0, 0.0, 0.0)),
    NodeSpec("uav3", position=(150.0, 0.0, 0.0)),
]
actions = [
    {"at_s": 1.0 + k, "type": "start_transaction",
     "source": "uav0", "dest": "uav3", "plaintext": f"probe {k}"}
    for k in range(10)
]
actions += [
    {"at_s": 11.5, "type": "abort", "gcs": "gcs"},
    {"at_s": 12.0, "type": "register_node", "name": "offender"},
]
cfg = ScenarioConfig(
    name="penalty-ladder", seed=7, range_m=60.0, per_hop_delay_s=0.05,
    horizon_s=13.0, genesis_balance_meth=4000 * ETHER,
    auto_pay_penalty=True, nodes=nodes, actions=actions,
)

engine, report = run_scenario(cfg)

print("offense ladder for 'offender' (auto-paying between transactions):")
print(f"  {'k':>2} {'penalty':>10} {'window':>12}")
total_paid = 0
for event in engine.events:
    if event["event"] == "penalty_escalated":
        print(f"  {event['count']:>2} {event['penalty_meth'] / ETHER:>8.0f}eth"
              f" {event['fault_window_s']:>10.0f}s")
    if event["event"] == "penalty_paid":
        total_paid += event["amount_meth"]

abort = next(e for e in engine.events if e["event"] == "abort")
rejection = next(e for e in engine.events if e["event"] == "command_rejected")
print(f"\npenalties paid in total: {total_paid / ETHER:.0f} eth")
print(f"abort removed: {abort['removed']}")
print(f"re-registration attempt: {rejection['error']}: {rejection['reason']}")
print(f"supply conserved: {report.token_audit['conserved']}"
      f" (escrow now {report.token_audit['escrow_meth'] / ETHER:.0f} eth)")
