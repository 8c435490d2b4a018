import pytest

from uaanet.engine import (
    Behavior,
    Engine,
    HONEST,
    MotionState,
    TICK_SECONDS,
    drop_at,
    expected_detection_time,
    mutate,
    parse_behavior,
    run_scenario,
    tamper_at,
)
from uaanet.ledger import ETHER
from uaanet.registry import UnknownNode
from uaanet.scenario import NodeSpec, ScenarioConfig, chain_scenario


def events_of(engine, kind):
    return [e for e in engine.events if e["event"] == kind]


def one_event(engine, kind):
    found = events_of(engine, kind)
    assert len(found) == 1, f"expected one {kind}, got {len(found)}"
    return found[0]


# -- timing law --------------------------------------------------------------


def test_expected_detection_time_published_rows():
    assert expected_detection_time(8, 3, 2.9) == pytest.approx(11.6)
    assert expected_detection_time(6, 4, 2.9) == pytest.approx(2.9)
    for n in range(2, 12):
        assert expected_detection_time(n, n - 2, 0.7) == pytest.approx(0.7)


def test_expected_detection_time_domain():
    with pytest.raises(ValueError):
        expected_detection_time(1, 0, 2.9)
    with pytest.raises(ValueError):
        expected_detection_time(6, 5, 2.9)
    with pytest.raises(ValueError):
        expected_detection_time(6, -1, 2.9)
    with pytest.raises(ValueError):
        expected_detection_time(6, 2, 0.0)


def test_honest_route_arrives_after_n_minus_1_hops():
    engine, report = run_scenario(chain_scenario(4, per_hop_delay_s=2.9))
    t0 = one_event(engine, "route_built")["tick"]
    done = one_event(engine, "transaction_success")["tick"]
    assert done - t0 == 3 * 580
    assert not events_of(engine, "transaction_unsuccessful")


def test_drop_detected_at_the_law_instant():
    engine, report = run_scenario(chain_scenario(6, per_hop_delay_s=2.9, drop_at=2))
    dropped = one_event(engine, "packet_dropped")
    failed = one_event(engine, "transaction_unsuccessful")
    assert (failed["tick"] - dropped["tick"]) * TICK_SECONDS == pytest.approx(
        expected_detection_time(6, 2, 2.9), abs=TICK_SECONDS
    )
    assert failed["culprit"] == "uav2"
    assert failed["reason"] == "timeout"


def test_tamper_settles_on_arrival_with_bad_decrypt():
    engine, report = run_scenario(chain_scenario(5, per_hop_delay_s=0.5, tamper_at=2))
    failed = one_event(engine, "transaction_unsuccessful")
    assert failed["reason"] == "bad_decrypt"
    assert failed["culprit"] == "uav2"
    tampered = [e for e in events_of(engine, "hop_forwarded") if e["tampered"]]
    assert len(tampered) == 1 and tampered[0]["sender"] == "uav2"


# -- motion -------------------------------------------------------------------


def test_constant_velocity_is_exact_over_200_ticks():
    motion = MotionState(vx=1.0)
    assert motion.position(200) == (1.0, 0.0, 0.0)
    motion = MotionState(vx=3.5, vy=-2.0, vz=0.25)
    x, y, z = motion.position(2000)  # 10 s
    assert x == 3.5 * 10 and y == -2.0 * 10 and z == 0.25 * 10


def test_set_velocity_reanchors_position():
    motion = MotionState(vx=2.0)
    motion.set_velocity(100, 0.0, 0.0, 0.0)  # after 0.5 s at 2 m/s
    assert motion.position(100) == (1.0, 0.0, 0.0)
    assert motion.position(10_000) == (1.0, 0.0, 0.0)


def test_velocity_command_applies_at_tick_boundary():
    cfg = chain_scenario(3, per_hop_delay_s=0.1)
    engine = Engine(cfg)
    engine.set_velocity("uav1", 1.0, 0.0, 0.0)
    snap = engine.step()
    node = next(n for n in snap["nodes"] if n["name"] == "uav1")
    assert node["vx"] == 1.0
    with pytest.raises(UnknownNode):
        engine.set_velocity("nobody", 1.0, 0.0, 0.0)


def test_zero_velocity_holds_position():
    cfg = chain_scenario(3)
    engine = Engine(cfg)
    before = engine.nodes["uav1"].motion.position(engine.clock.tick)
    for _ in range(50):
        engine._advance()
    assert engine.nodes["uav1"].motion.position(engine.clock.tick) == before


def test_steering_out_of_range_splits_the_graph():
    cfg = ScenarioConfig(
        nodes=[
            NodeSpec("a", position=(0, 0, 0)),
            NodeSpec("b", position=(50, 0, 0)),
        ],
        range_m=60,
        horizon_s=5,
        per_hop_delay_s=0.1,
        actions=[
            {"at_s": 0.1, "type": "set_velocity", "node": "b",
             "vx": 100.0, "vy": 0.0, "vz": 0.0},
            {"at_s": 2.0, "type": "start_transaction", "source": "a",
             "dest": "b", "plaintext": "hi"},
        ],
    )
    engine, report = run_scenario(cfg)
    assert one_event(engine, "no_route")["message"] == "No route found"
    assert report.transactions[0]["outcome"] == "no_route"
    assert report.token_audit["conserved"]


# -- behaviors ------------------------------------------------------------------


def test_behavior_parsing():
    assert parse_behavior("honest") == HONEST
    assert parse_behavior("drop@2") == drop_at(2)
    assert parse_behavior("tamper@3") == tamper_at(3)
    assert parse_behavior({"kind": "tamper", "hop": 2, "byte": 4, "mask": 1}) == Behavior(
        kind="tamper", hop=2, byte_index=4, xor_mask=1
    )
    with pytest.raises(ValueError):
        parse_behavior("explode@1")
    with pytest.raises(ValueError):
        parse_behavior("drop@0")  # the source cannot be scripted to drop


def test_mutation_changes_exactly_one_byte():
    data = bytes(range(32))
    out = mutate(data, tamper_at(1, byte_index=5, xor_mask=0x10))
    assert out != data and len(out) == len(data)
    assert [i for i in range(32) if out[i] != data[i]] == [5]


def test_injected_behavior_applies_to_next_participation():
    cfg = chain_scenario(4, per_hop_delay_s=0.1, horizon_s=6)
    cfg.actions.append({"at_s": 2.0, "type": "inject_behavior",
                        "node": "uav1", "behavior": "drop@1"})
    cfg.actions.append({"at_s": 3.0, "type": "start_transaction",
                        "source": "uav0", "dest": "uav3", "plaintext": "two"})
    engine, report = run_scenario(cfg)
    assert [t["outcome"] for t in report.transactions] == ["success", "unsuccessful"]
    assert report.transactions[1]["culprit"] == "uav1"


def test_drop_means_the_hop_never_fires():
    engine, _ = run_scenario(chain_scenario(5, per_hop_delay_s=0.2, drop_at=2))
    senders = [e["sender"] for e in events_of(engine, "hop_forwarded")]
    assert senders == ["uav0", "uav1"]


# -- economics and penalties -----------------------------------------------------


def test_auto_pay_clears_the_culprit():
    cfg = chain_scenario(4, per_hop_delay_s=0.1, drop_at=1, horizon_s=8,
                         auto_pay_penalty=True)
    engine, report = run_scenario(cfg)
    paid = one_event(engine, "penalty_paid")
    assert paid["node"] == "uav1" and paid["amount_meth"] == 2 * ETHER
    addr = engine.nodes["uav1"].address
    assert not engine.registry.records[addr].faulty
    assert engine.registry.blacklist[addr] == 1


def test_pay_penalty_action_restores_participation():
    cfg = chain_scenario(4, per_hop_delay_s=0.1, drop_at=1, horizon_s=10)
    cfg.actions.append({"at_s": 3.0, "type": "pay_penalty", "node": "uav1"})
    cfg.actions.append({"at_s": 4.0, "type": "inject_behavior",
                        "node": "uav1", "behavior": "honest"})
    cfg.actions.append({"at_s": 5.0, "type": "start_transaction",
                        "source": "uav0", "dest": "uav3", "plaintext": "again"})
    engine, report = run_scenario(cfg)
    assert [t["outcome"] for t in report.transactions] == ["unsuccessful", "success"]
    assert events_of(engine, "penalty_paid")


def test_escalation_event_carries_the_schedule():
    cfg = chain_scenario(4, per_hop_delay_s=0.1, drop_at=1, horizon_s=20,
                         auto_pay_penalty=True, margin_s=18.0)
    for k in range(2, 5):
        cfg.actions.append({"at_s": 1.0 + k, "type": "start_transaction",
                            "source": "uav0", "dest": "uav3",
                            "plaintext": f"tx{k}"})
    engine, report = run_scenario(cfg)
    escalations = events_of(engine, "penalty_escalated")
    assert len(escalations) == 4
    for event in escalations:
        k = event["count"]
        assert event["penalty_meth"] == 2 * ETHER * 2 ** (k - 1)
        assert event["fault_window_s"] == 10.0 * 10 ** (k - 1)


def test_all_honest_run_has_no_culprits():
    cfg = chain_scenario(6, per_hop_delay_s=0.1)
    engine, report = run_scenario(cfg)
    assert report.culprits == []
    assert report.token_audit["conserved"]
    assert report.detections == []


# -- snapshots and commands -------------------------------------------------------


def test_snapshot_colors_follow_the_table():
    cfg = ScenarioConfig(
        nodes=[
            NodeSpec("gcs", is_gcs=True, position=(0, 30, 0)),
            NodeSpec("uav0", position=(0, 0, 0)),
            NodeSpec("uav1", position=(40, 0, 0), behavior=drop_at(1)),
            NodeSpec("uav2", position=(80, 0, 0)),
            NodeSpec("uav3", position=(120, 0, 0)),
        ],
        range_m=50,
        per_hop_delay_s=0.1,
        horizon_s=10,
        actions=[{"at_s": 0.5, "type": "start_transaction", "source": "uav0",
                  "dest": "uav3", "plaintext": "x"}],
    )
    engine = Engine(cfg)
    snap = engine.step()
    colors = {n["name"]: n["color"] for n in snap["nodes"]}
    assert colors["gcs"] == "blue"
    assert colors["uav0"] == "black"
    engine.horizon_ticks = 10_000
    while not [e for e in engine.events if e["event"] == "transaction_unsuccessful"]:
        engine._advance()
    snap = engine.snapshot()
    colors = {n["name"]: n["color"] for n in snap["nodes"]}
    assert colors["uav1"] == "red"  # detected culprit
    kinds = {e["kind"] for e in snap["edges"]}
    assert "dropped" in kinds and "range" in kinds


def test_snapshot_success_turns_destination_green():
    engine, _ = run_scenario(chain_scenario(3, per_hop_delay_s=0.1))
    snap = engine.snapshot()
    colors = {n["name"]: n["color"] for n in snap["nodes"]}
    assert colors["uav2"] == "green"
    assert {e["kind"] for e in snap["edges"]} >= {"range", "forwarding"}


def test_snapshot_node_table_matches_ledger():
    engine, _ = run_scenario(chain_scenario(3, per_hop_delay_s=0.1))
    snap = engine.snapshot()
    for row in snap["node_table"]:
        assert row["balance_meth"] == engine.ledger.balance(row["address"])
        assert set(row) == {"address", "blacklist_count", "fault_time_s",
                            "penalty_token_meth", "balance_meth"}


def test_snapshot_events_are_incremental():
    cfg = chain_scenario(3, per_hop_delay_s=0.1)
    engine = Engine(cfg)
    first = engine.snapshot()
    assert [e["event"] for e in first["events"]].count("node_registered") == 3
    assert engine.snapshot()["events"] == []


def test_rejected_commands_surface_reasons():
    cfg = chain_scenario(3, per_hop_delay_s=0.1)
    engine = Engine(cfg)
    engine.submit({"type": "pay_penalty", "node": "uav1"})
    engine._advance()
    rejected = one_event(engine, "command_rejected")
    assert rejected["error"] == "NotFaulty"
    assert engine.validate_command({"type": "set_velocity", "node": "ghost"}) is not None
    assert engine.validate_command({"type": "bogus"}) is not None
    assert engine.validate_command(
        {"type": "set_velocity", "node": "uav1", "vx": 1, "vy": 0, "vz": 0}
    ) is None


def test_commands_apply_in_submission_order():
    cfg = chain_scenario(3, per_hop_delay_s=0.1)
    engine = Engine(cfg)
    engine.submit({"type": "set_velocity", "node": "uav1", "vx": 1.0, "vy": 0.0, "vz": 0.0})
    engine.submit({"type": "set_velocity", "node": "uav1", "vx": 7.0, "vy": 0.0, "vz": 0.0})
    engine._advance()
    assert engine.nodes["uav1"].motion.vx == 7.0


def test_register_node_action_extends_the_network():
    cfg = chain_scenario(3, per_hop_delay_s=0.1, horizon_s=8)
    cfg.actions.append({"at_s": 1.0, "type": "register_node", "name": "late",
                        "position": [150.0, 0.0, 0.0]})
    cfg.actions.append({"at_s": 2.0, "type": "start_transaction",
                        "source": "uav0", "dest": "late", "plaintext": "hello"})
    engine, report = run_scenario(cfg)
    assert "late" in engine.nodes
    assert report.transactions[-1]["outcome"] == "success"
    assert report.transactions[-1]["route"][-1] == "late"


# -- determinism --------------------------------------------------------------------


def _mixed_cfg(seed):
    cfg = chain_scenario(6, per_hop_delay_s=0.25, drop_at=3, seed=seed,
                         horizon_s=20, margin_s=10.0, auto_pay_penalty=True)
    cfg.actions.append({"at_s": 6.0, "type": "set_velocity", "node": "uav5",
                        "vx": -1.0, "vy": 0.5, "vz": 0.0})
    cfg.actions.append({"at_s": 8.0, "type": "inject_behavior", "node": "uav3",
                        "behavior": "honest"})
    cfg.actions.append({"at_s": 9.0, "type": "start_transaction",
                        "source": "uav1", "dest": "uav4", "plaintext": "second"})
    return cfg


def test_identical_seeds_replay_identical_traces():
    e1, _ = run_scenario(_mixed_cfg(5))
    e2, _ = run_scenario(_mixed_cfg(5))
    assert e1.trace_text() == e2.trace_text()
    e3, _ = run_scenario(_mixed_cfg(6))
    assert e1.trace_text() != e3.trace_text()


def test_jittered_runs_are_deterministic_and_never_time_out_honestly():
    cfg = chain_scenario(5, per_hop_delay_s=0.5, seed=11, jitter_s=0.05)
    e1, r1 = run_scenario(cfg)
    e2, r2 = run_scenario(chain_scenario(5, per_hop_delay_s=0.5, seed=11, jitter_s=0.05))
    assert e1.trace_text() == e2.trace_text()
    assert r1.transactions[0]["outcome"] == "success"
