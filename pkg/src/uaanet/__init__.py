"""Deterministic UAV ad-hoc network simulator.

Data transmission is governed by an embedded contract state machine:
registration deposits, per-transaction guarantee tokens, BFS min-hop
routing over live coordinates, a per-hop encrypted forwarding ledger,
drop/tamper culprit attribution, and exponential penalty economics. A
5 ms tick engine drives it all deterministically, and a gateway exposes
scenario files, a CLI, and a live snapshot/command stream.
"""

from .contract import DataContract, FailureReason, HopRecord
from .crypto import DecryptFailure, KeyPair, MarkerEnvelope, SealedEnvelope
from .engine import (
    Behavior,
    Engine,
    MetricsReport,
    MotionState,
    SimClock,
    TICK_SECONDS,
    expected_detection_time,
    run_scenario,
)
from .ledger import ETHER, InsufficientFunds, Ledger, UnknownAccount
from .registry import NodeRecord, Registry
from .routing import NoRouteFound, build_adjacency, path_find, update_graph
from .scenario import (
    NodeSpec,
    ScenarioConfig,
    bundled_scenario,
    chain_scenario,
    load_scenario,
    load_scenario_file,
)
from .sweeps import sweep_detection_law, sweep_table2, sweep_tamper_attribution

__version__ = "0.1.0"

__all__ = [
    "Behavior",
    "DataContract",
    "DecryptFailure",
    "ETHER",
    "Engine",
    "FailureReason",
    "HopRecord",
    "InsufficientFunds",
    "KeyPair",
    "Ledger",
    "MarkerEnvelope",
    "MetricsReport",
    "MotionState",
    "NoRouteFound",
    "NodeRecord",
    "NodeSpec",
    "Registry",
    "ScenarioConfig",
    "SealedEnvelope",
    "SimClock",
    "TICK_SECONDS",
    "UnknownAccount",
    "build_adjacency",
    "bundled_scenario",
    "chain_scenario",
    "expected_detection_time",
    "load_scenario",
    "load_scenario_file",
    "path_find",
    "run_scenario",
    "sweep_detection_law",
    "sweep_table2",
    "sweep_tamper_attribution",
    "update_graph",
]
