"""Deterministic discrete-time simulation driver.

One logical thread advances a 5 ms tick clock, integrates constant-
velocity motion, drives the data-sending contract hop by hop with a
configurable per-hop delay, evaluates the destination's timeout, and
logs a structured event trace. External commands enter through an
ordered queue and are applied only at tick boundaries, so identical
(scenario, seed) pairs replay to bit-identical traces.

The timing model reproduces the detection-time law: a route of n nodes
expects arrival at t0 + (n-1)*per_hop; a node that received its data
after x completed hops and never forwards is detected (n-1-x)*per_hop
seconds after the drop.
"""

from __future__ import annotations

import json
import random
import threading
from collections import deque
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

from . import crypto, routing
from .contract import ContractError, DataContract, FailureReason
from .ledger import Ledger, LedgerError
from .registry import Registry, RegistryError, UnknownNode

if TYPE_CHECKING:
    from .scenario import ScenarioConfig

TICK_SECONDS = 0.005

# node colors for the live view
COLOR_GCS = "blue"
COLOR_UAV = "black"
COLOR_FAULTY = "red"
COLOR_SUCCESS = "green"


class EngineError(Exception):
    pass


@dataclass(frozen=True)
class Behavior:
    """A node's scripted disposition while forwarding.

    kind "honest" forwards verbatim; "drop" swallows the packet when the
    node sits at route position `hop`; "tamper" forwards a mutated
    ciphertext (byte_index XOR xor_mask) from that position.
    """

    kind: str = "honest"
    hop: int = 0
    byte_index: int = 0
    xor_mask: int = 0xFF

    def __post_init__(self):
        if self.kind not in ("honest", "drop", "tamper"):
            raise ValueError(f"unknown behavior kind {self.kind!r}")
        if self.kind != "honest" and self.hop < 1:
            raise ValueError("behavior hop must be >= 1")
        if self.kind == "tamper" and not 1 <= self.xor_mask <= 255:
            raise ValueError("xor_mask must be in 1..255")

    def describe(self) -> str:
        if self.kind == "honest":
            return "honest"
        if self.kind == "drop":
            return f"drop@{self.hop}"
        return f"tamper@{self.hop}"


HONEST = Behavior()


def drop_at(hop: int) -> Behavior:
    return Behavior(kind="drop", hop=hop)


def tamper_at(hop: int, byte_index: int = 0, xor_mask: int = 0xFF) -> Behavior:
    return Behavior(kind="tamper", hop=hop, byte_index=byte_index, xor_mask=xor_mask)


def parse_behavior(spec) -> Behavior:
    """Accept 'honest', 'drop@K', 'tamper@K', or a mapping."""
    if isinstance(spec, Behavior):
        return spec
    if isinstance(spec, str):
        text = spec.strip().lower()
        if text == "honest":
            return HONEST
        for kind in ("drop", "tamper"):
            if text.startswith(kind + "@"):
                return Behavior(kind=kind, hop=int(text[len(kind) + 1:]))
        raise ValueError(f"cannot parse behavior {spec!r}")
    if isinstance(spec, dict):
        kind = spec.get("kind", "honest")
        if kind == "honest":
            return HONEST
        return Behavior(
            kind=kind,
            hop=int(spec.get("hop", 1)),
            byte_index=int(spec.get("byte", 0)),
            xor_mask=int(spec.get("mask", 0xFF)),
        )
    raise ValueError(f"cannot parse behavior {spec!r}")


def mutate(data: bytes, behavior: Behavior) -> bytes:
    """Apply a tamper behavior's byte flip."""
    if not data:
        return data
    idx = behavior.byte_index % len(data)
    out = bytearray(data)
    out[idx] ^= behavior.xor_mask
    return bytes(out)


def expected_detection_time(n: int, x: int, per_hop: float) -> float:
    """Seconds from a drop after x completed hops to its detection on an
    n-node route: (n - 1 - x) * per_hop."""
    if n < 2:
        raise ValueError("route needs at least two nodes")
    if not 0 <= x <= n - 2:
        raise ValueError(f"x must be in [0, {n - 2}]")
    if per_hop <= 0:
        raise ValueError("per-hop delay must be positive")
    return (n - 1 - x) * per_hop


@dataclass
class SimClock:
    tick: int = 0

    @property
    def now(self) -> float:
        return self.tick * TICK_SECONDS


@dataclass
class MotionState:
    """Constant-velocity motion, integrated from an anchor so that
    position(t) = anchor + v * (t - anchor_t) holds to machine precision
    with no per-tick accumulation error."""

    x: float = 0.0
    y: float = 0.0
    z: float = 0.0
    vx: float = 0.0
    vy: float = 0.0
    vz: float = 0.0
    anchor_tick: int = 0

    def position(self, tick: int) -> tuple[float, float, float]:
        dt = (tick - self.anchor_tick) * TICK_SECONDS
        return (self.x + self.vx * dt, self.y + self.vy * dt, self.z + self.vz * dt)

    def set_velocity(self, tick: int, vx: float, vy: float, vz: float) -> None:
        self.x, self.y, self.z = self.position(tick)
        self.anchor_tick = tick
        self.vx, self.vy, self.vz = vx, vy, vz


@dataclass
class NodeInfo:
    name: str
    address: str
    keypair: crypto.KeyPair
    motion: MotionState
    behavior: Behavior
    channel_id: int


class Engine:
    def __init__(self, cfg: "ScenarioConfig"):
        cfg.validate()
        self.cfg = cfg
        self.clock = SimClock()
        self.rng = random.Random(cfg.seed)
        self.ledger = Ledger(seed=cfg.seed)
        self.registry = Registry(self.ledger, fee=cfg.registration_fee_meth)
        self.contract = DataContract(
            self.ledger, self.registry, guarantee=cfg.guarantee_meth
        )
        self.scheme = crypto.SCHEMES[cfg.crypto_scheme]
        self.hop_ticks = max(1, round(cfg.per_hop_delay_s / TICK_SECONDS))
        self.jitter_ticks = max(0, round(cfg.jitter_s / TICK_SECONDS))
        self.horizon_ticks = max(1, round(cfg.horizon_s / TICK_SECONDS))
        self.range_m = cfg.range_m
        self.appreciation = cfg.appreciation_meth
        self.auto_pay = cfg.auto_pay_penalty

        self.nodes: dict[str, NodeInfo] = {}
        self._names: dict[str, str] = {}  # address -> name
        self.events: list[dict] = []
        self._snapshot_cursor = 0
        self._commands: deque[dict] = deque()
        self._cmd_lock = threading.Lock()

        # transaction pipeline state
        self._tx_seq = 0
        self._forward_due: int | None = None
        self._deadline: int | None = None
        self._audit: dict | None = None
        self._last_drop: tuple[str, str] | None = None  # names across the dead hop
        self._last_success_dest: str | None = None
        self._faulty_pending: set[str] = set()
        self.transactions: list[dict] = []

        for spec in cfg.nodes:
            self._add_node(spec)
        self._actions = sorted(
            (
                (max(1, round(a["at_s"] / TICK_SECONDS)), i, {k: v for k, v in a.items() if k != "at_s"})
                for i, a in enumerate(cfg.actions)
            ),
            key=lambda t: (t[0], t[1]),
        )
        self._action_idx = 0

    # -- construction ------------------------------------------------------

    def _key_seed(self, spec) -> bytes:
        import hashlib

        if spec.key_seed is not None:
            return hashlib.sha256(f"key:{spec.key_seed}".encode()).digest()
        return hashlib.sha256(f"key:{self.cfg.seed}:{spec.name}".encode()).digest()

    def _add_node(self, spec) -> NodeInfo:
        if spec.name in self.nodes:
            raise EngineError(f"duplicate node name {spec.name!r}")
        address = self.ledger.create_account(self.cfg.genesis_balance_meth)
        keypair = self.scheme.keygen(self._key_seed(spec))
        self.registry.register(
            address, keypair.public, spec.is_gcs,
            deposit=self.registry.fee, now=self.clock.now,
            x=spec.position[0], y=spec.position[1], z=spec.position[2],
        )
        motion = MotionState(
            x=spec.position[0], y=spec.position[1], z=spec.position[2],
            vx=spec.velocity[0], vy=spec.velocity[1], vz=spec.velocity[2],
            anchor_tick=self.clock.tick,
        )
        info = NodeInfo(
            name=spec.name, address=address, keypair=keypair, motion=motion,
            behavior=spec.behavior, channel_id=8000 + len(self.nodes),
        )
        self.nodes[spec.name] = info
        self._names[address] = spec.name
        self._emit(
            "node_registered",
            node=spec.name, address=address, is_gcs=spec.is_gcs,
            fee_meth=self.registry.fee,
        )
        return info

    # -- events ------------------------------------------------------------

    @property
    def now(self) -> float:
        return self.clock.now

    def _emit(self, event: str, **payload) -> None:
        record = {"tick": self.clock.tick, "sim_time_s": self.now, "event": event}
        record.update(payload)
        self.events.append(record)

    def _name(self, address: str | None) -> str | None:
        if address is None:
            return None
        return self._names.get(address, address)

    def _info_by_address(self, address: str) -> NodeInfo:
        return self.nodes[self._names[address]]

    def _resolve(self, name: str) -> NodeInfo:
        try:
            return self.nodes[name]
        except KeyError:
            raise UnknownNode(name) from None

    # -- public control surface --------------------------------------------

    def submit(self, command: dict) -> None:
        """Queue a command; it is applied at the next tick boundary."""
        with self._cmd_lock:
            self._commands.append(dict(command))

    def validate_command(self, command: dict) -> str | None:
        """Cheap pre-queue validation; returns a rejection reason or None."""
        kind = command.get("type")
        handlers = {
            "set_velocity", "start_transaction", "inject_behavior",
            "pay_penalty", "abort", "register_node",
        }
        if kind not in handlers:
            return f"unknown command type {kind!r}"
        for key in ("node", "source", "dest", "gcs"):
            name = command.get(key)
            if name is not None and name not in self.nodes:
                return f"unknown node {name!r}"
        if kind == "inject_behavior":
            try:
                parse_behavior(command.get("behavior"))
            except (ValueError, TypeError) as exc:
                return str(exc)
        if kind == "register_node" and not command.get("name"):
            return "register_node requires a name"
        return None

    def set_velocity(self, node: str, vx: float, vy: float, vz: float) -> None:
        self._resolve(node)
        self.submit({"type": "set_velocity", "node": node, "vx": vx, "vy": vy, "vz": vz})

    def inject_behavior(self, node: str, behavior) -> None:
        self._resolve(node)
        self.submit({"type": "inject_behavior", "node": node, "behavior": behavior})

    def start_transaction(self, source: str, dest: str, plaintext: bytes | str) -> None:
        self._resolve(source)
        self._resolve(dest)
        self.submit(
            {"type": "start_transaction", "source": source, "dest": dest,
             "plaintext": plaintext}
        )

    # -- tick loop ----------------------------------------------------------

    def step(self) -> dict:
        """Advance one tick and return the resulting snapshot."""
        self._advance()
        return self.snapshot()

    def run(self) -> None:
        """Headless run to the configured horizon (no snapshots built)."""
        while self.clock.tick < self.horizon_ticks:
            self._advance()

    def _advance(self) -> None:
        self.clock.tick += 1
        tick = self.clock.tick
        if self.auto_pay and self._faulty_pending:
            self._auto_pay_penalties()
        while True:
            with self._cmd_lock:
                if not self._commands:
                    break
                cmd = self._commands.popleft()
            self._apply(cmd)
        while (
            self._action_idx < len(self._actions)
            and self._actions[self._action_idx][0] <= tick
        ):
            self._apply(self._actions[self._action_idx][2])
            self._action_idx += 1
        if self._forward_due is not None and tick >= self._forward_due:
            self._fire_forward()
        self._check_timeout()

    # -- command dispatch ----------------------------------------------------

    def _apply(self, cmd: dict) -> None:
        kind = cmd.get("type")
        handler = {
            "set_velocity": self._do_set_velocity,
            "start_transaction": self._do_start_transaction,
            "inject_behavior": self._do_inject_behavior,
            "pay_penalty": self._do_pay_penalty,
            "abort": self._do_abort,
            "register_node": self._do_register_node,
        }.get(kind)
        if handler is None:
            self._emit("command_rejected", command=kind, reason=f"unknown command type {kind!r}")
            return
        try:
            handler(cmd)
        except (ContractError, RegistryError, LedgerError, ValueError) as exc:
            self._emit(
                "command_rejected", command=kind,
                reason=str(exc), error=type(exc).__name__,
            )

    def _do_set_velocity(self, cmd: dict) -> None:
        info = self._resolve(cmd["node"])
        vx, vy, vz = float(cmd["vx"]), float(cmd["vy"]), float(cmd["vz"])
        info.motion.set_velocity(self.clock.tick, vx, vy, vz)
        self._emit("velocity_set", node=info.name, vx=vx, vy=vy, vz=vz)

    def _do_inject_behavior(self, cmd: dict) -> None:
        info = self._resolve(cmd["node"])
        behavior = parse_behavior(cmd["behavior"])
        info.behavior = behavior
        self._emit("behavior_injected", node=info.name, behavior=behavior.describe())

    def _do_pay_penalty(self, cmd: dict) -> None:
        from .registry import WindowLapsed

        info = self._resolve(cmd["node"])
        rec = self.registry.records.get(info.address)
        if rec is None:
            raise UnknownNode(info.name)
        amount = rec.penalty_token
        try:
            self.registry.pay_penalty(info.address, amount, self.now)
        except WindowLapsed:
            self._note_escalation(info.address, emitted_by="pay_penalty")
            raise
        self._faulty_pending.discard(info.address)
        self._emit("penalty_paid", node=info.name, amount_meth=amount)

    def _do_register_node(self, cmd: dict) -> None:
        from .scenario import NodeSpec

        name = cmd["name"]
        if name in self.nodes:
            # re-registration attempt with the node's existing identity
            info = self.nodes[name]
            self.registry.register(
                info.address, info.keypair.public,
                bool(cmd.get("gcs", False)), deposit=self.registry.fee,
                now=self.now,
            )
            self._emit("node_registered", node=name, address=info.address,
                       is_gcs=bool(cmd.get("gcs", False)), fee_meth=self.registry.fee)
            return
        spec = NodeSpec(
            name=name,
            is_gcs=bool(cmd.get("gcs", False)),
            position=tuple(cmd.get("position", (0.0, 0.0, 0.0))),
            velocity=tuple(cmd.get("velocity", (0.0, 0.0, 0.0))),
            behavior=parse_behavior(cmd.get("behavior", "honest")),
            key_seed=cmd.get("key_seed"),
        )
        self._add_node(spec)

    def _do_abort(self, cmd: dict) -> None:
        info = self._resolve(cmd["gcs"])
        report = self.contract.abort(info.address)
        if report.voided_transaction:
            self._forward_due = None
            self._deadline = None
            self._close_audit("aborted")
        self._emit(
            "abort",
            caller=info.name,
            voided_transaction=report.voided_transaction,
            refunded={self._name(a): v for a, v in report.refunded.items()},
            removed=[self._name(a) for a in report.removed],
        )

    def _do_start_transaction(self, cmd: dict) -> None:
        source = self._resolve(cmd["source"])
        dest = self._resolve(cmd["dest"])
        plaintext = cmd.get("plaintext", "")
        if isinstance(plaintext, str):
            plaintext = plaintext.encode()
        reference = self.scheme.encrypt(dest.keypair.public, plaintext, rng=self.rng)
        self.contract.do_trans(source.address, dest.address, reference, self.now)
        self._tx_seq += 1
        tx_id = self._tx_seq
        self._last_success_dest = None
        self._last_drop = None
        self._emit("transaction_opened", tx_id=tx_id, source=source.name, dest=dest.name)
        self._audit = {
            "tx_id": tx_id,
            "source": source.name,
            "dest": dest.name,
            "opened_tick": self.clock.tick,
            "balances_before": self.ledger.accounts(),
            "deposits": {},
            "forward_ticks": [],
            "route": None,
            "n": 0,
            "t0_tick": None,
            "drop": None,
            "tamper": None,
        }
        self._register_participants()
        try:
            path = self.contract.build_route(self.range_m)
        except routing.NoRouteFound:
            self._emit("no_route", tx_id=tx_id, source=source.name,
                       dest=dest.name, message="No route found")
            refunded = self.contract.void()
            self._emit("transaction_voided", tx_id=tx_id,
                       refunded={self._name(a): v for a, v in refunded.items()})
            self._close_audit("no_route")
            return
        names = [self._name(a) for a in path]
        self._audit["route"] = names
        self._audit["n"] = len(names)
        self._audit["t0_tick"] = self.clock.tick
        self._emit("route_built", tx_id=tx_id, route=names, n=len(names))
        self._forward_due = self.clock.tick + self._hop_delay()
        allowance = 3 if self.jitter_ticks else 0
        self._deadline = self.clock.tick + (len(names) - 1) * self.hop_ticks + allowance

    def _register_participants(self) -> None:
        tx = self.contract.tx
        for name, info in self.nodes.items():
            rec = self.registry.records.get(info.address)
            if rec is None:
                continue
            exempt = (
                rec.is_gcs
                or info.address == tx.source
                or info.address == tx.destination
            )
            deposit = 0 if exempt else self.contract.guarantee
            x, y, z = info.motion.position(self.clock.tick)
            try:
                self.contract.register_coordinates(info.address, x, y, z, deposit)
            except (ContractError, RegistryError, LedgerError) as exc:
                self._emit("participation_rejected", node=name,
                           reason=str(exc), error=type(exc).__name__)
                continue
            if deposit:
                self._audit["deposits"][name] = deposit
            self._emit("coordinates_registered", node=name, deposit_meth=deposit,
                       x=x, y=y, z=z)

    # -- pipeline -------------------------------------------------------------

    def _hop_delay(self) -> int:
        if self.jitter_ticks:
            return max(1, self.hop_ticks + self.rng.randint(-self.jitter_ticks, self.jitter_ticks))
        return self.hop_ticks

    def _fire_forward(self) -> None:
        self._forward_due = None
        tx = self.contract.tx
        if tx is None or not tx.active or not tx.route:
            return
        pos = tx.count
        sender = self._info_by_address(tx.route[pos].node)
        payload = tx.route[pos].data if pos > 0 else tx.reference_ciphertext
        behavior = sender.behavior
        tampered = behavior.kind == "tamper" and behavior.hop == pos
        if tampered:
            payload = mutate(payload, behavior)
        receiver_idx = self.contract.send(sender.address, payload, self.now)
        self._audit["forward_ticks"].append(self.clock.tick)
        receiver = self._info_by_address(tx.route[receiver_idx].node)
        self._emit(
            "hop_forwarded",
            tx_id=self._audit["tx_id"], from_pos=pos, to_pos=receiver_idx,
            sender=sender.name, receiver=receiver.name, tampered=tampered,
        )
        if tampered:
            self._audit["tamper"] = {
                "node": sender.name, "position": pos, "tick": self.clock.tick,
            }
        if receiver_idx == len(tx.route) - 1:
            self._destination_receive()
            return
        rb = receiver.behavior
        if rb.kind == "drop" and rb.hop == receiver_idx:
            # the drop is accounted at receipt time: receiver_idx hops completed
            self._audit["drop"] = {
                "node": receiver.name, "position": receiver_idx, "tick": self.clock.tick,
            }
            self._last_drop = (receiver.name,
                               self._name(tx.route[receiver_idx + 1].node))
            self._emit("packet_dropped", tx_id=self._audit["tx_id"],
                       node=receiver.name, position=receiver_idx)
            return
        self._forward_due = self.clock.tick + self._hop_delay()

    def _destination_receive(self) -> None:
        tx = self.contract.tx
        dest = self._info_by_address(tx.destination)
        cell = tx.route[-1]
        try:
            plaintext = self.scheme.decrypt(dest.keypair.private, cell.data)
            reference = self.scheme.decrypt(
                dest.keypair.private, tx.reference_ciphertext
            )
            ok = plaintext == reference
        except crypto.DecryptFailure:
            ok = False
        if ok:
            self._settle_success()
        else:
            self._settle_unsuccessful(FailureReason.BAD_DECRYPT)

    def _settle_success(self) -> None:
        tx = self.contract.tx
        tx_id = self._audit["tx_id"]
        refunded = self.contract.success(tx.destination)
        self._emit("transaction_success", tx_id=tx_id,
                   refunded={self._name(a): v for a, v in refunded.items()})
        paid = self.contract.trans_completed(tx.source, self.appreciation)
        self._emit("transaction_completed", tx_id=tx_id,
                   appreciation_meth=self.appreciation,
                   paid=[self._name(a) for a in paid])
        self._last_success_dest = self._name(tx.destination)
        self._deadline = None
        self._close_audit("success")

    def _settle_unsuccessful(self, reason: FailureReason) -> None:
        tx = self.contract.tx
        tx_id = self._audit["tx_id"]
        try:
            culprit = self.contract.unsuccessful(tx.destination, reason, self.now)
        except ContractError as exc:
            self._emit("settlement_failed", tx_id=tx_id, reason=str(exc),
                       error=type(exc).__name__)
            self._deadline = None
            return
        self._emit(
            "transaction_unsuccessful", tx_id=tx_id, reason=reason.value,
            culprit=self._name(culprit), culprit_address=culprit,
        )
        if culprit is not None:
            self._note_escalation(culprit, emitted_by="detection")
            self._faulty_pending.add(culprit)
        self._deadline = None
        self._forward_due = None
        self._close_audit("unsuccessful", reason=reason.value,
                          culprit=self._name(culprit))

    def _note_escalation(self, address: str, emitted_by: str) -> None:
        rec = self.registry.records.get(address)
        if rec is None:
            return
        self._emit(
            "penalty_escalated",
            node=self._name(address), count=self.registry.blacklist.get(address, 0),
            penalty_meth=rec.penalty_token, fault_window_s=rec.fault_time,
            via=emitted_by,
        )

    def _check_timeout(self) -> None:
        if self._deadline is None or self.clock.tick < self._deadline:
            return
        tx = self.contract.tx
        if tx is None or not tx.active or tx.successful or not tx.route:
            self._deadline = None
            return
        if tx.route[-1].data is not None:
            return  # arrival is being handled this tick
        if self._forward_due is not None:
            return  # jittered pipeline still moving; destination keeps waiting
        self._settle_unsuccessful(FailureReason.TIMEOUT)

    def _auto_pay_penalties(self) -> None:
        for address in sorted(self._faulty_pending):
            rec = self.registry.records.get(address)
            if rec is None or not rec.faulty:
                self._faulty_pending.discard(address)
                continue
            if self.ledger.balance(address) < rec.penalty_token:
                continue  # cannot afford it yet; keep waiting
            amount = rec.penalty_token
            try:
                self.registry.pay_penalty(address, amount, self.now)
            except RegistryError as exc:
                self._emit("penalty_rejected", node=self._name(address),
                           reason=str(exc), error=type(exc).__name__)
                if rec.faulty:
                    self._note_escalation(address, emitted_by="auto_pay")
                continue
            self._faulty_pending.discard(address)
            self._emit("penalty_paid", node=self._name(address), amount_meth=amount)

    def _close_audit(self, outcome: str, reason: str | None = None,
                     culprit: str | None = None) -> None:
        audit = self._audit
        if audit is None:
            return
        self._audit = None
        after = self.ledger.accounts()
        before = audit.pop("balances_before")
        delta = {
            self._name(addr): after.get(addr, 0) - before.get(addr, 0)
            for addr in after
            if addr in self._names
        }
        ticks = [audit["t0_tick"], *audit["forward_ticks"]] if audit["t0_tick"] is not None else []
        gaps = [b - a for a, b in zip(ticks, ticks[1:])]
        audit.update(
            outcome=outcome, reason=reason, culprit=culprit,
            closed_tick=self.clock.tick,
            delta_meth=delta,
            per_hop_mean_s=(sum(gaps) / len(gaps) * TICK_SECONDS) if gaps else None,
        )
        if audit["drop"] is not None:
            audit["drop"]["t_s"] = audit["drop"]["tick"] * TICK_SECONDS
        if audit["tamper"] is not None:
            audit["tamper"]["t_s"] = audit["tamper"]["tick"] * TICK_SECONDS
        audit["t0_s"] = (audit["t0_tick"] * TICK_SECONDS
                         if audit["t0_tick"] is not None else None)
        audit["closed_s"] = self.now
        self.transactions.append(audit)

    # -- observation -----------------------------------------------------------

    def _node_color(self, info: NodeInfo) -> str:
        rec = self.registry.records.get(info.address)
        if rec is not None and rec.faulty:
            return COLOR_FAULTY
        if info.name == self._last_success_dest:
            return COLOR_SUCCESS
        if rec is not None and rec.is_gcs:
            return COLOR_GCS
        return COLOR_UAV

    def snapshot(self) -> dict:
        tick = self.clock.tick
        nodes = []
        points = {}
        for info in self.nodes.values():
            x, y, z = info.motion.position(tick)
            rec = self.registry.records.get(info.address)
            registered = rec is not None
            if registered:
                points[info.name] = (x, y, z)
            nodes.append({
                "name": info.name,
                "address": info.address,
                "channel_id": info.channel_id,
                "x": x, "y": y, "z": z,
                "vx": info.motion.vx, "vy": info.motion.vy, "vz": info.motion.vz,
                "color": self._node_color(info),
                "is_gcs": bool(rec.is_gcs) if registered else False,
                "faulty": bool(rec.faulty) if registered else False,
                "participating": bool(rec.participating) if registered else False,
                "registered": registered,
            })
        edges = [
            {"a": a, "b": b, "kind": "range"}
            for a, nbrs in routing.build_adjacency(points, self.range_m).items()
            for b in nbrs
            if a < b
        ]
        tx = self.contract.tx
        transaction = None
        if tx is not None:
            names = [self._name(h.node) for h in tx.route]
            for i in range(1, tx.count + 1):
                edges.append({"a": names[i - 1], "b": names[i], "kind": "forwarding"})
            if self._last_drop is not None:
                edges.append({"a": self._last_drop[0], "b": self._last_drop[1],
                              "kind": "dropped"})
            transaction = {
                "source": self._name(tx.source),
                "destination": self._name(tx.destination),
                "route": names,
                "count": tx.count,
                "active": tx.active,
                "successful": tx.successful,
                "culprit": self._name(tx.culprit),
            }
        new_events = self.events[self._snapshot_cursor:]
        self._snapshot_cursor = len(self.events)
        return {
            "v": 1,
            "tick": tick,
            "sim_time_s": self.now,
            "nodes": nodes,
            "edges": edges,
            "node_table": self.registry.table_rows(),
            "transaction": transaction,
            "events": new_events,
        }

    def write_trace(self, path) -> None:
        with open(path, "w") as fh:
            for event in self.events:
                fh.write(json.dumps(event, sort_keys=True) + "\n")

    def trace_text(self) -> str:
        return "".join(json.dumps(e, sort_keys=True) + "\n" for e in self.events)

    def metrics_report(self) -> "MetricsReport":
        return MetricsReport.from_engine(self)


@dataclass
class MetricsReport:
    """Measured detection delays, per-hop timing, and the token-flow audit
    extracted from one run."""

    detections: list[dict] = field(default_factory=list)
    transactions: list[dict] = field(default_factory=list)
    culprits: list[str] = field(default_factory=list)
    avg_per_hop_s: float | None = None
    token_audit: dict = field(default_factory=dict)

    @classmethod
    def from_engine(cls, engine: Engine) -> "MetricsReport":
        detections = []
        culprits = []
        hop_means = []
        for tx in engine.transactions:
            if tx["per_hop_mean_s"] is not None:
                hop_means.append(tx["per_hop_mean_s"])
            if tx["outcome"] != "unsuccessful":
                continue
            if tx["culprit"] is not None:
                culprits.append(tx["culprit"])
            marker = tx["drop"] if tx["reason"] == "timeout" else tx["tamper"]
            if marker is None:
                continue
            delay = (tx["closed_tick"] - marker["tick"]) * TICK_SECONDS
            detections.append({
                "tx_id": tx["tx_id"],
                "n": tx["n"],
                "x": marker["position"],
                "reason": tx["reason"],
                "culprit": tx["culprit"],
                "t_event_s": marker["t_s"],
                "t_detect_s": tx["closed_s"],
                "delay_s": delay,
            })
        engine.ledger.audit()
        return cls(
            detections=detections,
            transactions=list(engine.transactions),
            culprits=culprits,
            avg_per_hop_s=(sum(hop_means) / len(hop_means)) if hop_means else None,
            token_audit={
                "genesis_supply_meth": engine.ledger.genesis_supply(),
                "final_supply_meth": engine.ledger.total_supply(),
                "conserved": engine.ledger.total_supply() == engine.ledger.genesis_supply(),
                "escrow_meth": engine.ledger.balance(engine.ledger.escrow),
            },
        )

    def to_dict(self) -> dict:
        return {
            "detections": self.detections,
            "transactions": self.transactions,
            "culprits": self.culprits,
            "avg_per_hop_s": self.avg_per_hop_s,
            "token_audit": self.token_audit,
        }

    def write(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def run_scenario(cfg: "ScenarioConfig") -> tuple[Engine, MetricsReport]:
    """Headless run to the horizon; returns the engine (for its trace)
    and the extracted metrics."""
    engine = Engine(cfg)
    engine.run()
    return engine, engine.metrics_report()
