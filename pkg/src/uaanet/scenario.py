"""Scenario configuration: the YAML document format, validation, and
programmatic builders for common layouts.

Token amounts appear in scenario files as decimal ether (``*_eth`` keys)
and are converted exactly to integer milli-ether; a value that does not
land on a milli-ether boundary is rejected.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import yaml

from .crypto import SCHEMES, SealedEnvelope
from .engine import HONEST, Behavior, parse_behavior


class ScenarioError(Exception):
    pass


class ParseError(ScenarioError):
    pass


class ValidationError(ScenarioError):
    def __init__(self, field_name: str, message: str):
        self.field = field_name
        super().__init__(f"{field_name}: {message}")


ACTION_KINDS = {
    "start_transaction": {"source", "dest", "plaintext"},
    "set_velocity": {"node", "vx", "vy", "vz"},
    "inject_behavior": {"node", "behavior"},
    "pay_penalty": {"node"},
    "abort": {"gcs"},
    "register_node": {"name", "gcs", "position", "velocity", "behavior", "key_seed"},
}

_TOP_AMOUNTS = {
    "appreciation_eth": "appreciation_meth",
    "registration_fee_eth": "registration_fee_meth",
    "guarantee_eth": "guarantee_meth",
    "genesis_balance_eth": "genesis_balance_meth",
}

_TOP_KEYS = {
    "name", "seed", "range_m", "per_hop_delay_s", "jitter_s", "horizon_s",
    "auto_pay_penalty", "crypto_scheme", "nodes", "actions", *_TOP_AMOUNTS,
}


@dataclass
class NodeSpec:
    name: str
    is_gcs: bool = False
    position: tuple[float, float, float] = (0.0, 0.0, 0.0)
    velocity: tuple[float, float, float] = (0.0, 0.0, 0.0)
    behavior: Behavior = HONEST
    key_seed: int | None = None

    def __post_init__(self):
        self.position = tuple(float(v) for v in self.position)
        self.velocity = tuple(float(v) for v in self.velocity)
        self.behavior = parse_behavior(self.behavior)


@dataclass
class ScenarioConfig:
    name: str = "scenario"
    seed: int = 0
    range_m: float = 100.0
    per_hop_delay_s: float = 2.9
    jitter_s: float = 0.0
    appreciation_meth: int = 100
    registration_fee_meth: int = 5000
    guarantee_meth: int = 1000
    genesis_balance_meth: int = 100000
    horizon_s: float = 30.0
    auto_pay_penalty: bool = False
    crypto_scheme: str = SealedEnvelope.name
    nodes: list[NodeSpec] = field(default_factory=list)
    actions: list[dict] = field(default_factory=list)

    def validate(self) -> None:
        if not self.nodes:
            raise ValidationError("nodes", "at least one node is required")
        seen = set()
        for i, node in enumerate(self.nodes):
            if node.name in seen:
                raise ValidationError(f"nodes[{i}].name", f"duplicate node name {node.name!r}")
            seen.add(node.name)
        if self.horizon_s <= 0:
            raise ValidationError("horizon_s", "must be positive")
        if self.per_hop_delay_s <= 0:
            raise ValidationError("per_hop_delay_s", "must be positive")
        if self.jitter_s < 0:
            raise ValidationError("jitter_s", "must be non-negative")
        if self.range_m <= 0:
            raise ValidationError("range_m", "must be positive")
        for key in ("appreciation_meth", "registration_fee_meth",
                    "guarantee_meth", "genesis_balance_meth"):
            if getattr(self, key) < 0:
                raise ValidationError(key, "must be non-negative")
        if self.genesis_balance_meth < self.registration_fee_meth:
            raise ValidationError(
                "genesis_balance_eth",
                "nodes cannot afford the registration fee",
            )
        if self.crypto_scheme not in SCHEMES:
            raise ValidationError("crypto_scheme", f"unknown scheme {self.crypto_scheme!r}")
        for i, action in enumerate(self.actions):
            kind = action.get("type")
            if kind not in ACTION_KINDS:
                raise ValidationError(f"actions[{i}]", f"unknown action {kind!r}")
            if action.get("at_s", -1) < 0:
                raise ValidationError(f"actions[{i}].at_s", "must be non-negative")


def _ether_to_meth(field_name: str, value) -> int:
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ValidationError(field_name, f"expected a number, got {value!r}")
    meth = value * 1000
    if abs(meth - round(meth)) > 1e-6:
        raise ValidationError(field_name, "finer than 0.001 ether")
    if meth < 0:
        raise ValidationError(field_name, "must be non-negative")
    return int(round(meth))


def _triple(field_name: str, value, default=(0.0, 0.0, 0.0)) -> tuple[float, float, float]:
    if value is None:
        return default
    if not isinstance(value, (list, tuple)) or len(value) != 3:
        raise ValidationError(field_name, "expected [x, y, z]")
    try:
        return tuple(float(v) for v in value)
    except (TypeError, ValueError):
        raise ValidationError(field_name, "expected three numbers") from None


def _parse_node(i: int, raw) -> NodeSpec:
    if not isinstance(raw, dict):
        raise ValidationError(f"nodes[{i}]", "expected a mapping")
    if "name" not in raw:
        raise ValidationError(f"nodes[{i}].name", "required")
    unknown = set(raw) - {"name", "gcs", "position", "velocity", "behavior", "key_seed"}
    if unknown:
        raise ValidationError(f"nodes[{i}]", f"unknown keys {sorted(unknown)}")
    try:
        behavior = parse_behavior(raw.get("behavior", "honest"))
    except ValueError as exc:
        raise ValidationError(f"nodes[{i}].behavior", str(exc)) from None
    return NodeSpec(
        name=str(raw["name"]),
        is_gcs=bool(raw.get("gcs", False)),
        position=_triple(f"nodes[{i}].position", raw.get("position")),
        velocity=_triple(f"nodes[{i}].velocity", raw.get("velocity")),
        behavior=behavior,
        key_seed=raw.get("key_seed"),
    )


def _parse_action(i: int, raw) -> dict:
    if not isinstance(raw, dict):
        raise ValidationError(f"actions[{i}]", "expected a mapping")
    if "at_s" not in raw:
        raise ValidationError(f"actions[{i}].at_s", "required")
    kinds = [k for k in raw if k != "at_s"]
    if len(kinds) != 1:
        raise ValidationError(f"actions[{i}]", "exactly one action key is required")
    kind = kinds[0]
    if kind not in ACTION_KINDS:
        raise ValidationError(f"actions[{i}]", f"unknown action {kind!r}")
    params = raw[kind] or {}
    if not isinstance(params, dict):
        raise ValidationError(f"actions[{i}].{kind}", "expected a mapping of parameters")
    unknown = set(params) - ACTION_KINDS[kind]
    if unknown:
        raise ValidationError(f"actions[{i}].{kind}", f"unknown keys {sorted(unknown)}")
    return {"at_s": float(raw["at_s"]), "type": kind, **params}


def load_scenario(text: str, source: str = "<string>") -> ScenarioConfig:
    """Parse and validate a scenario document."""
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"{source}:{mark.line + 1}" if mark else source
        raise ParseError(f"{where}: {exc}") from None
    if not isinstance(raw, dict):
        raise ParseError(f"{source}: scenario must be a mapping")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ValidationError(str(sorted(unknown)[0]), "unknown top-level key")

    kwargs = {}
    for key in ("name", "crypto_scheme"):
        if key in raw:
            kwargs[key] = str(raw[key])
    for key in ("seed",):
        if key in raw:
            kwargs[key] = int(raw[key])
    for key in ("range_m", "per_hop_delay_s", "jitter_s", "horizon_s"):
        if key in raw:
            try:
                kwargs[key] = float(raw[key])
            except (TypeError, ValueError):
                raise ValidationError(key, f"expected a number, got {raw[key]!r}") from None
    if "auto_pay_penalty" in raw:
        kwargs["auto_pay_penalty"] = bool(raw["auto_pay_penalty"])
    for eth_key, meth_key in _TOP_AMOUNTS.items():
        if eth_key in raw:
            kwargs[meth_key] = _ether_to_meth(eth_key, raw[eth_key])

    nodes_raw = raw.get("nodes", [])
    if not isinstance(nodes_raw, list):
        raise ValidationError("nodes", "expected a list")
    kwargs["nodes"] = [_parse_node(i, n) for i, n in enumerate(nodes_raw)]
    actions_raw = raw.get("actions", [])
    if not isinstance(actions_raw, list):
        raise ValidationError("actions", "expected a list")
    kwargs["actions"] = [_parse_action(i, a) for i, a in enumerate(actions_raw)]

    cfg = ScenarioConfig(**kwargs)
    cfg.validate()
    return cfg


def load_scenario_file(path) -> ScenarioConfig:
    with open(path) as fh:
        return load_scenario(fh.read(), source=str(path))


def bundled_scenario(name: str) -> ScenarioConfig:
    """Load one of the scenario files shipped with the package."""
    from importlib import resources

    text = resources.files("uaanet.scenarios").joinpath(f"{name}.yaml").read_text()
    return load_scenario(text, source=f"bundled:{name}")


# -- programmatic builders ---------------------------------------------------


def chain_scenario(
    n: int,
    per_hop_delay_s: float = 2.9,
    drop_at: int | None = None,
    tamper_at: int | None = None,
    seed: int = 0,
    start_s: float = 0.5,
    spacing_m: float = 50.0,
    plaintext: str = "field telemetry",
    margin_s: float = 2.0,
    **overrides,
) -> ScenarioConfig:
    """A straight line of n nodes with only adjacent pairs in range, so
    BFS yields the chain itself; the transaction runs end to end.

    drop_at / tamper_at select the route position (= chain index) of the
    misbehaving node.
    """
    if n < 2:
        raise ValueError("need at least two nodes")
    nodes = []
    for i in range(n):
        behavior = HONEST
        if drop_at is not None and i == drop_at:
            behavior = Behavior(kind="drop", hop=i)
        if tamper_at is not None and i == tamper_at:
            behavior = Behavior(kind="tamper", hop=i)
        nodes.append(NodeSpec(name=f"uav{i}", position=(i * spacing_m, 0.0, 0.0),
                              behavior=behavior))
    horizon = start_s + (n - 1) * per_hop_delay_s + margin_s
    cfg = ScenarioConfig(
        name=f"chain-{n}",
        seed=seed,
        range_m=spacing_m * 1.2,
        per_hop_delay_s=per_hop_delay_s,
        horizon_s=horizon,
        nodes=nodes,
        actions=[{
            "at_s": start_s, "type": "start_transaction",
            "source": "uav0", "dest": f"uav{n - 1}", "plaintext": plaintext,
        }],
    )
    if overrides:
        cfg = replace(cfg, **overrides)
    cfg.validate()
    return cfg
