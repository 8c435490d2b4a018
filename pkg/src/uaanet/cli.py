"""Command line entry points: headless runs, the live gateway, the
published-table sweep, and scenario validation."""

from __future__ import annotations

import argparse
import json
import os
import sys

from .engine import Engine, run_scenario
from .scenario import ScenarioError, load_scenario_file
from .sweeps import sweep_table2


def _load(path: str, seed: int | None):
    cfg = load_scenario_file(path)
    if seed is not None:
        from dataclasses import replace

        cfg = replace(cfg, seed=seed)
    return cfg


def cmd_run(args) -> int:
    cfg = _load(args.scenario, args.seed)
    engine, report = run_scenario(cfg)
    if args.trace:
        engine.write_trace(args.trace)
    if args.metrics:
        report.write(args.metrics)
    outcomes = {}
    for tx in report.transactions:
        outcomes[tx["outcome"]] = outcomes.get(tx["outcome"], 0) + 1
    print(f"{cfg.name}: {engine.clock.tick} ticks "
          f"({engine.clock.now:.3f} s simulated), "
          f"{len(report.transactions)} transactions {outcomes or '{}'}, "
          f"supply conserved: {report.token_audit['conserved']}")
    for det in report.detections:
        print(f"  detection: n={det['n']} x={det['x']} reason={det['reason']} "
              f"culprit={det['culprit']} delay={det['delay_s']:.3f}s")
    return 0


def cmd_serve(args) -> int:
    from .service import serve

    cfg = _load(args.scenario, args.seed)
    engine = Engine(cfg)
    print(f"serving {cfg.name} on port {args.port} (speed {args.speed}x)")
    serve(engine, port=args.port, speed=args.speed)
    return 0


def cmd_sweep(args) -> int:
    if not args.table2:
        print("nothing to sweep; pass --table2", file=sys.stderr)
        return 2
    result = sweep_table2()
    print(f"{'n':>3} {'x':>3} {'delay_s':>8} {'culprit':>8}   (constant "
          f"{result['constant_mode']['per_hop_s']} s per hop)")
    for row in result["constant_mode"]["rows"]:
        print(f"{row['n']:>3} {row['x']:>3} {row['delay_s']:>8.3f} {row['culprit']:>8}")
    print(f"per-row-delay mode average per hop: "
          f"{result['per_row_mode']['avg_per_hop_s']:.3f} s")
    if args.metrics:
        with open(args.metrics, "w") as fh:
            json.dump(result, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return 0


def cmd_validate(args) -> int:
    cfg = load_scenario_file(args.scenario)
    print(f"{args.scenario}: OK ({len(cfg.nodes)} nodes, "
          f"{len(cfg.actions)} actions)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uaanet",
        description="Deterministic UAV ad-hoc network simulator with "
                    "contract-governed transmission",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="headless scenario run")
    p_run.add_argument("scenario")
    p_run.add_argument("--trace", help="write the event trace (ndjson)")
    p_run.add_argument("--metrics", help="write the metrics report (json)")
    p_run.add_argument("--seed", type=int, help="override the scenario seed")
    p_run.set_defaults(func=cmd_run)

    p_serve = sub.add_parser("serve", help="interactive gateway")
    p_serve.add_argument("scenario")
    p_serve.add_argument("--port", type=int,
                         default=int(os.environ.get("UAANET_PORT", "8000")))
    p_serve.add_argument("--speed", type=float, default=1.0)
    p_serve.add_argument("--seed", type=int)
    p_serve.set_defaults(func=cmd_serve)

    p_sweep = sub.add_parser("sweep", help="timing-law sweeps")
    p_sweep.add_argument("--table2", action="store_true",
                         help="reproduce the published drop-detection table")
    p_sweep.add_argument("--metrics", help="write the sweep result (json)")
    p_sweep.set_defaults(func=cmd_sweep)

    p_val = sub.add_parser("validate", help="check a scenario file")
    p_val.add_argument("scenario")
    p_val.set_defaults(func=cmd_validate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
