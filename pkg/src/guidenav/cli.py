"""Command line entry points: run episodes, replay logs, export metrics and
benchmark the planner."""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from .config import load_config
from .harness import EpisodeLog, compute_metrics, replay, run_episode
from .scenarios import BUILDERS, export_all


def _cmd_run(args) -> int:
    config = load_config(args.config)
    presses = None
    if args.script:
        presses = json.loads(Path(args.script).read_text())
    bridge = None
    if args.interactive:
        from .bridge import LiveBridge
        bridge = LiveBridge(port=args.port, scenario_name=args.scenario).start()
        print(f"serving live console on ws://127.0.0.1:{bridge.port}")
    try:
        log = run_episode(
            args.scenario, config, presses=presses, seed=args.seed,
            bridge=bridge, realtime=args.interactive,
            dump_frames=args.dump_frames, max_sim_time=args.max_sim_time)
    finally:
        if bridge is not None:
            bridge.stop()
    if args.log:
        log.save(args.log)
        print(f"log written to {args.log}")
    metrics = compute_metrics(log)
    print(json.dumps({"end": log.end, "metrics": metrics.to_dict()}, indent=2,
                     sort_keys=True))
    return 0 if log.end["reason"] in ("goal", "timeout") else 1


def _cmd_replay(args) -> int:
    log = EpisodeLog.load(args.log)
    bridge = None
    if args.serve:
        from .bridge import LiveBridge
        from .harness import PROTO_VERSION
        bridge = LiveBridge(port=args.port,
                            scenario_name=log.header["scenario"].get("name", "")).start()
        print(f"replaying on ws://127.0.0.1:{bridge.port}")
    count = 0
    try:
        for rec in replay(log, rate=args.rate):
            count += 1
            if bridge is not None:
                bridge.publish({"type": "tick", "proto": 1, **rec})
    finally:
        if bridge is not None:
            bridge.stop()
    print(f"replayed {count} ticks covering {log.end['t']:.2f} s "
          f"({log.end['reason']})")
    return 0


def _cmd_metrics(args) -> int:
    log = EpisodeLog.load(args.log)
    metrics = compute_metrics(log)
    if args.format == "json":
        print(json.dumps(metrics.to_dict(), indent=2, sort_keys=True))
    else:
        print(metrics.to_csv(), end="")
    return 0


def _cmd_bench_planner(args) -> int:
    from .config import AppConfig
    from .perception import BevCostMap
    from .planner import DirectionalBias, RolloutEvaluator, generate_rollouts

    cfg = AppConfig().validate()
    groups = generate_rollouts(cfg.planner)
    evaluator = RolloutEvaluator(groups, cfg.planner)
    rng = np.random.default_rng(args.seed)
    maps = []
    for _ in range(64):
        grid = (rng.random((80, 60)) < rng.uniform(0.02, 0.25)).astype(np.uint8) * 200
        maps.append(BevCostMap(grid, np.zeros((80, 60), bool), 0.05, 0.0, -1.5,
                               "front"))
    bias = DirectionalBias("right", cfg.planner.bias_magnitude, 0.0, 1e9)
    evaluator.evaluate(maps[0], bias)    # warm up
    times = []
    for i in range(args.iterations):
        t0 = time.perf_counter()
        evaluator.evaluate(maps[i % len(maps)], bias)
        times.append((time.perf_counter() - t0) * 1e3)
    arr = np.array(times)
    report = {
        "iterations": args.iterations,
        "groups": len(groups),
        "map_cells": [80, 60],
        "p50_ms": float(np.percentile(arr, 50)),
        "p90_ms": float(np.percentile(arr, 90)),
        "p99_ms": float(np.percentile(arr, 99)),
        "max_ms": float(arr.max()),
        "budget_ms": 50.0,
        "within_budget": bool(np.percentile(arr, 99) <= 50.0),
    }
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0 if report["within_budget"] else 1


def _cmd_export_scenarios(args) -> int:
    for path in export_all(args.dir):
        print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="guidenav",
        description="guide-dog-style hallway navigation simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one episode")
    run.add_argument("--scenario", required=True,
                     help=f"shipped name ({', '.join(sorted(BUILDERS))}) or JSON path")
    run.add_argument("--config", default=None, help="JSON config overrides")
    run.add_argument("--script", default=None,
                     help="JSON press script: [{\"t\": s, \"button\": \"up\"|\"down\"}]")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--log", default=None, help="write the episode log here")
    run.add_argument("--interactive", action="store_true",
                     help="pace to real time and serve the live console")
    run.add_argument("--port", type=int, default=8765)
    run.add_argument("--dump-frames", default=None,
                     help="directory for per-tick PGM frame dumps")
    run.add_argument("--max-sim-time", type=float, default=None)
    run.set_defaults(func=_cmd_run)

    rep = sub.add_parser("replay", help="re-emit a recorded episode")
    rep.add_argument("--log", required=True)
    rep.add_argument("--serve", action="store_true",
                     help="publish snapshots over the live console socket")
    rep.add_argument("--port", type=int, default=8765)
    rep.add_argument("--rate", type=float, default=None,
                     help="real-time multiple (default: as fast as possible)")
    rep.set_defaults(func=_cmd_replay)

    met = sub.add_parser("metrics", help="compute metrics from a log")
    met.add_argument("--log", required=True)
    met.add_argument("--format", choices=("json", "csv"), default="json")
    met.set_defaults(func=_cmd_metrics)

    bench = sub.add_parser("bench-planner",
                           help="report the planning-period distribution")
    bench.add_argument("--iterations", type=int, default=2000)
    bench.add_argument("--seed", type=int, default=0)
    bench.set_defaults(func=_cmd_bench_planner)

    exp = sub.add_parser("export-scenarios", help="write shipped scenario JSON files")
    exp.add_argument("--dir", required=True)
    exp.set_defaults(func=_cmd_export_scenarios)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
