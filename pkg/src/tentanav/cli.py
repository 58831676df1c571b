"""Command-line entry point.

Subcommands: gen-map (procedural worlds), run (single navigation trial),
bench (trial suite -> results.csv/summary.json), time (stage timing table,
optional kernel-backend comparison) and dump (tentacle bank / grid
snapshots). Every output lands under --out; `run` prints the final result
JSON to stdout.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from tentanav import bench, sim
from tentanav.grid import GridSpec, OccupancyGrid
from tentanav.navigator import Navigator, RobotState, write_trajectory_csv
from tentanav.params import ConfigError, load_config
from tentanav.tentacles import TentacleBank


def _parse_xyz(text: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected x,y,z — got {text!r}")
    try:
        return tuple(float(p) for p in parts)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad coordinate in {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tentanav",
        description="Tentacle-based 3D reactive navigation: simulate, benchmark, inspect.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen-map", help="generate a procedural obstacle map")
    p_gen.add_argument("--kind", choices=["cylinders", "forest"], required=True)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--size", type=float, nargs=2, metavar=("W", "H"), default=None,
                       help="arena width/height in meters, centered at the origin")
    p_gen.add_argument("--density", type=float, default=0.2,
                       help="forest obstacle density per m^2")
    p_gen.add_argument("--count", type=int, default=12,
                       help="cylinder-arena obstacle count")
    p_gen.add_argument("--out", required=True, help="output map JSON path")

    p_run = sub.add_parser("run", help="run one navigation trial on a map")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--map", dest="map_path", required=True)
    p_run.add_argument("--goal", action="append", type=_parse_xyz, required=True,
                       metavar="X,Y,Z", help="goal point; repeat for goal sequences")
    p_run.add_argument("--start", type=_parse_xyz, default=(0.0, 0.0, 1.2))
    p_run.add_argument("--start-yaw", type=float, default=0.0)
    p_run.add_argument("--time-limit", type=float, default=120.0)
    p_run.add_argument("--out", default="out")
    p_run.add_argument("--log-scores", action="store_true",
                       help="write per-cycle per-tentacle scores CSV")
    p_run.add_argument("--dump-grid", action="store_true",
                       help="write the final occupancy grid as CSV")
    p_run.add_argument("--dump-tentacles", action="store_true",
                       help="write the tentacle bank as JSON lines")

    p_bench = sub.add_parser("bench", help="run the benchmark suite")
    p_bench.add_argument("--config", required=True)
    p_bench.add_argument("--maps", default=None,
                         help="directory of map JSONs (default: built-in suite)")
    p_bench.add_argument("--trials", type=int, default=10)
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    p_bench.add_argument("--out", default="out")

    p_time = sub.add_parser("time", help="stage timing table across config variants")
    p_time.add_argument("--config", required=True)
    p_time.add_argument("--cycles", type=int, default=50)
    p_time.add_argument("--timing-serial", action="store_true",
                        help="accepted for interface compatibility; timing always runs serially")
    p_time.add_argument("--compare-kernels", action="store_true",
                        help="also benchmark the compiled vs numpy kernel backends")
    p_time.add_argument("--out", default="out")

    p_dump = sub.add_parser("dump", help="dump bank or grid data for inspection")
    p_dump.add_argument("--config", required=True)
    p_dump.add_argument("--what", choices=["tentacles", "grid"], required=True)
    p_dump.add_argument("--map", dest="map_path", default=None,
                        help="map JSON (grid dumps only)")
    p_dump.add_argument("--at", type=_parse_xyz, default=(0.0, 0.0, 1.2),
                        help="robot position for grid dumps")
    p_dump.add_argument("--out", required=True)
    return parser


def _cmd_gen_map(args) -> int:
    if args.size is None:
        size = (20.0, 20.0) if args.kind == "cylinders" else (10.0, 10.0)
    else:
        size = tuple(args.size)
    bounds = (-size[0] / 2, size[0] / 2, -size[1] / 2, size[1] / 2)
    clear_r = 1.2
    keep_clear = ((bounds[0] - 1.0, 0.0, clear_r), (bounds[1] + 1.0, 0.0, clear_r))
    world = sim.generate_map(
        args.kind,
        seed=args.seed,
        bounds=bounds,
        density=args.density,
        count=args.count,
        keep_clear=keep_clear,
    )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    sim.save_map(world, out)
    print(f"wrote {args.kind} map with {len(world.obstacles)} obstacles to {out}")
    return 0


def _cmd_run(args) -> int:
    robot, offline, online = load_config(args.config)
    world = sim.load_map(args.map_path)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    sensor = sim.SensorModel.from_params(robot)
    navigator = Navigator(robot, offline, online)
    if args.dump_tentacles:
        navigator.bank.dump_jsonl(out / "tentacles.jsonl")

    score_log = None
    if args.log_scores:
        score_log = open(out / "scores.csv", "w", newline="")
        score_log.write("cycle,tentacle,nav,clear,clut,close_raw,smo_raw,cost\n")

    start = RobotState(position=args.start, yaw=args.start_yaw)
    if args.log_scores:
        result = _run_logged(navigator, world, sensor, start, args, score_log)
        score_log.close()
    else:
        result = navigator.run(world, sensor, start, args.goal, args.time_limit)
    write_trajectory_csv(result, out / "trajectory.csv")
    if args.dump_grid:
        navigator.grid.dump_csv(out / "grid.csv")
    payload = json.dumps(result.to_json_dict(), indent=2, sort_keys=True)
    (out / "result.json").write_text(payload + "\n")
    print(payload)
    return 0


def _run_logged(navigator, world, sensor, start, args, score_log):
    """run() with a per-cycle score CSV tap (kept out of the hot path)."""
    state = start
    goals = [np.asarray(g, dtype=float) for g in args.goal]
    original_step = navigator.step
    cycle = {"i": 0}

    def logged_step(st, cloud, goal):
        result = original_step(st, cloud, goal)
        scores = result.scores
        for j in range(len(navigator.bank)):
            score_log.write(
                f"{cycle['i']},{j},{int(scores.navigability[j])},"
                f"{scores.clearance[j]:.6f},{scores.clutter[j]:.6f},"
                f"{scores.closeness_raw[j]:.6f},{scores.smoothness_raw[j]:.6f},"
                f"{scores.cost[j]:.6f}\n"
            )
        cycle["i"] += 1
        return result

    navigator.step = logged_step
    try:
        return navigator.run(world, sensor, state, goals, args.time_limit)
    finally:
        navigator.step = original_step


def _scenarios_from_dir(maps_dir: str) -> list[bench.Scenario]:
    paths = sorted(Path(maps_dir).glob("*.json"))
    if not paths:
        raise sim.MapError(f"no .json maps found in {maps_dir}")
    scenarios = []
    for path in paths:
        world = sim.load_map(path)
        xmin, xmax, _, _ = world.bounds
        scenarios.append(
            bench.Scenario(
                map_id=path.stem,
                world=world,
                start=(xmin - 1.5, 0.0, 1.2),
                start_yaw=0.0,
                goals=((xmax + 1.5, 0.0, 1.2),),
                time_limit=60.0 + 6.0 * (xmax - xmin),
            )
        )
    return scenarios


def _cmd_bench(args) -> int:
    robot, offline, online = load_config(args.config)
    scenarios = (
        _scenarios_from_dir(args.maps) if args.maps else bench.default_suite()
    )
    sensor = sim.SensorModel.from_params(robot)
    records, summary = bench.run_suite(
        scenarios,
        args.trials,
        robot,
        offline,
        online,
        base_seed=args.seed,
        workers=max(args.workers, 1),
        sensor=sensor,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    bench.write_results_csv(records, out / "results.csv")
    bench.write_summary_json(summary, out / "summary.json")
    overall = summary["overall"]
    print(
        f"{overall['trials']} trials, success rate "
        f"{overall['success_rate']:.1%}; wrote {out / 'results.csv'}"
    )
    return 0


def _cmd_time(args) -> int:
    load_config(args.config)  # validate even though variants are built-in
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = bench.time_stages(bench.default_timing_variants(), cycles=args.cycles)
    bench.write_timings_csv(rows, out / "timings.csv")
    for row in rows:
        print(
            f"{row['variant']}: precompute {row['precompute_s']:.2f} s, "
            f"cycle {row['cycle_total_ms']:.2f} ms"
        )
    if args.compare_kernels:
        kernel_rows = bench.compare_kernel_backends()
        bench.write_kernel_comparison_csv(kernel_rows, out / "kernels.csv")
        for row in kernel_rows:
            print(f"{row['backend']:>8} {row['kernel']:<18} {row['best_ms']:9.3f} ms")
    return 0


def _cmd_dump(args) -> int:
    robot, offline, online = load_config(args.config)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    if args.what == "tentacles":
        bank = TentacleBank.build(offline)
        bank.dump_jsonl(out)
        print(f"wrote {len(bank)} tentacle records to {out}")
        return 0
    if args.map_path is None:
        raise ConfigError("grid dumps need --map")
    world = sim.load_map(args.map_path)
    sensor = sim.SensorModel.from_params(robot)
    state = RobotState(position=args.at)
    grid = OccupancyGrid(GridSpec.from_params(offline))
    cloud = sim.sense(world, sensor, state.pose())
    grid.rebuild([cloud], state.pose())
    grid.dump_csv(out)
    print(f"wrote {grid.occupied_count} occupied voxels to {out}")
    return 0


_COMMANDS = {
    "gen-map": _cmd_gen_map,
    "run": _cmd_run,
    "bench": _cmd_bench,
    "time": _cmd_time,
    "dump": _cmd_dump,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, sim.MapError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
