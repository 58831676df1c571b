"""Benchmark harness: seeded trial suites, aggregate metrics, stage timing.

The built-in suite mirrors the evaluation protocol this engine is judged
by: one 20x20 m cylinder arena plus nine seeded 10x10 m forests at 0.2
obstacles/m^2, ten trials per map. Each trial seed jitters the start
position inside a small disk so repeated trials differ while staying
fully reproducible.
"""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from functools import lru_cache
from pathlib import Path
from typing import Sequence

import numpy as np

from tentanav import kernels, sim
from tentanav.grid import GridSpec, OccupancyGrid
from tentanav.navigator import STAGES, Navigator, RobotState
from tentanav.params import (
    OfflineParams,
    OnlineParams,
    RobotParams,
    benchmark_params,
)
from tentanav.tentacles import TentacleBank, generate_tentacles

START_JITTER_M = 0.25


@dataclass(frozen=True)
class Scenario:
    """One benchmark map with its start pose, goal sequence and time budget."""

    map_id: str
    world: sim.WorldMap
    start: tuple[float, float, float]
    start_yaw: float
    goals: tuple
    time_limit: float


@dataclass(frozen=True)
class TrialRecord:
    map_id: str
    seed: int
    trial: int
    success: bool
    failure_cause: str
    duration: float
    path_length: float
    cycles: int
    stage_means_ms: tuple


def default_suite(base_seed: int = 100) -> list[Scenario]:
    """Cylinder arena plus nine forests, straight-crossing goal layouts."""
    scenarios = []
    cyl_world = sim.generate_map(
        "cylinders",
        seed=base_seed,
        bounds=(-10.0, 10.0, -10.0, 10.0),
        keep_clear=((-8.5, 5.0, 1.5), (8.5, 5.0, 1.5), (8.5, -5.0, 1.5), (-8.5, -5.0, 1.5)),
    )
    scenarios.append(
        Scenario(
            map_id="cylinders",
            world=cyl_world,
            start=(-8.5, 5.0, 1.2),
            start_yaw=0.0,
            goals=((8.5, 5.0, 1.2), (8.5, -5.0, 1.2), (-8.5, -5.0, 1.2)),
            time_limit=120.0,
        )
    )
    for i in range(9):
        world = sim.generate_map(
            "forest",
            seed=base_seed + 1 + i,
            bounds=(-5.0, 5.0, -5.0, 5.0),
            density=0.2,
            keep_clear=((-5.5, 0.0, 1.2), (5.5, 0.0, 1.2)),
        )
        scenarios.append(
            Scenario(
                map_id=f"forest{i}",
                world=world,
                start=(-6.5, 0.0, 1.2),
                start_yaw=0.0,
                goals=((6.5, 0.0, 1.2),),
                time_limit=60.0,
            )
        )
    return scenarios


@lru_cache(maxsize=4)
def _cached_bank(offline: OfflineParams) -> TentacleBank:
    return TentacleBank.build(offline)


def run_trial(
    scenario: Scenario,
    robot: RobotParams,
    offline: OfflineParams,
    online: OnlineParams,
    trial: int,
    trial_seed: int,
    sensor: sim.SensorModel | None = None,
    cycle_period: float = 0.1,
    goal_tolerance: float = 0.5,
) -> TrialRecord:
    """One seeded trial; the seed jitters the start position."""
    rng = np.random.default_rng(trial_seed)
    angle = float(rng.uniform(0.0, 2.0 * math.pi))
    radius = float(rng.uniform(0.0, START_JITTER_M))
    start = RobotState(
        position=(
            scenario.start[0] + radius * math.cos(angle),
            scenario.start[1] + radius * math.sin(angle),
            scenario.start[2],
        ),
        yaw=scenario.start_yaw,
    )
    sensor = sensor or sim.SensorModel.from_params(robot)
    navigator = Navigator(
        robot,
        offline,
        online,
        bank=_cached_bank(offline),
        cycle_period=cycle_period,
        goal_tolerance=goal_tolerance,
    )
    noise_rng = np.random.default_rng(trial_seed + 1) if sensor.noise_sigma > 0 else None
    result = navigator.run(
        scenario.world,
        sensor,
        start,
        scenario.goals,
        scenario.time_limit,
        noise_rng=noise_rng,
        record_trajectory=False,
    )
    return TrialRecord(
        map_id=scenario.map_id,
        seed=scenario.world.seed,
        trial=trial,
        success=result.success,
        failure_cause=result.failure_cause or "",
        duration=result.duration,
        path_length=result.path_length,
        cycles=result.cycles,
        stage_means_ms=tuple(result.stage_means_ms[k] for k in STAGES),
    )


def _trial_task(args) -> TrialRecord:
    return run_trial(*args)


def run_suite(
    scenarios: Sequence[Scenario],
    trials_per_map: int,
    robot: RobotParams,
    offline: OfflineParams,
    online: OnlineParams,
    base_seed: int = 0,
    workers: int = 1,
    sensor: sim.SensorModel | None = None,
) -> tuple[list[TrialRecord], dict]:
    """Run every (map, trial) pair; failures are recorded, never fatal."""
    tasks = []
    for s_idx, scenario in enumerate(scenarios):
        for trial in range(trials_per_map):
            trial_seed = base_seed + 1000 * s_idx + trial
            tasks.append((scenario, robot, offline, online, trial, trial_seed, sensor))
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_trial_task, tasks, chunksize=1))
    else:
        records = [_trial_task(t) for t in tasks]
    records.sort(key=lambda r: (r.map_id, r.trial))
    return records, summarize(records)


def summarize(records: Sequence[TrialRecord]) -> dict:
    """Per-map and overall aggregates (duration/path stats over successes)."""
    per_map: dict[str, dict] = {}
    for record in records:
        per_map.setdefault(record.map_id, []).append(record)
    maps = {}
    for map_id, recs in sorted(per_map.items()):
        succ = [r for r in recs if r.success]
        maps[map_id] = {
            "trials": len(recs),
            "successes": len(succ),
            "success_rate": len(succ) / len(recs),
            "duration_s": _stats([r.duration for r in succ]),
            "path_length_m": _stats([r.path_length for r in succ]),
        }
    total = len(records)
    successes = sum(1 for r in records if r.success)
    all_succ = [r for r in records if r.success]
    return {
        "maps": maps,
        "overall": {
            "trials": total,
            "successes": successes,
            "success_rate": successes / total if total else 0.0,
            "duration_s": _stats([r.duration for r in all_succ]),
            "path_length_m": _stats([r.path_length for r in all_succ]),
        },
    }


def _stats(values) -> dict:
    if not values:
        return {"mean": None, "min": None, "max": None}
    return {
        "mean": float(np.mean(values)),
        "min": float(np.min(values)),
        "max": float(np.max(values)),
    }


RESULTS_COLUMNS = (
    "map_id",
    "seed",
    "trial",
    "success",
    "failure_cause",
    "duration_s",
    "path_length_m",
    "cycles",
) + tuple(f"t_{k}_ms" for k in STAGES)

# timing columns are excluded from byte-for-byte reproducibility
N_DETERMINISTIC_COLUMNS = len(RESULTS_COLUMNS) - len(STAGES)


def write_results_csv(records: Sequence[TrialRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULTS_COLUMNS)
        for r in records:
            writer.writerow(
                [
                    r.map_id,
                    r.seed,
                    r.trial,
                    int(r.success),
                    r.failure_cause,
                    repr(r.duration),
                    repr(r.path_length),
                    r.cycles,
                ]
                + [f"{v:.4f}" for v in r.stage_means_ms]
            )


def write_summary_json(summary: dict, path) -> None:
    Path(path).write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")


@dataclass(frozen=True)
class TimingVariant:
    name: str
    robot: RobotParams
    offline: OfflineParams
    online: OnlineParams


def default_timing_variants() -> list[TimingVariant]:
    """Base config, halved voxel dimension, doubled tentacle count."""
    robot, offline, online = benchmark_params()
    base = replace(offline, tentacle_length=5.0)
    half_voxel = replace(
        base,
        voxel_dim=base.voxel_dim / 2.0,
        grid_voxels=tuple(2 * n for n in base.grid_voxels),
    )
    doubled = replace(base, pitch_tentacles=2 * base.pitch_tentacles)
    return [
        TimingVariant("base", robot, base, online),
        TimingVariant("half_voxel", robot, half_voxel, online),
        TimingVariant("double_tentacles", robot, doubled, online),
    ]


def _timing_scene(offline: OfflineParams) -> sim.WorldMap:
    """Obstacles spread through the sensor envelope for representative load."""
    reach = offline.tentacle_length
    return sim.generate_map(
        "forest",
        seed=7,
        bounds=(-reach, reach, -reach, reach),
        density=0.2,
        keep_clear=((0.0, 0.0, 1.0),),
    )


def time_stages(
    variants: Sequence[TimingVariant],
    cycles: int = 50,
    repeats: int = 1,
) -> list[dict]:
    """Init and per-cycle stage means for each config variant (serial).

    Timing scopes exclude all I/O; per-cycle numbers are means over
    ``cycles`` navigation cycles against a static representative scene,
    best of ``repeats``.
    """
    rows = []
    for variant in variants:
        best: dict | None = None
        for _ in range(repeats):
            row = _time_variant(variant, cycles)
            if best is None or row["cycle_total_ms"] < best["cycle_total_ms"]:
                best = row
        rows.append(best)
    return rows


def _time_variant(variant: TimingVariant, cycles: int) -> dict:
    offline = variant.offline
    t0 = time.perf_counter()
    grid = OccupancyGrid(GridSpec.from_params(offline))
    t1 = time.perf_counter()
    tentacles = generate_tentacles(offline)
    t2 = time.perf_counter()
    bank = TentacleBank.build(offline)
    t3 = time.perf_counter()

    world = _timing_scene(offline)
    sensor = sim.SensorModel(
        range=variant.robot.sensor_range, min_range=0.3, angular_resolution=math.radians(1.5)
    )
    navigator = Navigator(variant.robot, offline, variant.online, bank=bank)
    state = RobotState(position=(0.0, 0.0, 1.2))
    goal = (offline.tentacle_length, 0.0, 1.2)
    cloud = sim.sense(world, sensor, state.pose())

    totals = {k: 0.0 for k in STAGES}
    for _ in range(cycles):
        result = navigator.step(state, cloud, goal)
        for key in STAGES:
            totals[key] += result.timings[key]
    means = {k: totals[k] / cycles for k in STAGES}
    return {
        "variant": variant.name,
        "voxel_dim": offline.voxel_dim,
        "n_tentacles": offline.tentacle_count,
        "grid_init_s": t1 - t0,
        "generate_tentacles_s": t2 - t1,
        "precompute_s": t3 - t2,
        **{f"{k}_ms": means[k] for k in STAGES},
        "cycle_total_ms": sum(means.values()),
    }


TIMINGS_COLUMNS = (
    "variant",
    "voxel_dim",
    "n_tentacles",
    "grid_init_s",
    "generate_tentacles_s",
    "precompute_s",
) + tuple(f"{k}_ms" for k in STAGES) + ("cycle_total_ms",)


def write_timings_csv(rows: Sequence[dict], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TIMINGS_COLUMNS)
        for row in rows:
            writer.writerow(
                [
                    f"{row[c]:.6f}" if isinstance(row[c], float) else row[c]
                    for c in TIMINGS_COLUMNS
                ]
            )


def compare_kernel_backends(repeats: int = 3) -> list[dict]:
    """Time each hot kernel on both backends over a standard workload."""
    robot, offline, online = benchmark_params()
    bank = TentacleBank.build(offline)
    spec = bank.spec
    rng = np.random.default_rng(3)
    n_points = 200_000
    extent = np.asarray(spec.extents)
    coords = np.ascontiguousarray(rng.uniform(-extent / 2, extent / 2, size=(n_points, 3)))
    weights = np.ascontiguousarray(rng.uniform(0.0, 1.0, n_points))
    belief = np.zeros(spec.n_cells)
    occupied = rng.choice(spec.n_cells, size=spec.n_cells // 50, replace=False)
    belief[occupied] = rng.uniform(0.1, 1.0, occupied.size)
    tentacle = bank.tentacles[len(bank) // 2]

    rows = []
    for name in kernels.available_backends():
        impl = kernels.backend_module(name)
        nx, ny, nz = spec.counts

        def _accumulate():
            sums = np.zeros(spec.n_cells)
            counts = np.zeros(spec.n_cells, dtype=np.int64)
            impl.accumulate_points(coords, weights, nx, ny, nz, spec.voxel_dim, sums, counts)

        def _classify():
            impl.classify_cells(
                tentacle.samples,
                nx,
                ny,
                nz,
                spec.voxel_dim,
                offline.priority_distance,
                offline.support_distance,
                offline.max_occupancy_weight,
                offline.occupancy_weight_scale,
            )

        def _occupancy():
            impl.update_occupancy(
                belief,
                bank.offsets,
                bank.cell_index,
                bank.weight,
                bank.closest_sample,
                bank.is_priority,
                bank.n_samples,
            )

        for kernel_name, fn in (
            ("accumulate_points", _accumulate),
            ("classify_cells", _classify),
            ("update_occupancy", _occupancy),
        ):
            best = math.inf
            for _ in range(repeats):
                t0 = time.perf_counter()
                fn()
                best = min(best, time.perf_counter() - t0)
            rows.append({"backend": name, "kernel": kernel_name, "best_ms": best * 1e3})
    return rows


def write_kernel_comparison_csv(rows: Sequence[dict], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["backend", "kernel", "best_ms"])
        for row in rows:
            writer.writerow([row["backend"], row["kernel"], f"{row['best_ms']:.4f}"])
