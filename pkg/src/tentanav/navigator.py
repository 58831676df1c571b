"""Reactive navigation loop: rebuild grid, score bank, emit pose command.

Each cycle the navigator re-projects the buffered scans into the current
robot frame, scores every tentacle, and steps toward the selected
tentacle's sample at the crash distance, clamped to the robot's lateral
and angular speed limits. When every tentacle is non-navigable it holds
position and keeps re-scoring (the world may clear).
"""

from __future__ import annotations

import math
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from tentanav import heuristics, sim
from tentanav.grid import OccupancyGrid, PointCloud
from tentanav.params import OfflineParams, OnlineParams, RobotParams
from tentanav.tentacles import TentacleBank
from tentanav.transforms import RigidTransform, wrap_angle

STAGES = ("rebuild", "occupancy", "heuristics", "selection", "command")


@dataclass(frozen=True)
class RobotState:
    """Kinematic point state in the world frame."""

    position: tuple[float, float, float]
    yaw: float = 0.0
    pitch: float = 0.0
    speed: float = 0.0
    time: float = 0.0

    def pose(self) -> RigidTransform:
        return RigidTransform.from_pose(self.position, self.yaw, self.pitch)


@dataclass(frozen=True)
class PoseCommand:
    """Target pose for one cycle; displacement respects the speed limits."""

    target_position: tuple[float, float, float]
    target_yaw: float
    target_pitch: float
    duration: float


@dataclass(frozen=True)
class NavStatus:
    state: str  # running | blocked | goal_reached | timed_out
    goals_remaining: int
    elapsed: float
    path_length: float


@dataclass(eq=False)
class StepResult:
    command: PoseCommand
    status: NavStatus
    scores: heuristics.ScoreTable
    timings: dict


@dataclass(eq=False)
class NavResult:
    """Outcome of a full trial."""

    success: bool
    duration: float
    path_length: float
    failure_cause: str | None
    cycles: int
    goals_reached: int
    goals_total: int
    stage_means_ms: dict
    trajectory: list = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "success": self.success,
            "duration_s": self.duration,
            "path_length_m": self.path_length,
            "failure_cause": self.failure_cause,
            "cycles": self.cycles,
            "goals_reached": self.goals_reached,
            "goals_total": self.goals_total,
            "stage_means_ms": {k: self.stage_means_ms.get(k) for k in STAGES},
        }


class Navigator:
    """Owns the grid, the scan history and the previous-best memory."""

    def __init__(
        self,
        robot: RobotParams,
        offline: OfflineParams,
        online: OnlineParams,
        bank: TentacleBank | None = None,
        cycle_period: float = 0.1,
        goal_tolerance: float = 0.5,
    ):
        self.robot = robot
        self.offline = offline
        self.online = online
        self.bank = bank if bank is not None else TentacleBank.build(offline)
        self.grid = OccupancyGrid(self.bank.spec)
        self.cycle_period = cycle_period
        self.goal_tolerance = goal_tolerance
        self.history: deque[PointCloud] = deque(maxlen=max(online.history_depth, 1))
        self.previous_best: int | None = None
        # sample number whose arc distance is closest to the crash distance
        n = offline.samples_per_tentacle
        k = int(math.floor(n / online.crash_distance_scale + 0.5))
        self._crash_sample = min(max(k, 1), n) - 1
        self._path_length = 0.0
        self._start_time: float | None = None
        self._goals_remaining = 0

    def reset(self) -> None:
        self.history.clear()
        self.previous_best = None
        self._path_length = 0.0
        self._start_time = None

    def step(self, state: RobotState, cloud: PointCloud, goal) -> StepResult:
        """One cycle: buffer the scan, rebuild, score, synthesize command."""
        if self._start_time is None:
            self._start_time = state.time
        pose = state.pose()
        timings: dict = {}

        t0 = time.perf_counter()
        self.history.append(cloud)
        self.grid.rebuild(self.history, pose)
        timings["rebuild"] = (time.perf_counter() - t0) * 1e3

        scores = heuristics.score_all(
            self.bank,
            self.grid,
            pose,
            goal,
            self.online,
            previous_best=self.previous_best,
            timings=timings,
        )

        t1 = time.perf_counter()
        command = self._synthesize(state, pose, scores.best)
        timings["command"] = (time.perf_counter() - t1) * 1e3

        if scores.best is not None:
            self.previous_best = scores.best
        blocked = scores.best is None
        at_goal = (
            float(np.linalg.norm(np.asarray(state.position) - np.asarray(goal)))
            < self.goal_tolerance
        )
        status = NavStatus(
            state="blocked" if blocked else ("goal_reached" if at_goal else "running"),
            goals_remaining=self._goals_remaining or (0 if at_goal else 1),
            elapsed=state.time - self._start_time,
            path_length=self._path_length,
        )
        return StepResult(command=command, status=status, scores=scores, timings=timings)

    def _synthesize(
        self, state: RobotState, pose: RigidTransform, best: int | None
    ) -> PoseCommand:
        dt = self.cycle_period
        if best is None:
            return PoseCommand(
                target_position=tuple(state.position),
                target_yaw=state.yaw,
                target_pitch=state.pitch,
                duration=dt,
            )
        tentacle = self.bank.tentacles[best]
        crash_point_world = pose.apply(tentacle.samples[self._crash_sample])
        offset = crash_point_world - np.asarray(state.position)
        distance = float(np.linalg.norm(offset))
        step_len = min(self.robot.max_lateral_speed * dt, distance)
        if distance > 1e-12:
            target = np.asarray(state.position) + offset * (step_len / distance)
        else:
            target = np.asarray(state.position)

        direction_world = pose.rotation @ tentacle.direction()
        desired_yaw = math.atan2(direction_world[1], direction_world[0])
        desired_pitch = math.asin(max(-1.0, min(1.0, float(direction_world[2]))))
        max_dyaw = self.robot.max_yaw_rate * dt
        max_dpitch = self.robot.max_pitch_rate * dt
        dyaw = wrap_angle(desired_yaw - state.yaw)
        dpitch = wrap_angle(desired_pitch - state.pitch)
        target_yaw = state.yaw + max(-max_dyaw, min(max_dyaw, dyaw))
        target_pitch = state.pitch + max(-max_dpitch, min(max_dpitch, dpitch))
        return PoseCommand(
            target_position=tuple(float(v) for v in target),
            target_yaw=wrap_angle(target_yaw),
            target_pitch=target_pitch,
            duration=dt,
        )

    def apply(self, state: RobotState, command: PoseCommand) -> RobotState:
        """Advance the kinematic state by one executed command."""
        displacement = float(
            np.linalg.norm(
                np.asarray(command.target_position) - np.asarray(state.position)
            )
        )
        self._path_length += displacement
        return RobotState(
            position=command.target_position,
            yaw=command.target_yaw,
            pitch=command.target_pitch,
            speed=displacement / command.duration if command.duration > 0 else 0.0,
            time=state.time + command.duration,
        )

    def run(
        self,
        world: sim.WorldMap,
        sensor: sim.SensorModel,
        start: RobotState,
        goals: Sequence,
        time_limit: float,
        noise_rng: np.random.Generator | None = None,
        record_trajectory: bool = True,
    ) -> NavResult:
        """Drive through ``goals`` in order until done or out of time.

        Collision with an obstacle fails the trial immediately; running out
        of time fails it with cause ``blocked`` when the final cycle had no
        navigable tentacle, else ``timeout``.
        """
        if not goals:
            raise ValueError("run() needs at least one goal")
        self.reset()
        goals = [np.asarray(g, dtype=float) for g in goals]
        state = start
        goal_idx = 0
        cycles = 0
        blocked_last = False
        stage_totals = {k: 0.0 for k in STAGES}
        trajectory: list = []
        failure: str | None = None
        success = False

        while True:
            while goal_idx < len(goals) and (
                float(np.linalg.norm(np.asarray(state.position) - goals[goal_idx]))
                < self.goal_tolerance
            ):
                goal_idx += 1
            self._goals_remaining = len(goals) - goal_idx
            if goal_idx == len(goals):
                success = True
                break
            if state.time >= time_limit:
                failure = "blocked" if blocked_last else "timeout"
                break

            cloud = sim.sense(
                world, sensor, state.pose(), rng=noise_rng, timestamp=state.time
            )
            result = self.step(state, cloud, goals[goal_idx])
            state = self.apply(state, result.command)
            cycles += 1
            blocked_last = result.scores.best is None
            for key in STAGES:
                stage_totals[key] += result.timings.get(key, 0.0)
            if record_trajectory:
                selected = result.scores.best
                trajectory.append(
                    (
                        state.time,
                        state.position[0],
                        state.position[1],
                        state.position[2],
                        state.yaw,
                        state.pitch,
                        -1 if selected is None else selected,
                        float("nan")
                        if selected is None
                        else float(result.scores.cost[selected]),
                        0 if selected is None else int(result.scores.navigability[selected]),
                    )
                )
            if sim.collides(world, state.position, state.yaw, self.robot):
                failure = "collision"
                break

        stage_means = {
            k: (stage_totals[k] / cycles if cycles else 0.0) for k in STAGES
        }
        return NavResult(
            success=success,
            duration=state.time - start.time,
            path_length=self._path_length,
            failure_cause=failure,
            cycles=cycles,
            goals_reached=goal_idx,
            goals_total=len(goals),
            stage_means_ms=stage_means,
            trajectory=trajectory,
        )


TRAJECTORY_COLUMNS = (
    "t",
    "x",
    "y",
    "z",
    "yaw",
    "pitch",
    "selected_tentacle",
    "best_cost",
    "nav_label",
)


def write_trajectory_csv(result: NavResult, path) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRAJECTORY_COLUMNS)
        for row in result.trajectory:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
