"""Per-cycle tentacle scoring: five heuristics, weighted cost, selection.

Navigability is ternary: NAVIGABLE (clear over the full length),
NON_NAVIGABLE (first obstruction before the crash distance) or
TEMPORARILY_NAVIGABLE (obstruction beyond it). Selection minimizes the
weighted cost over tentacles that are not NON_NAVIGABLE. Goal closeness
and smoothness are measured at a designated anchor sample (default: the
tentacle endpoint) and min-max normalized across the bank each cycle so
the four weights stay dimension-free.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from tentanav import kernels
from tentanav.grid import OccupancyGrid
from tentanav.params import OnlineParams
from tentanav.tentacles import ClassifiedVoxels, DegenerateBankError, Tentacle, TentacleBank
from tentanav.transforms import RigidTransform

NAVIGABLE = 1
NON_NAVIGABLE = 0
TEMPORARILY_NAVIGABLE = -1


@dataclass(eq=False)
class OccupancyBins:
    """Occupancy projected onto one tentacle's sampling points.

    hist[k-1] counts occupied priority voxels whose closest sample is
    sample number k; the weights sum over priority and support voxels
    alike.
    """

    hist: np.ndarray
    total_weight: float
    occupied_weight: float


@dataclass(eq=False)
class ScoreTable:
    """Per-tentacle scores for one cycle (arrays indexed by tentacle id).

    first_blocked holds the 1-based number of the first occupied sample
    (0 = none); closeness/smoothness carry both raw meters and the
    normalized values that enter the cost.
    """

    navigability: np.ndarray
    obstacle_distance: np.ndarray
    first_blocked: np.ndarray
    clearance: np.ndarray
    clutter: np.ndarray
    closeness_raw: np.ndarray
    smoothness_raw: np.ndarray
    closeness: np.ndarray
    smoothness: np.ndarray
    cost: np.ndarray
    best: int | None


def bin_occupancy(
    voxels: ClassifiedVoxels, grid: OccupancyGrid, n_samples: int
) -> OccupancyBins:
    """Project grid occupancy onto one tentacle's sampling points."""
    values = grid.belief[voxels.cell_index]
    total = float(voxels.weight.sum())
    occupied = float((voxels.weight * values).sum())
    mask = (voxels.is_priority == 1) & (values > 0.0)
    hist = np.bincount(voxels.closest_sample[mask], minlength=n_samples)
    return OccupancyBins(hist=hist, total_weight=total, occupied_weight=occupied)


def obstruction_distance(hist: np.ndarray, threshold: int, length: float) -> float:
    """Arc distance to the first sample whose bin count exceeds the
    threshold; the full length when none does. Sample number n_samples
    maps to exactly ``length``."""
    n_samples = hist.shape[0]
    blocked = np.flatnonzero(hist > threshold)
    if blocked.size == 0:
        return length
    k = int(blocked[0]) + 1
    return length if k == n_samples else length * k / n_samples


def navigability(
    bins: OccupancyBins, online: OnlineParams, length: float, n_samples: int
) -> tuple[int, float]:
    """Ternary label plus distance to the first obstructed sample."""
    distance = obstruction_distance(
        bins.hist, online.occupancy_error_threshold, length
    )
    return _label(distance, length, online.crash_distance_scale), distance


def _label(distance: float, length: float, crash_scale: float) -> int:
    if distance >= length:
        return NAVIGABLE
    if distance < length / crash_scale:
        return NON_NAVIGABLE
    return TEMPORARILY_NAVIGABLE


def clearance(obstacle_distance: float, length: float) -> float:
    """0 for a totally clear tentacle up to 1 for one obstructed at the root."""
    return 1.0 - obstacle_distance / length


def clutter(bins: OccupancyBins) -> float:
    """Occupied fraction of the tentacle's total voxel weight, in [0, 1]."""
    if bins.total_weight <= 0.0:
        raise DegenerateBankError("tentacle has zero total voxel weight")
    return bins.occupied_weight / bins.total_weight


def goal_closeness(
    tentacle: Tentacle,
    robot_pose: RigidTransform,
    goal,
    anchor: int = -1,
) -> float:
    """World-frame distance from the anchor sample to the goal."""
    anchor_world = robot_pose.apply(tentacle.samples[anchor])
    return float(np.linalg.norm(anchor_world - np.asarray(goal, dtype=float)))


def smoothness(
    tentacle: Tentacle, previous_best: Tentacle | None, anchor: int = -1
) -> float:
    """Robot-frame anchor distance to the previously selected tentacle
    (0 on the first cycle or for the previous best itself)."""
    if previous_best is None:
        return 0.0
    return float(
        np.linalg.norm(tentacle.samples[anchor] - previous_best.samples[anchor])
    )


def normalize(values: np.ndarray) -> np.ndarray:
    """Min-max to [0, 1]; a degenerate (all-equal) column normalizes to 0."""
    lo = float(values.min())
    hi = float(values.max())
    if hi == lo:
        return np.zeros_like(values)
    return (values - lo) / (hi - lo)


def compute_costs(
    clearance_values: np.ndarray,
    clutter_values: np.ndarray,
    closeness_raw: np.ndarray,
    smoothness_raw: np.ndarray,
    online: OnlineParams,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Weighted cost per tentacle; returns (cost, closeness_n, smoothness_n)."""
    closeness_n = normalize(closeness_raw)
    smoothness_n = normalize(smoothness_raw)
    cost = (
        online.clearance_weight * clearance_values
        + online.clutter_weight * clutter_values
        + online.closeness_weight * closeness_n
        + online.smoothness_weight * smoothness_n
    )
    return cost, closeness_n, smoothness_n


def select_best(
    navigability_values: np.ndarray, cost: np.ndarray, previous_best: int | None = None
) -> int | None:
    """Argmin of cost over tentacles that are not NON_NAVIGABLE.

    Ties keep the previous best when it is among them, else the lowest id;
    returns None when every tentacle is NON_NAVIGABLE.
    """
    eligible = navigability_values != NON_NAVIGABLE
    if not eligible.any():
        return None
    best_cost = cost[eligible].min()
    tied = eligible & (cost == best_cost)
    if previous_best is not None and 0 <= previous_best < tied.size and tied[previous_best]:
        return int(previous_best)
    return int(np.flatnonzero(tied)[0])


def score_all(
    bank: TentacleBank,
    grid: OccupancyGrid,
    robot_pose: RigidTransform,
    goal,
    online: OnlineParams,
    previous_best: int | None = None,
    anchor: int = -1,
    timings: dict | None = None,
) -> ScoreTable:
    """Score the whole bank for one cycle (batched kernel path).

    Equivalent to looping bin_occupancy/navigability/clearance/clutter/
    goal_closeness/smoothness per tentacle; the oracle tests pin that.
    """
    t0 = time.perf_counter()
    hist, occupied_weight = kernels.update_occupancy(
        grid.belief,
        bank.offsets,
        bank.cell_index,
        bank.weight,
        bank.closest_sample,
        bank.is_priority,
        bank.n_samples,
    )
    t1 = time.perf_counter()

    n_samples = bank.n_samples
    length = bank.length
    blocked_mask = hist > online.occupancy_error_threshold
    any_blocked = blocked_mask.any(axis=1)
    first_idx = blocked_mask.argmax(axis=1)
    first_blocked = np.where(any_blocked, first_idx + 1, 0).astype(np.int64)
    obstacle_distance = np.where(
        any_blocked & (first_blocked != n_samples),
        length * first_blocked / n_samples,
        length,
    )
    crash_distance = length / online.crash_distance_scale
    nav = np.where(
        obstacle_distance >= length,
        NAVIGABLE,
        np.where(
            obstacle_distance < crash_distance, NON_NAVIGABLE, TEMPORARILY_NAVIGABLE
        ),
    ).astype(np.int8)

    clearance_values = 1.0 - obstacle_distance / length
    clutter_values = occupied_weight / bank.total_weight

    if anchor == -1 or anchor == n_samples - 1:
        anchors_robot = bank.endpoints
    else:
        anchors_robot = np.asarray([t.samples[anchor] for t in bank.tentacles])
    anchors_world = robot_pose.apply(anchors_robot)
    closeness_raw = np.linalg.norm(anchors_world - np.asarray(goal, dtype=float), axis=1)
    if previous_best is None:
        smoothness_raw = np.zeros(len(bank))
    else:
        smoothness_raw = np.linalg.norm(
            anchors_robot - anchors_robot[previous_best], axis=1
        )

    cost, closeness_n, smoothness_n = compute_costs(
        clearance_values, clutter_values, closeness_raw, smoothness_raw, online
    )
    t2 = time.perf_counter()
    best = select_best(nav, cost, previous_best)
    t3 = time.perf_counter()

    if timings is not None:
        timings["occupancy"] = (t1 - t0) * 1e3
        timings["heuristics"] = (t2 - t1) * 1e3
        timings["selection"] = (t3 - t2) * 1e3

    return ScoreTable(
        navigability=nav,
        obstacle_distance=obstacle_distance,
        first_blocked=first_blocked,
        clearance=clearance_values,
        clutter=clutter_values,
        closeness_raw=closeness_raw,
        smoothness_raw=smoothness_raw,
        closeness=closeness_n,
        smoothness=smoothness_n,
        cost=cost,
        best=best,
    )
