from __future__ import annotations

import math

import pytest

from tentanav.params import OfflineParams, OnlineParams, RobotParams


def small_offline(**overrides) -> OfflineParams:
    """Tiny bank/grid for fast unit tests."""
    base = dict(
        voxel_dim=0.25,
        grid_voxels=(48, 48, 16),
        yaw_tentacles=5,
        pitch_tentacles=3,
        samples_per_tentacle=10,
        tentacle_length=4.0,
        yaw_coverage=math.radians(60.0),
        pitch_coverage=math.radians(20.0),
        priority_distance=0.3,
        support_distance=0.8,
        max_occupancy_weight=1.0,
        occupancy_weight_scale=10.0,
    )
    base.update(overrides)
    return OfflineParams(**base)


@pytest.fixture
def offline_small() -> OfflineParams:
    return small_offline()


@pytest.fixture
def online_default() -> OnlineParams:
    return OnlineParams()


@pytest.fixture
def robot_default() -> RobotParams:
    return RobotParams()


def brute_force_classify(samples, counts, voxel_dim, tau_p, tau_s, beta_max, alpha_beta):
    """All-pairs classification oracle: plain loops over every grid voxel.

    Returns dict cell_index -> (distance, closest_sample, is_priority, beta).
    """
    nx, ny, nz = counts
    result = {}
    for k in range(nz):
        cz = (k - nz // 2 + 0.5) * voxel_dim
        for j in range(ny):
            cy = (j - ny // 2 + 0.5) * voxel_dim
            for i in range(nx):
                cx = (i - nx // 2 + 0.5) * voxel_dim
                best = None
                best_s = -1
                for s_idx, (sx, sy, sz) in enumerate(samples):
                    d = math.sqrt((cx - sx) ** 2 + (cy - sy) ** 2 + (cz - sz) ** 2)
                    if best is None or d < best:
                        best = d
                        best_s = s_idx
                if best < tau_s:
                    is_priority = best < tau_p
                    beta = beta_max if is_priority else beta_max / (alpha_beta * best)
                    o = i + j * nx + k * nx * ny
                    result[o] = (best, best_s, is_priority, beta)
    return result


def brute_force_navigability(hist, threshold, length, crash_scale):
    """Direct evaluation of the ternary label from the bin counts."""
    n_samples = len(hist)
    k_obs = None
    for k in range(n_samples):
        if hist[k] > threshold:
            k_obs = k + 1
            break
    l_obs = length if k_obs is None else length * k_obs / n_samples
    if k_obs == n_samples:
        l_obs = length
    crash = length / crash_scale
    if l_obs >= length:
        label = 1
    elif l_obs < crash:
        label = 0
    else:
        label = -1
    return label, l_obs
