from __future__ import annotations

import math

import numpy as np
import pytest

from conftest import brute_force_navigability, small_offline
from tentanav import heuristics as h
from tentanav.grid import OccupancyGrid, PointCloud
from tentanav.params import OnlineParams
from tentanav.tentacles import TentacleBank, generate_tentacles
from tentanav.transforms import RigidTransform


def _grid_with_points(spec, points, beliefs):
    grid = OccupancyGrid(spec)
    cloud = PointCloud(
        np.asarray(points, dtype=float),
        np.asarray(beliefs, dtype=float),
        sensor_pose=RigidTransform.identity(),
    )
    grid.rebuild([cloud], RigidTransform.identity())
    return grid


@pytest.fixture(scope="module")
def small_bank():
    offline = small_offline()
    return TentacleBank.build(offline)


def test_empty_grid_empty_bins(small_bank):
    grid = OccupancyGrid(small_bank.spec)
    for voxels in small_bank.classified[:3]:
        bins = h.bin_occupancy(voxels, grid, small_bank.n_samples)
        assert not bins.hist.any()
        assert bins.occupied_weight == 0.0
        assert bins.total_weight > 0.0


def test_single_priority_voxel_fills_its_bin(small_bank):
    voxels = small_bank.classified[0]
    priority_rows = np.flatnonzero(voxels.is_priority == 1)
    row = priority_rows[len(priority_rows) // 2]
    grid = OccupancyGrid(small_bank.spec)
    grid.belief[voxels.cell_index[row]] = 1.0
    bins = h.bin_occupancy(voxels, grid, small_bank.n_samples)
    expected = np.zeros(small_bank.n_samples, dtype=int)
    expected[voxels.closest_sample[row]] = 1
    assert np.array_equal(bins.hist, expected)


def test_fully_occupied_grid_saturates_weights(small_bank):
    grid = OccupancyGrid(small_bank.spec)
    grid.belief[:] = 1.0
    for voxels in small_bank.classified[:3]:
        bins = h.bin_occupancy(voxels, grid, small_bank.n_samples)
        assert bins.occupied_weight == pytest.approx(bins.total_weight)
        assert h.clutter(bins) == pytest.approx(1.0)


def test_navigability_clear_tentacle():
    bins = h.OccupancyBins(np.zeros(30, dtype=int), 5.0, 0.0)
    online = OnlineParams(crash_distance_scale=2.0)
    label, distance = h.navigability(bins, online, 10.0, 30)
    assert (label, distance) == (h.NAVIGABLE, 10.0)


def test_navigability_blocked_before_crash_distance():
    hist = np.zeros(30, dtype=int)
    hist[1] = 1  # sample number 2
    bins = h.OccupancyBins(hist, 5.0, 1.0)
    online = OnlineParams(crash_distance_scale=2.0)
    label, distance = h.navigability(bins, online, 10.0, 30)
    assert label == h.NON_NAVIGABLE
    assert distance == pytest.approx(10.0 * 2 / 30)
    assert distance < 10.0 / 2.0


def test_navigability_blocked_beyond_crash_distance():
    hist = np.zeros(30, dtype=int)
    hist[19] = 3  # sample number 20
    bins = h.OccupancyBins(hist, 5.0, 1.0)
    online = OnlineParams(crash_distance_scale=2.0)
    label, distance = h.navigability(bins, online, 10.0, 30)
    assert label == h.TEMPORARILY_NAVIGABLE
    assert distance == pytest.approx(10.0 * 20 / 30)


def test_navigability_respects_error_threshold():
    hist = np.zeros(10, dtype=int)
    hist[0] = 2
    hist[6] = 5
    bins = h.OccupancyBins(hist, 1.0, 0.0)
    online = OnlineParams(crash_distance_scale=2.0, occupancy_error_threshold=3)
    label, distance = h.navigability(bins, online, 10.0, 10)
    assert distance == pytest.approx(7.0)
    assert label == h.TEMPORARILY_NAVIGABLE


def test_navigability_matches_brute_force_on_random_bins():
    rng = np.random.default_rng(9)
    online_scales = [1.5, 2.0, 3.0, 5.0]
    for trial in range(150):
        n_samples = int(rng.integers(2, 40))
        hist = rng.integers(0, 3, n_samples)
        threshold = int(rng.integers(0, 2))
        crash_scale = float(rng.choice(online_scales))
        length = float(rng.uniform(1.0, 12.0))
        online = OnlineParams(
            crash_distance_scale=crash_scale, occupancy_error_threshold=threshold
        )
        bins = h.OccupancyBins(hist, 1.0, 0.0)
        label, distance = h.navigability(bins, online, length, n_samples)
        exp_label, exp_distance = brute_force_navigability(
            hist.tolist(), threshold, length, crash_scale
        )
        assert label == exp_label
        assert distance == pytest.approx(exp_distance)


def test_two_tentacle_planar_fixture():
    # Two planar tentacles with the crash distance at the second sample.
    # An obstacle at the left tentacle's first sample makes it
    # non-navigable; one at the right tentacle's fourth sample leaves it
    # temporarily navigable.
    offline = small_offline(
        voxel_dim=0.25,
        grid_voxels=(56, 56, 8),
        yaw_tentacles=2,
        pitch_tentacles=1,
        yaw_coverage=math.radians(40.0),
        pitch_coverage=0.0,
        tentacle_length=5.0,
        samples_per_tentacle=5,
        priority_distance=0.4,
        support_distance=1.0,
    )
    online = OnlineParams(crash_distance_scale=2.5)  # crash distance = 2 m = sample 2
    bank = TentacleBank.build(offline)
    left = max(bank.tentacles, key=lambda t: t.yaw)
    right = min(bank.tentacles, key=lambda t: t.yaw)
    grid = _grid_with_points(
        bank.spec,
        [left.samples[0], right.samples[3]],
        [1.0, 1.0],
    )
    labels = {}
    for tentacle in (left, right):
        bins = h.bin_occupancy(
            bank.classified[tentacle.tid], grid, bank.n_samples
        )
        label, _ = h.navigability(bins, online, bank.length, bank.n_samples)
        labels[tentacle.tid] = label
    assert labels[left.tid] == h.NON_NAVIGABLE
    assert labels[right.tid] == h.TEMPORARILY_NAVIGABLE


def test_clearance_endpoints_and_midpoint():
    assert h.clearance(10.0, 10.0) == 0.0
    assert h.clearance(0.0, 10.0) == 1.0
    assert h.clearance(6.67, 10.0) == pytest.approx(0.333, abs=1e-3)


def test_clutter_empty_and_full():
    assert h.clutter(h.OccupancyBins(np.zeros(3, int), 4.0, 0.0)) == 0.0
    assert h.clutter(h.OccupancyBins(np.zeros(3, int), 4.0, 4.0)) == 1.0


def test_clutter_half_weight_fixture():
    # priority voxels hold half the total weight; only they are occupied
    bins = h.OccupancyBins(np.zeros(3, int), total_weight=8.0, occupied_weight=4.0)
    assert h.clutter(bins) == pytest.approx(0.5)


def test_clutter_degenerate_bank_raises():
    from tentanav.tentacles import DegenerateBankError

    with pytest.raises(DegenerateBankError):
        h.clutter(h.OccupancyBins(np.zeros(3, int), 0.0, 0.0))


def test_goal_closeness_identity_cases(small_bank):
    straight = min(
        small_bank.tentacles, key=lambda t: abs(t.yaw) + abs(t.pitch)
    )
    pose = RigidTransform.identity()
    endpoint = straight.samples[-1]
    assert h.goal_closeness(straight, pose, endpoint) == pytest.approx(0.0)


def test_goal_closeness_straight_ahead():
    offline = small_offline(
        yaw_tentacles=1,
        pitch_tentacles=1,
        yaw_coverage=0.0,
        pitch_coverage=0.0,
        tentacle_length=4.0,
        samples_per_tentacle=8,
    )
    (tentacle,) = generate_tentacles(offline)
    pose = RigidTransform.identity()
    assert h.goal_closeness(tentacle, pose, (14.0, 0.0, 0.0)) == pytest.approx(10.0)


def test_goal_closeness_tracks_rotation():
    offline = small_offline(
        yaw_tentacles=1,
        pitch_tentacles=1,
        yaw_coverage=0.0,
        pitch_coverage=0.0,
        tentacle_length=4.0,
        samples_per_tentacle=8,
    )
    (tentacle,) = generate_tentacles(offline)
    pose = RigidTransform.from_pose((0.0, 0.0, 0.0), yaw=math.pi / 2)
    # endpoint rotates to (0, 4, 0)
    assert h.goal_closeness(tentacle, pose, (0.0, 4.0, 0.0)) == pytest.approx(0.0)
    expected = math.dist((0.0, 4.0, 0.0), (10.0, 0.0, 0.0))
    assert h.goal_closeness(tentacle, pose, (10.0, 0.0, 0.0)) == pytest.approx(expected)


def test_smoothness_zero_cases(small_bank):
    tentacle = small_bank.tentacles[0]
    assert h.smoothness(tentacle, None) == 0.0
    assert h.smoothness(tentacle, tentacle) == 0.0


def test_smoothness_chord_between_yawed_rays():
    offline = small_offline(
        yaw_tentacles=3,
        pitch_tentacles=1,
        yaw_coverage=math.radians(60.0),
        pitch_coverage=0.0,
        tentacle_length=10.0,
        samples_per_tentacle=30,
        grid_voxels=(96, 96, 16),
    )
    bank = generate_tentacles(offline)
    straight = next(t for t in bank if abs(t.yaw) < 1e-12)
    yawed = next(t for t in bank if abs(t.yaw - math.radians(30)) < 1e-9)
    chord = 2.0 * 10.0 * math.sin(math.radians(15.0))
    assert h.smoothness(yawed, straight) == pytest.approx(chord, rel=1e-9)
    assert chord == pytest.approx(5.176, abs=1e-3)


def test_select_best_single_navigable():
    nav = np.array([0, 0, 1], dtype=np.int8)
    cost = np.array([0.0, 0.1, 99.0])
    assert h.select_best(nav, cost) == 2


def test_select_best_scaling_invariance():
    rng = np.random.default_rng(4)
    online = OnlineParams(
        clearance_weight=1.0,
        clutter_weight=1.0,
        closeness_weight=1.0,
        smoothness_weight=1.0,
    )
    for _ in range(30):
        n = int(rng.integers(2, 12))
        clear = rng.uniform(0, 1, n)
        clut = rng.uniform(0, 1, n)
        close = rng.uniform(0, 20, n)
        smo = rng.uniform(0, 5, n)
        nav = rng.choice([1, -1], n).astype(np.int8)
        cost, _, _ = h.compute_costs(clear, clut, close, smo, online)
        scaled = OnlineParams(
            clearance_weight=3.7,
            clutter_weight=3.7,
            closeness_weight=3.7,
            smoothness_weight=3.7,
        )
        cost_scaled, _, _ = h.compute_costs(clear, clut, close, smo, scaled)
        assert h.select_best(nav, cost) == h.select_best(nav, cost_scaled)


def test_select_best_brute_force_fixture():
    online = OnlineParams(
        clearance_weight=1.0,
        clutter_weight=1.0,
        closeness_weight=1.0,
        smoothness_weight=1.0,
    )
    clear = np.array([0.2, 0.5, 0.0])
    clut = np.array([0.3, 0.1, 0.2])
    close = np.array([4.0, 2.0, 6.0])
    smo = np.array([0.0, 1.0, 2.0])
    nav = np.array([1, -1, 1], dtype=np.int8)
    cost, close_n, smo_n = h.compute_costs(clear, clut, close, smo, online)
    # hand evaluation: close_n = (0.5, 0.0, 1.0), smo_n = (0.0, 0.5, 1.0)
    expected = [
        0.2 + 0.3 + 0.5 + 0.0,
        0.5 + 0.1 + 0.0 + 0.5,
        0.0 + 0.2 + 1.0 + 1.0,
    ]
    assert np.allclose(cost, expected)
    assert h.select_best(nav, cost) == int(np.argmin(expected))


def test_select_best_never_returns_non_navigable():
    rng = np.random.default_rng(17)
    for _ in range(200):
        n = int(rng.integers(1, 9))
        nav = rng.choice([1, 0, -1], n).astype(np.int8)
        cost = rng.uniform(0, 5, n)
        best = h.select_best(nav, cost)
        if best is None:
            assert (nav == 0).all()
        else:
            assert nav[best] != 0
            eligible = nav != 0
            assert cost[best] == cost[eligible].min()


def test_select_best_tie_prefers_previous():
    nav = np.array([1, 1, 1], dtype=np.int8)
    cost = np.array([1.0, 1.0, 2.0])
    assert h.select_best(nav, cost, previous_best=1) == 1
    assert h.select_best(nav, cost, previous_best=2) == 0
    assert h.select_best(nav, cost, previous_best=None) == 0


def test_normalize_degenerate_column_is_zero():
    assert not h.normalize(np.full(5, 3.3)).any()
    values = h.normalize(np.array([2.0, 4.0, 3.0]))
    assert values.min() == 0.0 and values.max() == 1.0


def test_score_all_matches_per_tentacle_path(small_bank):
    rng = np.random.default_rng(23)
    online = OnlineParams(crash_distance_scale=3.0)
    pose = RigidTransform.from_pose((0.4, -0.2, 0.1), yaw=0.3, pitch=-0.1)
    goal = (5.0, 1.0, 0.5)
    for trial in range(5):
        grid = OccupancyGrid(small_bank.spec)
        occupied = rng.choice(
            small_bank.spec.n_cells, size=rng.integers(50, 400), replace=False
        )
        grid.belief[occupied] = rng.uniform(0.05, 1.0, occupied.size)
        previous = None if trial == 0 else int(rng.integers(0, len(small_bank)))
        table = h.score_all(
            small_bank, grid, pose, goal, online, previous_best=previous
        )
        clear = np.empty(len(small_bank))
        clut = np.empty(len(small_bank))
        close = np.empty(len(small_bank))
        smo = np.empty(len(small_bank))
        nav = np.empty(len(small_bank), dtype=np.int8)
        prev_tentacle = None if previous is None else small_bank.tentacles[previous]
        for j, (tentacle, voxels) in enumerate(
            zip(small_bank.tentacles, small_bank.classified)
        ):
            bins = h.bin_occupancy(voxels, grid, small_bank.n_samples)
            nav[j], l_obs = h.navigability(
                bins, online, small_bank.length, small_bank.n_samples
            )
            clear[j] = h.clearance(l_obs, small_bank.length)
            clut[j] = h.clutter(bins)
            close[j] = h.goal_closeness(tentacle, pose, goal)
            smo[j] = h.smoothness(tentacle, prev_tentacle)
            assert l_obs == pytest.approx(table.obstacle_distance[j], rel=1e-12)
        cost, _, _ = h.compute_costs(clear, clut, close, smo, online)
        assert np.array_equal(nav, table.navigability)
        assert np.allclose(clear, table.clearance, rtol=1e-12, atol=1e-12)
        assert np.allclose(clut, table.clutter, rtol=1e-12, atol=1e-12)
        assert np.allclose(close, table.closeness_raw, rtol=1e-12, atol=1e-12)
        assert np.allclose(smo, table.smoothness_raw, rtol=1e-12, atol=1e-12)
        assert np.allclose(cost, table.cost, rtol=1e-12, atol=1e-12)
        assert table.best == h.select_best(nav, cost, previous)


def test_ternary_exclusivity_and_range_invariants(small_bank):
    rng = np.random.default_rng(31)
    online = OnlineParams(crash_distance_scale=4.0)
    pose = RigidTransform.identity()
    for _ in range(50):
        grid = OccupancyGrid(small_bank.spec)
        occupied = rng.choice(
            small_bank.spec.n_cells, size=rng.integers(0, 600), replace=False
        )
        grid.belief[occupied] = rng.uniform(0.0, 1.0, occupied.size)
        table = h.score_all(small_bank, grid, pose, (3.0, 0.0, 0.0), online)
        assert set(np.unique(table.navigability)) <= {-1, 0, 1}
        assert (table.clearance >= 0.0).all() and (table.clearance <= 1.0).all()
        assert (table.clutter >= 0.0).all() and (table.clutter <= 1.0).all()
        navigable = table.navigability == h.NAVIGABLE
        assert np.array_equal(navigable, table.clearance == 0.0)
        if table.best is not None:
            assert table.navigability[table.best] != h.NON_NAVIGABLE


def test_score_all_deterministic(small_bank):
    online = OnlineParams()
    rng = np.random.default_rng(2)
    grid = OccupancyGrid(small_bank.spec)
    occupied = rng.choice(small_bank.spec.n_cells, 200, replace=False)
    grid.belief[occupied] = 0.8
    pose = RigidTransform.from_pose((0.1, 0.2, 0.0), yaw=0.1)
    t1 = h.score_all(small_bank, grid, pose, (4.0, 0.0, 0.0), online, previous_best=3)
    t2 = h.score_all(small_bank, grid, pose, (4.0, 0.0, 0.0), online, previous_best=3)
    assert np.array_equal(t1.cost, t2.cost)
    assert t1.best == t2.best
