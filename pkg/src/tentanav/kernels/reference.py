"""Numpy implementations of the hot-path kernels.

Semantics are kept in lockstep with the compiled backend: identical
iteration order, identical boundary comparisons (squared distances against
squared thresholds), first-occurrence argmin ties. The equivalence suite
in tests/test_kernels.py holds both backends to that.
"""

from __future__ import annotations

import math

import numpy as np


def accumulate_points(coords, weights, nx, ny, nz, voxel_dim, belief_sum, counts):
    """Scatter robot-frame points into the linear grid accumulators.

    coords: (N, 3) float64 robot-frame positions; weights: (N,) belief per
    point. Adds into belief_sum (float64, nx*ny*nz) and counts (int64).
    Out-of-bounds points are dropped. Returns the number accumulated.
    """
    coords = np.asarray(coords, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    if coords.size == 0:
        return 0
    half = np.array([nx // 2, ny // 2, nz // 2], dtype=np.float64)
    cells = np.floor(coords / voxel_dim) + half
    limits = np.array([nx, ny, nz], dtype=np.float64)
    in_bounds = np.all((cells >= 0.0) & (cells < limits), axis=1)
    cells = cells[in_bounds].astype(np.int64)
    flat = cells[:, 0] + cells[:, 1] * nx + cells[:, 2] * (nx * ny)
    n_cells = nx * ny * nz
    # unbuffered scatter-add for sparse scans; full-width bincount only when
    # the point count rivals the grid size (same accumulation order either way)
    if flat.size * 8 < n_cells:
        np.add.at(belief_sum, flat, weights[in_bounds])
        np.add.at(counts, flat, 1)
    else:
        belief_sum += np.bincount(flat, weights=weights[in_bounds], minlength=n_cells)
        counts += np.bincount(flat, minlength=n_cells)
    return int(flat.size)


def classify_cells(
    samples,
    nx,
    ny,
    nz,
    voxel_dim,
    priority_distance,
    support_distance,
    max_weight,
    weight_scale,
):
    """Extract one tentacle's priority/support voxels from the grid lattice.

    Scans an axis-aligned bounding box inflated by the support distance
    around the sampling points; a voxel belongs to the tentacle when its
    center lies within the support distance of the closest sampling point.
    Returns (cell_index int64, weight float64, closest_sample int32,
    is_priority uint8) sorted by ascending cell index.
    """
    samples = np.asarray(samples, dtype=np.float64)
    n_samples = samples.shape[0]
    half = (nx // 2, ny // 2, nz // 2)
    counts = (nx, ny, nz)
    lo_idx = []
    hi_idx = []
    for axis in range(3):
        lo = samples[:, axis].min() - support_distance
        hi = samples[:, axis].max() + support_distance
        # voxel centers sit at (i - n//2 + 0.5) * voxel_dim; the extra +-1
        # cell absorbs float rounding (excess cells fail the distance test)
        i0 = math.ceil(lo / voxel_dim + half[axis] - 0.5) - 1
        i1 = math.floor(hi / voxel_dim + half[axis] - 0.5) + 1
        lo_idx.append(max(i0, 0))
        hi_idx.append(min(i1, counts[axis] - 1))
    empty = (
        np.empty(0, dtype=np.int64),
        np.empty(0, dtype=np.float64),
        np.empty(0, dtype=np.int32),
        np.empty(0, dtype=np.uint8),
    )
    if any(lo_idx[a] > hi_idx[a] for a in range(3)):
        return empty

    ix = np.arange(lo_idx[0], hi_idx[0] + 1, dtype=np.int64)
    iy = np.arange(lo_idx[1], hi_idx[1] + 1, dtype=np.int64)
    iz = np.arange(lo_idx[2], hi_idx[2] + 1, dtype=np.int64)
    cx = (ix - half[0] + 0.5) * voxel_dim
    cy = (iy - half[1] + 0.5) * voxel_dim
    cz = (iz - half[2] + 0.5) * voxel_dim

    dx2 = (cx[:, None] - samples[None, :, 0]) ** 2
    dy2 = (cy[:, None] - samples[None, :, 1]) ** 2
    dz2 = (cz[:, None] - samples[None, :, 2]) ** 2

    tau_p2 = priority_distance * priority_distance
    tau_s2 = support_distance * support_distance

    out_o = []
    out_w = []
    out_s = []
    out_c = []
    # chunk along z to bound the (z, y, x, sample) distance tensor
    max_elems = 4_000_000
    plane = len(iy) * len(ix) * n_samples
    z_step = max(1, max_elems // max(plane, 1))
    o_y = iy * nx
    for z0 in range(0, len(iz), z_step):
        z1 = min(z0 + z_step, len(iz))
        d2 = (
            dz2[z0:z1, None, None, :]
            + dy2[None, :, None, :]
            + dx2[None, None, :, :]
        )
        closest = np.argmin(d2, axis=3)
        d2_min = np.take_along_axis(d2, closest[..., None], axis=3)[..., 0]
        mask = d2_min < tau_s2
        if not mask.any():
            continue
        o_grid = (
            iz[z0:z1, None, None] * (nx * ny) + o_y[None, :, None] + ix[None, None, :]
        )
        o_sel = np.broadcast_to(o_grid, mask.shape)[mask]
        d2_sel = d2_min[mask]
        s_sel = closest[mask].astype(np.int32)
        is_priority = d2_sel < tau_p2
        weight = np.full(d2_sel.shape, max_weight, dtype=np.float64)
        support = ~is_priority
        weight[support] = max_weight / (weight_scale * np.sqrt(d2_sel[support]))
        out_o.append(o_sel)
        out_w.append(weight)
        out_s.append(s_sel)
        out_c.append(is_priority.astype(np.uint8))
    if not out_o:
        return empty
    return (
        np.concatenate(out_o),
        np.concatenate(out_w),
        np.concatenate(out_s),
        np.concatenate(out_c),
    )


def update_occupancy(
    belief, offsets, cell_index, cell_weight, closest_sample, cell_class, n_samples
):
    """Project grid occupancy onto every tentacle's sampling points.

    Flat per-bank arrays are segmented by ``offsets`` (length n_tentacles+1).
    Returns (hist int64 (n_tentacles, n_samples), occupied_weight float64
    (n_tentacles,)): hist[j, k] counts occupied priority voxels whose
    closest sample on tentacle j is k; occupied_weight[j] is the
    belief-weighted sum over all of tentacle j's voxels.
    """
    offsets = np.asarray(offsets, dtype=np.int64)
    n_tentacles = offsets.size - 1
    hist = np.zeros((n_tentacles, n_samples), dtype=np.int64)
    occupied_weight = np.zeros(n_tentacles, dtype=np.float64)
    if cell_index.size == 0:
        return hist, occupied_weight
    values = belief[cell_index]
    # zero-belief rows contribute exactly +0.0, so summing only the occupied
    # rows (in order) reproduces the dense sequential accumulation bit for bit
    rows = np.flatnonzero(values > 0.0)
    if rows.size == 0:
        return hist, occupied_weight
    tids = np.searchsorted(offsets, rows, side="right") - 1
    weighted = cell_weight[rows] * values[rows]
    occupied_weight += np.bincount(tids, weights=weighted, minlength=n_tentacles)
    priority = cell_class[rows] == 1
    if priority.any():
        keys = tids[priority] * n_samples + closest_sample[rows[priority]]
        hist += np.bincount(keys, minlength=n_tentacles * n_samples).reshape(
            n_tentacles, n_samples
        )
    return hist, occupied_weight
