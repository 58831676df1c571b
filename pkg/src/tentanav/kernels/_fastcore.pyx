# Compiled twin of kernels/reference.py. Iteration order, boundary
# comparisons (squared distances vs squared thresholds) and argmin tie
# handling must stay identical to the numpy backend; the distance sum is
# accumulated z, y, x to match the reference broadcast order.

import numpy as np

cimport numpy as cnp
from libc.math cimport ceil, floor, sqrt

cnp.import_array()


def accumulate_points(
    double[:, ::1] coords,
    double[::1] weights,
    Py_ssize_t nx,
    Py_ssize_t ny,
    Py_ssize_t nz,
    double voxel_dim,
    double[::1] belief_sum,
    long long[::1] counts,
):
    """Scatter robot-frame points into the linear grid accumulators."""
    cdef Py_ssize_t n = coords.shape[0]
    cdef Py_ssize_t i, accepted = 0
    cdef double hx = <double> (nx // 2)
    cdef double hy = <double> (ny // 2)
    cdef double hz = <double> (nz // 2)
    cdef double cx, cy, cz
    cdef Py_ssize_t flat
    with nogil:
        for i in range(n):
            cx = floor(coords[i, 0] / voxel_dim) + hx
            cy = floor(coords[i, 1] / voxel_dim) + hy
            cz = floor(coords[i, 2] / voxel_dim) + hz
            if cx >= 0.0 and cx < nx and cy >= 0.0 and cy < ny and cz >= 0.0 and cz < nz:
                flat = <Py_ssize_t> cx + (<Py_ssize_t> cy) * nx + (<Py_ssize_t> cz) * nx * ny
                belief_sum[flat] += weights[i]
                counts[flat] += 1
                accepted += 1
    return accepted


def classify_cells(
    double[:, ::1] samples,
    Py_ssize_t nx,
    Py_ssize_t ny,
    Py_ssize_t nz,
    double voxel_dim,
    double priority_distance,
    double support_distance,
    double max_weight,
    double weight_scale,
):
    """Extract one tentacle's priority/support voxels from the grid lattice."""
    cdef Py_ssize_t n_samples = samples.shape[0]
    cdef Py_ssize_t half[3]
    cdef Py_ssize_t limit[3]
    half[0] = nx // 2
    half[1] = ny // 2
    half[2] = nz // 2
    limit[0] = nx
    limit[1] = ny
    limit[2] = nz

    cdef Py_ssize_t lo_idx[3]
    cdef Py_ssize_t hi_idx[3]
    cdef Py_ssize_t axis, k
    cdef double lo, hi
    for axis in range(3):
        lo = samples[0, axis]
        hi = samples[0, axis]
        for k in range(1, n_samples):
            if samples[k, axis] < lo:
                lo = samples[k, axis]
            if samples[k, axis] > hi:
                hi = samples[k, axis]
        lo -= support_distance
        hi += support_distance
        # voxel centers sit at (i - n//2 + 0.5) * voxel_dim; +-1 cell of
        # slack absorbs float rounding (excess cells fail the distance test)
        lo_idx[axis] = <Py_ssize_t> ceil(lo / voxel_dim + half[axis] - 0.5) - 1
        hi_idx[axis] = <Py_ssize_t> floor(hi / voxel_dim + half[axis] - 0.5) + 1
        if lo_idx[axis] < 0:
            lo_idx[axis] = 0
        if hi_idx[axis] > limit[axis] - 1:
            hi_idx[axis] = limit[axis] - 1

    empty = (
        np.empty(0, dtype=np.int64),
        np.empty(0, dtype=np.float64),
        np.empty(0, dtype=np.int32),
        np.empty(0, dtype=np.uint8),
    )
    if lo_idx[0] > hi_idx[0] or lo_idx[1] > hi_idx[1] or lo_idx[2] > hi_idx[2]:
        return empty

    cdef Py_ssize_t capacity = (
        (hi_idx[0] - lo_idx[0] + 1)
        * (hi_idx[1] - lo_idx[1] + 1)
        * (hi_idx[2] - lo_idx[2] + 1)
    )
    o_arr = np.empty(capacity, dtype=np.int64)
    w_arr = np.empty(capacity, dtype=np.float64)
    s_arr = np.empty(capacity, dtype=np.int32)
    c_arr = np.empty(capacity, dtype=np.uint8)
    cdef long long[::1] o_view = o_arr
    cdef double[::1] w_view = w_arr
    cdef int[::1] s_view = s_arr
    cdef unsigned char[::1] c_view = c_arr

    cdef double tau_p2 = priority_distance * priority_distance
    cdef double tau_s2 = support_distance * support_distance
    cdef Py_ssize_t ix, iy, iz, best_k, m = 0
    cdef double px, py, pz, dx, dy, dz, d2, best_d2
    with nogil:
        for iz in range(lo_idx[2], hi_idx[2] + 1):
            pz = (iz - half[2] + 0.5) * voxel_dim
            for iy in range(lo_idx[1], hi_idx[1] + 1):
                py = (iy - half[1] + 0.5) * voxel_dim
                for ix in range(lo_idx[0], hi_idx[0] + 1):
                    px = (ix - half[0] + 0.5) * voxel_dim
                    best_d2 = -1.0
                    best_k = 0
                    for k in range(n_samples):
                        dx = px - samples[k, 0]
                        dy = py - samples[k, 1]
                        dz = pz - samples[k, 2]
                        d2 = dz * dz + dy * dy + dx * dx
                        if best_d2 < 0.0 or d2 < best_d2:
                            best_d2 = d2
                            best_k = k
                    if best_d2 < tau_s2:
                        o_view[m] = ix + iy * nx + iz * nx * ny
                        s_view[m] = <int> best_k
                        if best_d2 < tau_p2:
                            w_view[m] = max_weight
                            c_view[m] = 1
                        else:
                            w_view[m] = max_weight / (weight_scale * sqrt(best_d2))
                            c_view[m] = 0
                        m += 1
    return (
        o_arr[:m].copy(),
        w_arr[:m].copy(),
        s_arr[:m].copy(),
        c_arr[:m].copy(),
    )


def update_occupancy(
    double[::1] belief,
    long long[::1] offsets,
    long long[::1] cell_index,
    double[::1] cell_weight,
    int[::1] closest_sample,
    unsigned char[::1] cell_class,
    Py_ssize_t n_samples,
):
    """Project grid occupancy onto every tentacle's sampling points."""
    cdef Py_ssize_t n_tentacles = offsets.shape[0] - 1
    hist_arr = np.zeros((n_tentacles, n_samples), dtype=np.int64)
    occ_arr = np.zeros(n_tentacles, dtype=np.float64)
    cdef long long[:, ::1] hist = hist_arr
    cdef double[::1] occ = occ_arr
    cdef Py_ssize_t t, i
    cdef double value, acc
    with nogil:
        for t in range(n_tentacles):
            acc = 0.0
            for i in range(offsets[t], offsets[t + 1]):
                value = belief[cell_index[i]]
                acc += cell_weight[i] * value
                if cell_class[i] == 1 and value > 0.0:
                    hist[t, closest_sample[i]] += 1
            occ[t] = acc
    return hist_arr, occ_arr
