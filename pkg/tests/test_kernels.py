from __future__ import annotations

import math

import numpy as np
import pytest

from tentanav import kernels

BACKENDS = kernels.available_backends()
pairwise = pytest.mark.skipif(
    len(BACKENDS) < 2, reason="compiled backend not built; nothing to compare"
)


def test_backend_reported():
    assert kernels.BACKEND in ("numpy", "compiled")
    assert "numpy" in BACKENDS


def test_backend_module_lookup_errors():
    with pytest.raises(ValueError, match="unknown"):
        kernels.backend_module("fortran")


def _random_instance(rng):
    counts = tuple(int(rng.integers(4, 20)) for _ in range(3))
    voxel_dim = float(rng.uniform(0.1, 0.8))
    n_samples = int(rng.integers(2, 12))
    length = float(rng.uniform(0.5, 4.0))
    yaw = float(rng.uniform(-math.pi, math.pi))
    pitch = float(rng.uniform(-0.8, 0.8))
    direction = np.array(
        [
            math.cos(yaw) * math.cos(pitch),
            math.sin(yaw) * math.cos(pitch),
            math.sin(pitch),
        ]
    )
    steps = np.arange(1, n_samples + 1) * (length / n_samples)
    samples = np.ascontiguousarray(steps[:, None] * direction[None, :])
    tau_p = float(rng.uniform(0.1, 0.5))
    tau_s = tau_p + float(rng.uniform(0.1, 0.8))
    scale = float(rng.uniform(1.0, 3.0)) / tau_p
    return counts, voxel_dim, samples, tau_p, tau_s, scale


@pairwise
def test_classify_cells_backends_agree():
    rng = np.random.default_rng(101)
    ref = kernels.backend_module("numpy")
    fast = kernels.backend_module("compiled")
    for _ in range(40):
        counts, voxel_dim, samples, tau_p, tau_s, scale = _random_instance(rng)
        args = (samples, *counts, voxel_dim, tau_p, tau_s, 1.0, scale)
        o1, w1, s1, c1 = ref.classify_cells(*args)
        o2, w2, s2, c2 = fast.classify_cells(*args)
        assert np.array_equal(o1, o2)
        assert np.array_equal(s1, s2)
        assert np.array_equal(c1, c2)
        assert np.allclose(w1, w2, rtol=1e-14, atol=0.0)


@pairwise
def test_accumulate_points_backends_agree():
    rng = np.random.default_rng(55)
    ref = kernels.backend_module("numpy")
    fast = kernels.backend_module("compiled")
    for _ in range(20):
        counts = tuple(int(rng.integers(2, 16)) for _ in range(3))
        voxel_dim = float(rng.uniform(0.1, 1.0))
        n = int(rng.integers(0, 500))
        span = max(counts) * voxel_dim
        pts = np.ascontiguousarray(rng.uniform(-span, span, (n, 3)))
        weights = np.ascontiguousarray(rng.uniform(0, 1, n))
        n_cells = counts[0] * counts[1] * counts[2]
        s1 = np.zeros(n_cells)
        c1 = np.zeros(n_cells, dtype=np.int64)
        s2 = np.zeros(n_cells)
        c2 = np.zeros(n_cells, dtype=np.int64)
        n1 = ref.accumulate_points(pts, weights, *counts, voxel_dim, s1, c1)
        n2 = fast.accumulate_points(pts, weights, *counts, voxel_dim, s2, c2)
        assert n1 == n2
        assert np.array_equal(c1, c2)
        assert np.allclose(s1, s2, rtol=1e-14, atol=0.0)


@pairwise
def test_update_occupancy_backends_agree():
    rng = np.random.default_rng(77)
    ref = kernels.backend_module("numpy")
    fast = kernels.backend_module("compiled")
    for _ in range(20):
        n_cells = int(rng.integers(50, 2000))
        n_tentacles = int(rng.integers(1, 8))
        n_samples = int(rng.integers(2, 15))
        seg_lens = rng.integers(0, 60, n_tentacles)
        offsets = np.zeros(n_tentacles + 1, dtype=np.int64)
        np.cumsum(seg_lens, out=offsets[1:])
        total = int(offsets[-1])
        cell_index = rng.integers(0, n_cells, total).astype(np.int64)
        weight = np.ascontiguousarray(rng.uniform(0.01, 1.0, total))
        closest = rng.integers(0, n_samples, total).astype(np.int32)
        clazz = rng.integers(0, 2, total).astype(np.uint8)
        belief = np.zeros(n_cells)
        occupied = rng.integers(0, n_cells, n_cells // 4)
        belief[occupied] = rng.uniform(0, 1, occupied.size)
        args = (belief, offsets, cell_index, weight, closest, clazz, n_samples)
        h1, w1 = ref.update_occupancy(*args)
        h2, w2 = fast.update_occupancy(*args)
        assert np.array_equal(h1, h2)
        assert np.allclose(w1, w2, rtol=1e-12, atol=1e-12)


def test_forced_backend_env(tmp_path, monkeypatch):
    # a subprocess import honors TENTANAV_KERNELS=numpy
    import subprocess
    import sys

    code = "import tentanav.kernels as k; print(k.BACKEND)"
    out = subprocess.run(
        [sys.executable, "-c", code],
        env={"TENTANAV_KERNELS": "numpy", "PATH": "/usr/bin:/bin"},
        capture_output=True,
        text=True,
        cwd="/root/pkg",
    )
    assert out.stdout.strip() == "numpy"

    out = subprocess.run(
        [sys.executable, "-c", code],
        env={"TENTANAV_KERNELS": "bogus", "PATH": "/usr/bin:/bin"},
        capture_output=True,
        text=True,
        cwd="/root/pkg",
    )
    assert out.returncode != 0
