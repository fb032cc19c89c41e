"""Backend parity: the compiled and pure kernels must agree exactly."""

import os
import subprocess
import sys

import numpy as np
import pytest

from shelfplan import kernels
from shelfplan.kernels import pure
from shelfplan.scene import generate_scene

native = pytest.importorskip("shelfplan.kernels._native",
                             reason="compiled kernels not built")


def scene_arrays(scene):
    n = len(scene.boxes)
    centers = np.array([b.center for b in scene.boxes], dtype=np.float64).reshape(n, 3)
    dims = np.array([b.dims for b in scene.boxes], dtype=np.float64).reshape(n, 3)
    rank_of = {bid: r for r, bid in enumerate(sorted(scene.ids))}
    id_rank = np.array([rank_of[b] for b in scene.ids], dtype=np.int64)
    return centers, dims, id_rank


def kernel_args(scene):
    cfg = scene.config
    return (cfg.contact_tolerance, cfg.min_overlap_area, cfg.stability_margin,
            scene.shelf.width_x, scene.shelf.depth_y)


@pytest.mark.parametrize("seed", range(10))
def test_box_patches_identical(seed):
    scene = generate_scene(seed, 2 + seed)
    centers, dims, _ = scene_arrays(scene)
    cfg = scene.config
    args = (cfg.contact_tolerance, cfg.min_overlap_area,
            scene.shelf.width_x, scene.shelf.depth_y)
    assert native.box_patches(centers, dims, *args) == pure.box_patches(centers, dims, *args)


@pytest.mark.parametrize("seed", range(10))
def test_settle_cascade_identical(seed):
    scene = generate_scene(seed, 3 + seed % 8)
    centers, dims, id_rank = scene_arrays(scene)
    n = len(scene.boxes)
    rng = np.random.RandomState(seed)
    for _ in range(5):
        active = (rng.uniform(size=n) > 0.3).astype(np.uint8)
        got_native = native.settle_cascade(centers, dims, id_rank, active,
                                           *kernel_args(scene))
        got_pure = pure.settle_cascade(centers, dims, id_rank, active,
                                       *kernel_args(scene))
        assert list(got_native) == list(got_pure)


@pytest.mark.parametrize("seed", range(10))
def test_probe_all_identical(seed):
    scene = generate_scene(seed, 2 + seed)
    centers, dims, id_rank = scene_arrays(scene)
    got_native = native.probe_all(centers, dims, id_rank, *kernel_args(scene))
    got_pure = pure.probe_all(centers, dims, id_rank, *kernel_args(scene))
    assert [list(r) for r in got_native] == [list(r) for r in got_pure]


@pytest.mark.parametrize("seed", range(10))
def test_dbscan_labels_identical(seed):
    rng = np.random.RandomState(seed)
    blobs = [rng.normal(rng.uniform(-1, 1, 3), 0.02, (rng.randint(10, 150), 3))
             for _ in range(rng.randint(1, 5))]
    pts = np.vstack(blobs + [rng.uniform(-1.5, 1.5, (30, 3))])
    eps = float(rng.uniform(0.02, 0.08))
    min_pts = int(rng.randint(2, 10))
    a = native.dbscan_labels(pts, eps, min_pts)
    b = pure.dbscan_labels(pts, eps, min_pts)
    assert np.array_equal(np.asarray(a), np.asarray(b))


def test_read_only_arrays_accepted():
    scene = generate_scene(1, 4)
    centers, dims, id_rank = scene_arrays(scene)
    for arr in (centers, dims, id_rank):
        arr.setflags(write=False)
    active = np.ones(4, dtype=np.uint8)
    active.setflags(write=False)
    native.settle_cascade(centers, dims, id_rank, active, *kernel_args(scene))


def test_env_var_forces_pure_backend():
    env = dict(os.environ, SHELFPLAN_PURE_KERNELS="1")
    out = subprocess.run(
        [sys.executable, "-c",
         "from shelfplan import kernels; print(kernels.active_backend())"],
        capture_output=True, text=True, env=env, check=True,
    )
    assert out.stdout.strip() == "pure"


def test_selected_backend_reported():
    assert kernels.active_backend() in ("native", "pure")
    assert kernels.native_available()
