"""Benchmark the compiled kernels against the pure-Python fallback.

Times the two hot paths (removal probing for graph construction, and
density clustering) on growing inputs and prints a comparison table::

    python benchmarks/bench_kernels.py
"""

from __future__ import annotations

import time

import numpy as np

from shelfplan.kernels import pure
from shelfplan.scene import SceneConfig, ShelfSpec, generate_scene

try:
    from shelfplan.kernels import _native as native
except ImportError:
    native = None

BENCH_SHELF = ShelfSpec(width_x=3.0, depth_y=2.0, height_z=2.5)


def best_of(fn, repeats=3):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def scene_inputs(n_boxes):
    scene = generate_scene(seed=n_boxes, n_boxes=n_boxes, shelf=BENCH_SHELF,
                           max_attempts=2000)
    centers = np.array([b.center for b in scene.boxes])
    dims = np.array([b.dims for b in scene.boxes])
    rank_of = {bid: r for r, bid in enumerate(sorted(scene.ids))}
    id_rank = np.array([rank_of[b] for b in scene.ids], dtype=np.int64)
    cfg = SceneConfig()
    args = (cfg.contact_tolerance, cfg.min_overlap_area, cfg.stability_margin,
            scene.shelf.width_x, scene.shelf.depth_y)
    return centers, dims, id_rank, args


def cloud_inputs(n_points):
    rng = np.random.RandomState(n_points)
    blobs = [rng.normal(rng.uniform(-1, 1, 3), 0.02, (n_points // 10, 3))
             for _ in range(10)]
    return np.ascontiguousarray(np.vstack(blobs)[:n_points])


def run_probe(backend, inputs):
    centers, dims, id_rank, args = inputs
    return lambda: backend.probe_all(centers, dims, id_rank, *args)


def run_dbscan(backend, pts):
    return lambda: backend.dbscan_labels(pts, 0.03, 8)


def main():
    rows = []
    for n in (20, 60, 120, 200):
        inputs = scene_inputs(n)
        t_pure = best_of(run_probe(pure, inputs))
        t_native = best_of(run_probe(native, inputs)) if native else float("nan")
        rows.append((f"probe_all ({n} boxes)", t_pure, t_native))
    for n in (500, 2000, 8000):
        pts = cloud_inputs(n)
        t_pure = best_of(run_dbscan(pure, pts))
        t_native = best_of(run_dbscan(native, pts)) if native else float("nan")
        rows.append((f"dbscan ({n} points)", t_pure, t_native))

    width = max(len(r[0]) for r in rows)
    print(f"{'task':<{width}}  {'pure (s)':>10}  {'native (s)':>10}  {'speedup':>8}")
    for name, t_pure, t_native in rows:
        speedup = t_pure / t_native if t_native == t_native else float("nan")
        print(f"{name:<{width}}  {t_pure:>10.4f}  {t_native:>10.4f}  {speedup:>7.1f}x")
    if native is None:
        print("\ncompiled extension not built; native column is nan")


if __name__ == "__main__":
    main()
