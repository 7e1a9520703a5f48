"""Compare the jit and numpy kernel backends on the two hot paths.

Times grid traversal (the visibility inner loop) and ray/box first-hit
scanning (the occlusion inner loop) on synthetic workloads, then one
full pipeline run for scale. Run from the repo root:

    python3 benchmarks/kernel_benchmark.py --repeats 5
"""

import argparse
import math
import os
import statistics
import time

import numpy as np

# backend choice is read per call, so one process can measure both
os.environ.setdefault("VANTAGE_NUMBA", "1")

from vantage import (
    InfrastructureUnit, Lane, LidarSpec, Placement, Pose, Region, RegionKind,
    RoiSpec, VectorMap, build_roi, evaluate,
)
from vantage.kernels import active, first_hits_from, traverse_bundle


def make_grid(radius, edge):
    square = np.array([[-radius - 2, -radius - 2], [radius + 2, -radius - 2],
                       [radius + 2, radius + 2], [-radius - 2, radius + 2]],
                      float)
    xs = np.arange(-radius, radius + 1e-9, 4.0)
    wps = np.column_stack([xs, np.zeros_like(xs), np.zeros_like(xs)])
    vmap = VectorMap(name="bench", center=(0.0, 0.0),
                     regions=[Region("all", RegionKind.JUNCTION, square)],
                     lanes=[Lane("main", wps, 4.0)])
    return vmap, build_roi(vmap, RoiSpec(center=(0.0, 0.0), radius=radius,
                                         voxel_edge=edge,
                                         core_radius=radius / 2))


def make_rays(rng, n, radius):
    origins = np.repeat([[0.0, 0.0, 6.0]], n, axis=0)
    dirs = rng.normal(size=(n, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    t = np.full(n, 2.5 * radius)
    return origins, dirs, t


def make_boxes(rng, n):
    boxes = np.empty((n, 9))
    boxes[:, 0:2] = rng.uniform(-40, 40, (n, 2))
    boxes[:, 2] = 1.3
    heading = rng.uniform(-math.pi, math.pi, n)
    boxes[:, 3] = np.cos(heading)
    boxes[:, 4] = np.sin(heading)
    boxes[:, 5] = 0.0
    boxes[:, 6:9] = (2.3, 0.9, 0.8)
    return boxes


def timed(fn, repeats):
    fn()  # warm (jit compile on first touch)
    samples = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    return statistics.mean(samples), statistics.stdev(samples) \
        if repeats > 1 else 0.0


def run_backend(flag, args):
    os.environ["VANTAGE_NUMBA"] = flag
    name = active().BACKEND_NAME
    rng = np.random.default_rng(args.seed)
    vmap, grid = make_grid(args.radius, args.edge)
    origins, dirs, t = make_rays(rng, args.rays, args.radius)
    g0 = np.asarray(grid.origin)
    boxes = make_boxes(rng, args.boxes)

    rows = []
    mean, std = timed(lambda: traverse_bundle(origins, dirs, t, g0,
                                              grid.edge, grid.dims),
                      args.repeats)
    rows.append(("traverse_bundle", f"{args.rays} rays", mean, std))

    mean, std = timed(lambda: first_hits_from(origins[0], dirs, t[0], boxes),
                      args.repeats)
    rows.append(("first_hits_from", f"{args.rays}x{args.boxes}", mean, std))

    lidar = LidarSpec(id="l0", pose=Pose((0.0, 0.0, 6.0), pitch=-0.2),
                      v_fov=math.radians(40), azimuth_steps=360,
                      elevation_steps=32, max_range=2.5 * args.radius)
    placement = Placement(ius=(InfrastructureUnit("u0", (lidar,), "p0"),))
    roi = RoiSpec(center=(0.0, 0.0), radius=args.radius,
                  voxel_edge=args.edge, core_radius=args.radius / 2)
    mean, std = timed(lambda: evaluate(vmap, roi, placement, base_grid=grid),
                      max(2, args.repeats // 2))
    rows.append(("evaluate", "360x32 lidar", mean, std))

    print(f"\nbackend: {name}")
    for label, size, m, s in rows:
        print(f"  {label:16s} {size:14s} {m * 1e3:9.2f} ms +/- "
              f"{s * 1e3:6.2f}")
    return name, rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rays", type=int, default=20000)
    ap.add_argument("--boxes", type=int, default=120)
    ap.add_argument("--radius", type=float, default=50.0)
    ap.add_argument("--edge", type=float, default=0.5)
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    results = {}
    for flag in ("1", "0"):
        name, rows = run_backend(flag, args)
        results[name] = {label: m for label, _, m, _ in rows}

    if len(results) == 2:
        jit, plain = results.get("numba"), results.get("numpy")
        if jit and plain:
            print("\nspeedup (numpy / numba):")
            for label in jit:
                print(f"  {label:16s} {plain[label] / jit[label]:6.1f}x")


if __name__ == "__main__":
    main()
