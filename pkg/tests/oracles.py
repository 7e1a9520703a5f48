"""Independent brute-force references the engine is tested against.

Everything here is deliberately written with a different structure from the
package kernels: voxel membership via per-cube slab enumeration over the
whole grid (not ray walking), metrics via direct set algebra and plain
sums. Voxel cubes are treated as closed sets, segments as closed intervals
[0, t_max]; boundary or single-point contact counts as touching.

Plane coordinates are always formed as (g0 + index * edge) and parameters
as (plane - origin) / dir so that entry parameters are bit-comparable with
the engine's.
"""

from __future__ import annotations

import math

import numpy as np

INF = float("inf")


# ---------------------------------------------------------------------------
# exact segment / voxel-cube overlap enumeration


def segment_voxels_exact(origin, direction, t_max, g0, edge, dims):
    """All grid voxels the closed segment touches, with entry parameters.

    Returns dict {(ix, iy, iz): entry_t} where entry_t = max(t_near, 0).
    Enumerates every in-bounds cube and runs a closed slab test; O(nx*ny*nz)
    per ray, intended for grids around 16^3.
    """
    origin = np.asarray(origin, dtype=np.float64)
    direction = np.asarray(direction, dtype=np.float64)
    t_max = float(t_max)
    nx, ny, nz = (int(d) for d in dims)
    ii, jj, kk = np.meshgrid(
        np.arange(nx), np.arange(ny), np.arange(nz), indexing="ij"
    )
    idx = np.stack([ii.ravel(), jj.ravel(), kk.ravel()], axis=1)  # (m, 3)
    lo_planes = np.empty((idx.shape[0], 3), dtype=np.float64)
    hi_planes = np.empty_like(lo_planes)
    for a in range(3):
        lo_planes[:, a] = g0[a] + idx[:, a].astype(np.float64) * edge
        hi_planes[:, a] = g0[a] + (idx[:, a] + 1).astype(np.float64) * edge

    t_near = np.full(idx.shape[0], -INF)
    t_far = np.full(idx.shape[0], INF)
    ok = np.ones(idx.shape[0], dtype=bool)
    for a in range(3):
        d = direction[a]
        o = origin[a]
        if d == 0.0:
            ok &= (lo_planes[:, a] <= o) & (o <= hi_planes[:, a])
        else:
            ta = (lo_planes[:, a] - o) / d
            tb = (hi_planes[:, a] - o) / d
            lo = np.minimum(ta, tb)
            hi = np.maximum(ta, tb)
            t_near = np.maximum(t_near, lo)
            t_far = np.minimum(t_far, hi)
    entry = np.maximum(t_near, 0.0)
    ok &= entry <= np.minimum(t_far, t_max)
    out = {}
    for row, e_t in zip(idx[ok], entry[ok]):
        out[(int(row[0]), int(row[1]), int(row[2]))] = float(e_t)
    return out


def fine_sample_voxels(origin, direction, t_max, g0, edge, dims, step=None):
    """Voxels found by sampling points along the ray every `step` meters.

    Subset reference: can miss voxels whose chord is shorter than the step,
    so it is only valid as a "must be included" witness.
    """
    origin = np.asarray(origin, dtype=np.float64)
    direction = np.asarray(direction, dtype=np.float64)
    if step is None:
        step = edge / 100.0
    n = max(1, int(math.ceil(t_max / step)))
    ts = np.linspace(0.0, t_max, n + 1)
    pts = origin[None, :] + ts[:, None] * direction[None, :]
    rel = (pts - np.asarray(g0)[None, :]) / edge
    cell = np.floor(rel).astype(np.int64)
    inb = np.ones(cell.shape[0], dtype=bool)
    for a, na in enumerate(dims):
        inb &= (cell[:, a] >= 0) & (cell[:, a] < int(na))
    return {tuple(int(c) for c in row) for row in cell[inb]}


# ---------------------------------------------------------------------------
# oriented boxes

def box_tuple(cx, cy, cz, heading, hx, hy, hz):
    """Box as a plain tuple: center, yaw heading, half-extents."""
    return (float(cx), float(cy), float(cz), float(heading),
            float(hx), float(hy), float(hz))


def point_in_box(p, box) -> bool:
    """Closed containment test in the box's local frame."""
    cx, cy, cz, h, hx, hy, hz = box
    c, s = math.cos(h), math.sin(h)
    dx, dy, dz = p[0] - cx, p[1] - cy, p[2] - cz
    lx = c * dx + s * dy
    ly = -s * dx + c * dy
    return abs(lx) <= hx and abs(ly) <= hy and abs(dz) <= hz


def first_hit_exact(origin, direction, t_max, boxes):
    """Minimum t in [0, t_max] at which the ray touches any box, else None.

    Closed slab test per box in its local frame; an origin inside or on a
    box yields 0. Grazing (t_near == t_far) counts.
    """
    origin = np.asarray(origin, dtype=np.float64)
    direction = np.asarray(direction, dtype=np.float64)
    best = None
    for box in boxes:
        cx, cy, cz, h, hx, hy, hz = box
        c, s = math.cos(h), math.sin(h)
        rel = origin - np.array([cx, cy, cz])
        o_l = np.array([c * rel[0] + s * rel[1], -s * rel[0] + c * rel[1], rel[2]])
        d_l = np.array([
            c * direction[0] + s * direction[1],
            -s * direction[0] + c * direction[1],
            direction[2],
        ])
        half = (hx, hy, hz)
        t_near, t_far = -INF, INF
        ok = True
        for a in range(3):
            if d_l[a] == 0.0:
                if abs(o_l[a]) > half[a]:
                    ok = False
                    break
            else:
                ta = (-half[a] - o_l[a]) / d_l[a]
                tb = (half[a] - o_l[a]) / d_l[a]
                lo, hi = (ta, tb) if ta <= tb else (tb, ta)
                t_near = max(t_near, lo)
                t_far = min(t_far, hi)
        if not ok or t_near > t_far:
            continue
        if t_far < 0.0 or t_near > t_max:
            continue
        t_star = max(t_near, 0.0)
        if best is None or t_star < best:
            best = t_star
    return best


def first_hit_sampling(origin, direction, t_max, boxes, step=1e-3):
    """First sampled point inside any box; approximate t* within ~step."""
    n = max(1, int(math.ceil(t_max / step)))
    origin = np.asarray(origin, dtype=np.float64)
    direction = np.asarray(direction, dtype=np.float64)
    for i in range(n + 1):
        t = min(i * step, t_max)
        p = origin + t * direction
        if any(point_in_box(p, b) for b in boxes):
            return t
    return None


# ---------------------------------------------------------------------------
# metric references (direct formula evaluation)


def naive_visible_set(rays, g0, edge, dims, active):
    """Union of exact traversal results across rays, active voxels only.

    rays: iterable of (origin, direction, t_max). active: bool indexed by
    (ix, iy, iz). Returns set of (ix, iy, iz).
    """
    vis = set()
    for o, d, tm in rays:
        for coord in segment_voxels_exact(o, d, tm, g0, edge, dims):
            if active[coord]:
                vis.add(coord)
    return vis


def naive_coverage(active, kind, weights_by_kind, visible):
    """C = sum of weights over visible voxels / sum over all labeled voxels.

    kind: int array (0 = unlabeled) indexed like active; visible: set of
    coords. Returns float; raises ZeroDivisionError when nothing is
    weighted (callers treat that as the degenerate case).
    """
    num = 0.0
    den = 0.0
    it = np.ndindex(active.shape)
    for coord in it:
        if not active[coord]:
            continue
        k = int(kind[coord])
        if k == 0:
            continue
        w = weights_by_kind[k]
        den += w
        if coord in visible:
            num += w
    return num / den


def entropy_term(p: float) -> float:
    """Bernoulli entropy in nats with the 0*log(0) = 0 convention."""
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -(p * math.log(p) + (1.0 - p) * math.log(1.0 - p))


def naive_information_gain(active, occupancy_p, visible):
    """IG = 1 - (residual entropy over non-visible active voxels) / H(Omega)."""
    total = 0.0
    residual = 0.0
    for coord in np.ndindex(active.shape):
        if not active[coord]:
            continue
        h = entropy_term(float(occupancy_p[coord]))
        total += h
        if coord not in visible:
            residual += h
    if total == 0.0:
        return 0.0
    return 1.0 - residual / total


def naive_occlusion(rays, frames, g0, edge, dims, active, visible):
    """Frame-averaged retention of the baseline-visible set.

    For each frame: every ray is truncated at its exact first box hit;
    a visible voxel is reached when some ray has an entry parameter
    <= its truncation (rays with t* == 0 reach nothing). Returns
    (O, [frozenset of occluded coords per frame]).
    """
    if not visible:
        raise ValueError("baseline visible set is empty")
    per_ray = [
        {c: t for c, t in segment_voxels_exact(o, d, tm, g0, edge, dims).items()
         if active[c]}
        for (o, d, tm) in rays
    ]
    occluded_sets = []
    total = 0.0
    for boxes in frames:
        reached = set()
        for (o, d, tm), voxmap in zip(rays, per_ray):
            t_star = first_hit_exact(o, d, tm, boxes)
            if t_star is None:
                reached.update(voxmap.keys())
            elif t_star == 0.0:
                continue
            else:
                reached.update(c for c, t in voxmap.items() if t <= t_star)
        occ = frozenset(visible - reached)
        occluded_sets.append(occ)
        total += 1.0 - len(occ) / len(visible)
    return total / len(frames), occluded_sets


def naive_occupancy(frames, g0, edge, dims, active):
    """Per-voxel fraction of frames whose boxes contain the voxel center."""
    nx, ny, nz = dims
    p = np.zeros((nx, ny, nz), dtype=np.float64)
    for boxes in frames:
        for coord in np.ndindex((nx, ny, nz)):
            cx = g0[0] + (coord[0] + 0.5) * edge
            cy = g0[1] + (coord[1] + 0.5) * edge
            cz = g0[2] + (coord[2] + 0.5) * edge
            if any(point_in_box((cx, cy, cz), b) for b in boxes):
                p[coord] += 1.0
    p /= len(frames)
    return p
