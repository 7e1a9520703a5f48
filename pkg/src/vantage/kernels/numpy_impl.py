"""Pure-numpy kernel backend.

Semantics contract shared with the numba backend:

- Voxel cubes are closed sets and ray segments are closed intervals
  [0, t_max]: single-point contact counts. Crossing exactly through a
  voxel edge or corner emits every cube sharing the contact point; a
  segment sliding exactly along a grid plane with a zero direction
  component on that axis emits both adjacent columns all the way.
- Plane coordinates are always formed as (g0 + index * edge) and ray
  parameters as (plane - origin) / dir (plain division, no reciprocal
  multiply), so entry parameters agree bitwise across backends and with
  the slab algebra used by the test oracles.
- Linear voxel ids: (ix * ny + iy) * nz + iz.
- Oriented occluder boxes are packed rows of
  [cx, cy, cz, cos_h, sin_h, hx, hy, hz, r_bound].
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "numpy"

_INF = np.inf


# ---------------------------------------------------------------------------
# supercover traversal


def _clip_to_grid(o, d, t_cap, g0, edge, dims):
    """Closed slab of the segment against the grid AABB.

    Returns (t_start, t_hi) or None when the segment misses the grid.
    """
    t_lo = 0.0
    t_hi = float(t_cap)
    for a in range(3):
        lo_plane = g0[a]
        hi_plane = g0[a] + dims[a] * edge
        if d[a] == 0.0:
            if o[a] < lo_plane or o[a] > hi_plane:
                return None
        else:
            ta = (lo_plane - o[a]) / d[a]
            tb = (hi_plane - o[a]) / d[a]
            if ta > tb:
                ta, tb = tb, ta
            if ta > t_lo:
                t_lo = ta
            if tb < t_hi:
                t_hi = tb
    if t_lo > t_hi:
        return None
    return t_lo, t_hi


def _slab_enumerate(o, d, t_start, t_hi, g0, edge, dims):
    """Exact per-cube slab fallback over the segment's AABB index range.

    Used for rays whose crossing sequence contains exact parameter ties
    (corner/edge contact): correct for every degeneracy at O(aabb volume).
    Returns (cells (m,3) int64, entries (m,) f64) sorted by entry.
    """
    p0 = o + t_start * d
    p1 = o + t_hi * d
    lo_idx = np.empty(3, dtype=np.int64)
    hi_idx = np.empty(3, dtype=np.int64)
    for a in range(3):
        lo = min(p0[a], p1[a])
        hi = max(p0[a], p1[a])
        lo_idx[a] = max(0, int(np.floor((lo - g0[a]) / edge)) - 1)
        hi_idx[a] = min(dims[a] - 1, int(np.floor((hi - g0[a]) / edge)) + 1)
        if lo_idx[a] > hi_idx[a]:
            return (np.empty((0, 3), np.int64), np.empty(0, np.float64))
    ii, jj, kk = np.meshgrid(
        np.arange(lo_idx[0], hi_idx[0] + 1),
        np.arange(lo_idx[1], hi_idx[1] + 1),
        np.arange(lo_idx[2], hi_idx[2] + 1),
        indexing="ij",
    )
    cells = np.stack([ii.ravel(), jj.ravel(), kk.ravel()], axis=1)
    t_near = np.full(cells.shape[0], -_INF)
    t_far = np.full(cells.shape[0], _INF)
    ok = np.ones(cells.shape[0], dtype=bool)
    for a in range(3):
        lo_planes = g0[a] + cells[:, a].astype(np.float64) * edge
        hi_planes = g0[a] + (cells[:, a] + 1).astype(np.float64) * edge
        if d[a] == 0.0:
            ok &= (lo_planes <= o[a]) & (o[a] <= hi_planes)
        else:
            ta = (lo_planes - o[a]) / d[a]
            tb = (hi_planes - o[a]) / d[a]
            t_near = np.maximum(t_near, np.minimum(ta, tb))
            t_far = np.minimum(t_far, np.maximum(ta, tb))
    entry = np.maximum(t_near, 0.0)
    ok &= entry <= np.minimum(t_far, t_hi)
    cells = cells[ok]
    entry = entry[ok]
    order = np.argsort(entry, kind="stable")
    return cells[order], entry[order]


def _traverse_one(o, d, t_cap, g0, edge, dims):
    """Supercover cells and entry parameters for a single ray."""
    empty = (np.empty((0, 3), np.int64), np.empty(0, np.float64))
    clip = _clip_to_grid(o, d, t_cap, g0, edge, dims)
    if clip is None:
        return empty
    t_start, t_hi = clip
    p = o + t_start * d

    # start cell candidates per axis; exact on-plane contact touches both
    # neighbours, and a zero-direction on-plane axis mirrors the whole walk
    cand = []
    walk0 = np.empty(3, dtype=np.int64)
    mirror_axes = []
    for a in range(3):
        rel = (p[a] - g0[a]) / edge
        base = int(np.floor(rel))
        on_plane = (rel == base)
        if on_plane:
            cand.append((base, base - 1))
            if d[a] == 0.0:
                mirror_axes.append(a)
                walk0[a] = base
            else:
                walk0[a] = base if d[a] > 0.0 else base - 1
        else:
            cand.append((base,))
            walk0[a] = base

    start_cells = np.array(
        [(i, j, k) for i in cand[0] for j in cand[1] for k in cand[2]],
        dtype=np.int64,
    )

    # crossing lists per axis, enumerated by plane index (never by
    # accumulating t): d > 0 crosses planes walk0+1 .. n, d < 0 crosses
    # walk0 .. 1 downward into cell (plane - 1)
    ts_parts = []
    ax_parts = []
    step = np.zeros(3, dtype=np.int64)
    for a in range(3):
        if d[a] > 0.0:
            ks = np.arange(walk0[a] + 1, dims[a] + 1, dtype=np.int64)
            step[a] = 1
        elif d[a] < 0.0:
            ks = np.arange(walk0[a], -1, -1, dtype=np.int64)
            step[a] = -1
        else:
            continue
        if ks.size == 0:
            continue
        ts = ((g0[a] + ks.astype(np.float64) * edge) - o[a]) / d[a]
        keep = ts <= t_hi
        ts_parts.append(ts[keep])
        ax_parts.append(np.full(int(keep.sum()), a, dtype=np.int64))

    if ts_parts:
        ts_all = np.concatenate(ts_parts)
        ax_all = np.concatenate(ax_parts)
        order = np.argsort(ts_all, kind="stable")
        ts_all = ts_all[order]
        ax_all = ax_all[order]
        if ts_all.size > 1 and (np.diff(ts_all) == 0.0).any():
            # exact tie in the crossing sequence: corner/edge contact;
            # delegate the whole ray to the always-correct slab fallback
            return _slab_enumerate(o, d, t_start, t_hi, g0, edge, dims)
        deltas = np.zeros((ts_all.size, 3), dtype=np.int64)
        deltas[np.arange(ts_all.size), ax_all] = step[ax_all]
        walk_cells = walk0[None, :] + np.cumsum(deltas, axis=0)
        walk_ts = ts_all
    else:
        walk_cells = np.empty((0, 3), np.int64)
        walk_ts = np.empty(0, np.float64)

    cells = [start_cells]
    entries = [np.full(start_cells.shape[0], t_start)]
    if walk_cells.shape[0]:
        cells.append(walk_cells)
        entries.append(walk_ts)
        # every combination of -1 offsets: an edge/corner slider touches
        # all cells sharing the contact edge, not one neighbour per axis
        for mask in range(1, 1 << len(mirror_axes)):
            m = walk_cells.copy()
            for bit, a in enumerate(mirror_axes):
                if (mask >> bit) & 1:
                    m[:, a] -= 1
            cells.append(m)
            entries.append(walk_ts)
    cells = np.concatenate(cells, axis=0)
    entries = np.concatenate(entries)
    inb = np.ones(cells.shape[0], dtype=bool)
    for a in range(3):
        inb &= (cells[:, a] >= 0) & (cells[:, a] < dims[a])
    cells = cells[inb]
    entries = entries[inb]
    order = np.argsort(entries, kind="stable")
    return cells[order], entries[order]


def traverse_bundle(origins, dirs, t_max, g0, edge, dims):
    """Supercover traversal of many rays.

    Returns (ray_ptr, vox, entry): CSR per-ray segments of linear voxel
    ids with non-decreasing entry parameters.
    """
    origins = np.asarray(origins, dtype=np.float64)
    dirs = np.asarray(dirs, dtype=np.float64)
    t_max = np.asarray(t_max, dtype=np.float64)
    g0 = np.asarray(g0, dtype=np.float64)
    dims = tuple(int(x) for x in dims)
    ny, nz = dims[1], dims[2]
    n_rays = origins.shape[0]
    ray_ptr = np.zeros(n_rays + 1, dtype=np.int64)
    vox_parts = []
    t_parts = []
    for r in range(n_rays):
        cells, entries = _traverse_one(
            origins[r], dirs[r], float(t_max[r]), g0, edge, dims
        )
        lin = (cells[:, 0] * ny + cells[:, 1]) * nz + cells[:, 2]
        vox_parts.append(lin.astype(np.int32))
        t_parts.append(entries)
        ray_ptr[r + 1] = ray_ptr[r] + lin.shape[0]
    vox = (np.concatenate(vox_parts) if vox_parts
           else np.empty(0, np.int32))
    entry = (np.concatenate(t_parts) if t_parts
             else np.empty(0, np.float64))
    return ray_ptr, vox, entry


# ---------------------------------------------------------------------------
# ray / oriented-box first hit


def _first_hits_chunk(origins, dirs, t_max, boxes):
    """Vectorized closed slab over a (rays, boxes) block."""
    n = origins.shape[0]
    if boxes.shape[0] == 0:
        return np.full(n, _INF)
    rel = origins[:, None, :] - boxes[None, :, 0:3]          # (n, b, 3)
    c = boxes[None, :, 3]
    s = boxes[None, :, 4]
    o_l = np.empty_like(rel)
    o_l[:, :, 0] = c * rel[:, :, 0] + s * rel[:, :, 1]
    o_l[:, :, 1] = -s * rel[:, :, 0] + c * rel[:, :, 1]
    o_l[:, :, 2] = rel[:, :, 2]
    d_l = np.empty((n, boxes.shape[0], 3))
    d_l[:, :, 0] = c * dirs[:, None, 0] + s * dirs[:, None, 1]
    d_l[:, :, 1] = -s * dirs[:, None, 0] + c * dirs[:, None, 1]
    d_l[:, :, 2] = np.broadcast_to(dirs[:, None, 2], d_l[:, :, 2].shape)
    half = boxes[None, :, 5:8]

    t_near = np.full((n, boxes.shape[0]), -_INF)
    t_far = np.full((n, boxes.shape[0]), _INF)
    ok = np.ones((n, boxes.shape[0]), dtype=bool)
    for a in range(3):
        da = d_l[:, :, a]
        oa = o_l[:, :, a]
        ha = half[:, :, a]
        par = da == 0.0
        ok &= ~par | (np.abs(oa) <= ha)
        with np.errstate(divide="ignore", invalid="ignore"):
            ta = (-ha - oa) / da
            tb = (ha - oa) / da
        lo = np.minimum(ta, tb)
        hi = np.maximum(ta, tb)
        t_near = np.where(par, t_near, np.maximum(t_near, lo))
        t_far = np.where(par, t_far, np.minimum(t_far, hi))
    entry = np.maximum(t_near, 0.0)
    ok &= (t_near <= t_far) & (t_far >= 0.0) & (entry <= t_max[:, None])
    entry = np.where(ok, entry, _INF)
    return entry.min(axis=1)


def first_hits(origins, dirs, t_max, boxes, chunk=2048):
    """Per-ray first intersection parameter against every box (inf = none).

    Origin inside or on a box yields 0; grazing counts; hits beyond the
    ray's t_max do not.
    """
    origins = np.asarray(origins, dtype=np.float64)
    dirs = np.asarray(dirs, dtype=np.float64)
    t_max = np.asarray(t_max, dtype=np.float64)
    boxes = np.asarray(boxes, dtype=np.float64)
    n = origins.shape[0]
    out = np.full(n, _INF)
    for lo in range(0, n, chunk):
        hi = min(n, lo + chunk)
        out[lo:hi] = _first_hits_chunk(
            origins[lo:hi], dirs[lo:hi], t_max[lo:hi], boxes
        )
    return out


def first_hits_from(origin, dirs, t_max, boxes):
    """Shared-origin variant (same contract as first_hits)."""
    dirs = np.asarray(dirs, dtype=np.float64)
    n = dirs.shape[0]
    origins = np.broadcast_to(
        np.asarray(origin, dtype=np.float64), (n, 3)
    )
    t_arr = np.full(n, float(t_max))
    return first_hits(origins, dirs, t_arr, boxes)


# ---------------------------------------------------------------------------
# occupancy rasterization


def rasterize_frames(frame_ptr, boxes, g0, edge, dims, counts):
    """Add one count per voxel per frame whose center lies in any box.

    Containment is closed (a center exactly on a face counts). counts is
    a uint32 array of nx*ny*nz entries, modified in place.
    """
    g0 = np.asarray(g0, dtype=np.float64)
    boxes = np.asarray(boxes, dtype=np.float64)
    nx, ny, nz = (int(v) for v in dims)
    n_frames = len(frame_ptr) - 1
    hit = np.zeros(nx * ny * nz, dtype=bool)
    for f in range(n_frames):
        hit[:] = False
        for b in range(int(frame_ptr[f]), int(frame_ptr[f + 1])):
            cx, cy, cz, c, s, hx, hy, hz = boxes[b, :8]
            ex = abs(c) * hx + abs(s) * hy
            ey = abs(s) * hx + abs(c) * hy
            i0 = max(0, int(np.ceil((cx - ex - g0[0]) / edge - 0.5 - 1e-9)))
            i1 = min(nx - 1, int(np.floor((cx + ex - g0[0]) / edge - 0.5 + 1e-9)))
            j0 = max(0, int(np.ceil((cy - ey - g0[1]) / edge - 0.5 - 1e-9)))
            j1 = min(ny - 1, int(np.floor((cy + ey - g0[1]) / edge - 0.5 + 1e-9)))
            k0 = max(0, int(np.ceil((cz - hz - g0[2]) / edge - 0.5 - 1e-9)))
            k1 = min(nz - 1, int(np.floor((cz + hz - g0[2]) / edge - 0.5 + 1e-9)))
            if i0 > i1 or j0 > j1 or k0 > k1:
                continue
            xs = g0[0] + (np.arange(i0, i1 + 1, dtype=np.float64) + 0.5) * edge
            ys = g0[1] + (np.arange(j0, j1 + 1, dtype=np.float64) + 0.5) * edge
            zs = g0[2] + (np.arange(k0, k1 + 1, dtype=np.float64) + 0.5) * edge
            dx = xs[:, None] - cx
            dy = ys[None, :] - cy
            lx = c * dx + s * dy
            ly = -s * dx + c * dy
            mxy = (np.abs(lx) <= hx) & (np.abs(ly) <= hy)
            mz = np.abs(zs - cz) <= hz
            if not mxy.any() or not mz.any():
                continue
            block = mxy[:, :, None] & mz[None, None, :]
            ii, jj, kk = np.nonzero(block)
            lin = ((ii + i0) * ny + (jj + j0)) * nz + (kk + k0)
            hit[lin] = True
        counts[hit] += 1


# ---------------------------------------------------------------------------
# occlusion scan


def occlusion_scan(inv_ptr, inv_ray, inv_t, thresh, freq):
    """One traffic frame: count baseline-visible voxels no ray reaches.

    inv_* is the voxel-major index over visible voxels (CSR of (ray,
    entry) pairs); thresh[r] is the truncation parameter of ray r in this
    frame (+inf unblocked, -1.0 for a ray blocked at its origin). A voxel
    is reached when any covering entry has entry_t <= thresh. freq gets
    +1 at every occluded slot. Returns the occluded count.
    """
    live = inv_t <= thresh[inv_ray]
    if len(inv_ptr) <= 1:
        return 0
    reached = np.logical_or.reduceat(live, inv_ptr[:-1])
    occluded = ~reached
    freq += occluded
    return int(occluded.sum())
