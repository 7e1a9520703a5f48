"""Numba JIT kernel backend.

Shares the semantics contract documented in numpy_impl: closed voxel
cubes and segments, supercover tie handling (corner/edge contact emits
every touched cube, zero-direction on-plane axes mirror the walk),
plane coordinates formed as (g0 + index * edge), parameters as
(plane - origin) / dir, linear ids (ix * ny + iy) * nz + iz, and the
9-column packed box layout.

All kernels are serial (no prange) and release the GIL so callers can
run independent work items on Python threads; every function here is
deterministic for a fixed input regardless of thread count.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

BACKEND_NAME = "numba"

_JIT = dict(cache=True, nogil=True)


# ---------------------------------------------------------------------------
# supercover traversal


@njit(**_JIT)
def _traverse_pass(origins, dirs, t_max, g0, edge, n0, n1, n2,
                   ray_ptr, out_vox, out_t, fill):
    """Count pass (fill=False): per-ray emission counts into ray_ptr[r+1].
    Fill pass (fill=True): writes vox/entry at offsets from ray_ptr."""
    inf = np.inf
    dims0 = np.empty(3, np.int64)
    dims0[0] = n0
    dims0[1] = n1
    dims0[2] = n2
    ob = np.empty(3, np.float64)
    db = np.empty(3, np.float64)
    cand = np.empty((3, 2), np.int64)
    cand_len = np.empty(3, np.int64)
    walk0 = np.empty(3, np.int64)
    step = np.empty(3, np.int64)
    plane = np.empty(3, np.int64)
    t_next = np.empty(3, np.float64)
    moff = np.empty((8, 3), np.int64)
    taxes = np.empty(3, np.int64)
    nr = origins.shape[0]
    for r in range(nr):
        for a in range(3):
            ob[a] = origins[r, a]
            db[a] = dirs[r, a]
        # closed slab clip against the grid AABB
        t_lo = 0.0
        t_hi = t_max[r]
        miss = False
        for a in range(3):
            lo_p = g0[a]
            hi_p = g0[a] + np.float64(dims0[a]) * edge
            if db[a] == 0.0:
                if ob[a] < lo_p or ob[a] > hi_p:
                    miss = True
                    break
            else:
                ta = (lo_p - ob[a]) / db[a]
                tb = (hi_p - ob[a]) / db[a]
                if ta > tb:
                    tmp = ta
                    ta = tb
                    tb = tmp
                if ta > t_lo:
                    t_lo = ta
                if tb < t_hi:
                    t_hi = tb
        cnt = 0
        base = ray_ptr[r] if fill else 0
        if not miss and t_lo <= t_hi:
            t_start = t_lo
            n_m = 1
            moff[0, 0] = 0
            moff[0, 1] = 0
            moff[0, 2] = 0
            for a in range(3):
                pa = ob[a] + t_start * db[a]
                rel = (pa - g0[a]) / edge
                fbase = math.floor(rel)
                ibase = np.int64(fbase)
                if rel == fbase:
                    # exactly on a plane: both neighbours are touched
                    cand[a, 0] = ibase
                    cand[a, 1] = ibase - 1
                    cand_len[a] = 2
                    if db[a] == 0.0:
                        # sliding along the plane: mirror the whole walk
                        for m in range(n_m):
                            moff[n_m + m, 0] = moff[m, 0]
                            moff[n_m + m, 1] = moff[m, 1]
                            moff[n_m + m, 2] = moff[m, 2]
                            moff[n_m + m, a] = -1
                        n_m *= 2
                        walk0[a] = ibase
                    elif db[a] > 0.0:
                        walk0[a] = ibase
                    else:
                        walk0[a] = ibase - 1
                else:
                    cand[a, 0] = ibase
                    cand_len[a] = 1
                    walk0[a] = ibase
            # start cells: cartesian product of per-axis candidates
            for i0 in range(cand_len[0]):
                for i1 in range(cand_len[1]):
                    for i2 in range(cand_len[2]):
                        c0 = cand[0, i0]
                        c1 = cand[1, i1]
                        c2 = cand[2, i2]
                        if (0 <= c0 < n0 and 0 <= c1 < n1
                                and 0 <= c2 < n2):
                            if fill:
                                out_vox[base + cnt] = np.int32(
                                    (c0 * n1 + c1) * n2 + c2)
                                out_t[base + cnt] = t_start
                            cnt += 1
            cur0 = walk0[0]
            cur1 = walk0[1]
            cur2 = walk0[2]
            for a in range(3):
                if db[a] > 0.0:
                    step[a] = 1
                    plane[a] = walk0[a] + 1
                elif db[a] < 0.0:
                    step[a] = -1
                    plane[a] = walk0[a]
                else:
                    step[a] = 0
                    plane[a] = -1
                if step[a] != 0 and 0 <= plane[a] <= dims0[a]:
                    t_next[a] = ((g0[a] + np.float64(plane[a]) * edge)
                                 - ob[a]) / db[a]
                else:
                    t_next[a] = inf
            while True:
                tm = t_next[0]
                if t_next[1] < tm:
                    tm = t_next[1]
                if t_next[2] < tm:
                    tm = t_next[2]
                if tm == inf or tm > t_hi:
                    break
                nt = 0
                if t_next[0] == tm:
                    taxes[nt] = 0
                    nt += 1
                if t_next[1] == tm:
                    taxes[nt] = 1
                    nt += 1
                if t_next[2] == tm:
                    taxes[nt] = 2
                    nt += 1
                if nt >= 2:
                    # supercover: every proper nonempty subset of the tied
                    # axes yields a touched intermediate cube
                    for mask in range(1, (1 << nt) - 1):
                        e0 = cur0
                        e1 = cur1
                        e2 = cur2
                        for b in range(nt):
                            if mask & (1 << b):
                                a = taxes[b]
                                if a == 0:
                                    e0 += step[0]
                                elif a == 1:
                                    e1 += step[1]
                                else:
                                    e2 += step[2]
                        for m in range(n_m):
                            f0 = e0 + moff[m, 0]
                            f1 = e1 + moff[m, 1]
                            f2 = e2 + moff[m, 2]
                            if (0 <= f0 < n0 and 0 <= f1 < n1
                                    and 0 <= f2 < n2):
                                if fill:
                                    out_vox[base + cnt] = np.int32(
                                        (f0 * n1 + f1) * n2 + f2)
                                    out_t[base + cnt] = tm
                                cnt += 1
                for b in range(nt):
                    a = taxes[b]
                    if a == 0:
                        cur0 += step[0]
                    elif a == 1:
                        cur1 += step[1]
                    else:
                        cur2 += step[2]
                    plane[a] += step[a]
                    if 0 <= plane[a] <= dims0[a]:
                        t_next[a] = ((g0[a] + np.float64(plane[a]) * edge)
                                     - ob[a]) / db[a]
                    else:
                        t_next[a] = inf
                for m in range(n_m):
                    f0 = cur0 + moff[m, 0]
                    f1 = cur1 + moff[m, 1]
                    f2 = cur2 + moff[m, 2]
                    if 0 <= f0 < n0 and 0 <= f1 < n1 and 0 <= f2 < n2:
                        if fill:
                            out_vox[base + cnt] = np.int32(
                                (f0 * n1 + f1) * n2 + f2)
                            out_t[base + cnt] = tm
                        cnt += 1
        if not fill:
            ray_ptr[r + 1] = cnt


def traverse_bundle(origins, dirs, t_max, g0, edge, dims):
    """Supercover traversal of many rays -> (ray_ptr, vox, entry) CSR."""
    origins = np.ascontiguousarray(origins, dtype=np.float64)
    dirs = np.ascontiguousarray(dirs, dtype=np.float64)
    t_max = np.ascontiguousarray(t_max, dtype=np.float64)
    g0 = np.ascontiguousarray(g0, dtype=np.float64)
    n0, n1, n2 = (int(v) for v in dims)
    nr = origins.shape[0]
    ray_ptr = np.zeros(nr + 1, dtype=np.int64)
    dumb_v = np.empty(0, dtype=np.int32)
    dumb_t = np.empty(0, dtype=np.float64)
    _traverse_pass(origins, dirs, t_max, g0, float(edge), n0, n1, n2,
                   ray_ptr, dumb_v, dumb_t, False)
    np.cumsum(ray_ptr, out=ray_ptr)
    total = int(ray_ptr[-1])
    vox = np.empty(total, dtype=np.int32)
    entry = np.empty(total, dtype=np.float64)
    _traverse_pass(origins, dirs, t_max, g0, float(edge), n0, n1, n2,
                   ray_ptr, vox, entry, True)
    return ray_ptr, vox, entry


# ---------------------------------------------------------------------------
# ray / oriented-box first hit


@njit(inline="always")
def _box_hit(ox, oy, oz, dx, dy, dz, cx, cy, cz, ch, sh,
             hx, hy, hz, t_cap):
    rel0 = ox - cx
    rel1 = oy - cy
    rel2 = oz - cz
    ol0 = ch * rel0 + sh * rel1
    ol1 = -sh * rel0 + ch * rel1
    dl0 = ch * dx + sh * dy
    dl1 = -sh * dx + ch * dy
    t_near = -np.inf
    t_far = np.inf
    if dl0 == 0.0:
        if abs(ol0) > hx:
            return np.inf
    else:
        ta = (-hx - ol0) / dl0
        tb = (hx - ol0) / dl0
        if ta > tb:
            tmp = ta
            ta = tb
            tb = tmp
        if ta > t_near:
            t_near = ta
        if tb < t_far:
            t_far = tb
    if dl1 == 0.0:
        if abs(ol1) > hy:
            return np.inf
    else:
        ta = (-hy - ol1) / dl1
        tb = (hy - ol1) / dl1
        if ta > tb:
            tmp = ta
            ta = tb
            tb = tmp
        if ta > t_near:
            t_near = ta
        if tb < t_far:
            t_far = tb
    if dz == 0.0:
        if abs(rel2) > hz:
            return np.inf
    else:
        ta = (-hz - rel2) / dz
        tb = (hz - rel2) / dz
        if ta > tb:
            tmp = ta
            ta = tb
            tb = tmp
        if ta > t_near:
            t_near = ta
        if tb < t_far:
            t_far = tb
    if t_near > t_far or t_far < 0.0:
        return np.inf
    t_star = t_near if t_near > 0.0 else 0.0
    if t_star > t_cap:
        return np.inf
    return t_star


@njit(**_JIT)
def _first_hits(origins, dirs, t_max, boxes):
    n = origins.shape[0]
    out = np.full(n, np.inf)
    nb = boxes.shape[0]
    for r in range(n):
        best = np.inf
        for b in range(nb):
            t = _box_hit(origins[r, 0], origins[r, 1], origins[r, 2],
                         dirs[r, 0], dirs[r, 1], dirs[r, 2],
                         boxes[b, 0], boxes[b, 1], boxes[b, 2],
                         boxes[b, 3], boxes[b, 4],
                         boxes[b, 5], boxes[b, 6], boxes[b, 7],
                         t_max[r])
            if t < best:
                best = t
        out[r] = best
    return out


def first_hits(origins, dirs, t_max, boxes):
    """Per-ray first intersection parameter over all boxes (inf = none)."""
    return _first_hits(
        np.ascontiguousarray(origins, dtype=np.float64),
        np.ascontiguousarray(dirs, dtype=np.float64),
        np.ascontiguousarray(t_max, dtype=np.float64),
        np.ascontiguousarray(boxes, dtype=np.float64),
    )


_N_SECTORS = 128


@njit(**_JIT)
def _first_hits_from(origin, dirs, t_cap, boxes):
    n = dirs.shape[0]
    out = np.full(n, np.inf)
    nb = boxes.shape[0]
    if nb == 0:
        return out
    ox = origin[0]
    oy = origin[1]
    oz = origin[2]
    width = 2.0 * math.pi / _N_SECTORS
    # conservative azimuth spans per box: a ray can hit a box only when
    # its xy-azimuth falls within asin(r_bound / dist_xy) of the box
    # bearing (every hit point projects within r_bound of the centre);
    # spans are padded one sector each side against rounding
    lo_raw = np.empty(nb, np.int64)
    hi_raw = np.empty(nb, np.int64)
    counts = np.zeros(_N_SECTORS, np.int64)
    for b in range(nb):
        dx = boxes[b, 0] - ox
        dy = boxes[b, 1] - oy
        dz = boxes[b, 2] - oz
        rb = boxes[b, 8]
        dist3 = math.sqrt(dx * dx + dy * dy + dz * dz)
        if dist3 - rb > t_cap + 1e-9:
            lo_raw[b] = 1
            hi_raw[b] = 0  # empty span: unreachable within range
            continue
        dxy = math.sqrt(dx * dx + dy * dy)
        if dxy <= rb:
            lo_raw[b] = 0
            hi_raw[b] = _N_SECTORS - 1
        else:
            phi = math.atan2(dy, dx)
            ratio = rb / dxy
            if ratio > 1.0:
                ratio = 1.0
            delta = math.asin(ratio)
            lo = np.int64(math.floor((phi - delta) / width)) - 1
            hi = np.int64(math.floor((phi + delta) / width)) + 1
            if hi - lo + 1 >= _N_SECTORS:
                lo = 0
                hi = _N_SECTORS - 1
            lo_raw[b] = lo
            hi_raw[b] = hi
        for srw in range(lo_raw[b], hi_raw[b] + 1):
            counts[((srw % _N_SECTORS) + _N_SECTORS) % _N_SECTORS] += 1
    ptr = np.zeros(_N_SECTORS + 1, np.int64)
    for s in range(_N_SECTORS):
        ptr[s + 1] = ptr[s] + counts[s]
    fill = np.zeros(_N_SECTORS, np.int64)
    entries = np.empty(ptr[_N_SECTORS], np.int64)
    for b in range(nb):
        for srw in range(lo_raw[b], hi_raw[b] + 1):
            s = ((srw % _N_SECTORS) + _N_SECTORS) % _N_SECTORS
            entries[ptr[s] + fill[s]] = b
            fill[s] += 1
    for r in range(n):
        dxr = dirs[r, 0]
        dyr = dirs[r, 1]
        dzr = dirs[r, 2]
        best = np.inf
        if math.sqrt(dxr * dxr + dyr * dyr) < 1e-12:
            # near-vertical ray: azimuth undefined, test everything
            for b in range(nb):
                t = _box_hit(ox, oy, oz, dxr, dyr, dzr,
                             boxes[b, 0], boxes[b, 1], boxes[b, 2],
                             boxes[b, 3], boxes[b, 4],
                             boxes[b, 5], boxes[b, 6], boxes[b, 7],
                             t_cap)
                if t < best:
                    best = t
        else:
            phi_r = math.atan2(dyr, dxr)
            s = np.int64(math.floor(phi_r / width))
            s = ((s % _N_SECTORS) + _N_SECTORS) % _N_SECTORS
            for e in range(ptr[s], ptr[s + 1]):
                b = entries[e]
                dx = boxes[b, 0] - ox
                dy = boxes[b, 1] - oy
                dz = boxes[b, 2] - oz
                rb = boxes[b, 8]
                # cheap exact-safe rejects before the full slab test
                proj = dx * dxr + dy * dyr + dz * dzr
                if proj < -rb - 1e-9:
                    continue
                dist_sq = dx * dx + dy * dy + dz * dz
                closest_sq = dist_sq - proj * proj
                if closest_sq > rb * rb * (1.0 + 1e-9) + 1e-12:
                    continue
                t = _box_hit(ox, oy, oz, dxr, dyr, dzr,
                             boxes[b, 0], boxes[b, 1], boxes[b, 2],
                             boxes[b, 3], boxes[b, 4],
                             boxes[b, 5], boxes[b, 6], boxes[b, 7],
                             t_cap)
                if t < best:
                    best = t
        out[r] = best
    return out


def first_hits_from(origin, dirs, t_max, boxes):
    """Shared-origin first hits with azimuth-sector pruning."""
    return _first_hits_from(
        np.ascontiguousarray(origin, dtype=np.float64),
        np.ascontiguousarray(dirs, dtype=np.float64),
        float(t_max),
        np.ascontiguousarray(boxes, dtype=np.float64),
    )


# ---------------------------------------------------------------------------
# occupancy rasterization


@njit(**_JIT)
def _rasterize_frames(frame_ptr, boxes, g0, edge, n0, n1, n2, counts):
    nvox = n0 * n1 * n2
    stamp = np.full(nvox, np.uint32(0xFFFFFFFF), np.uint32)
    nf = frame_ptr.shape[0] - 1
    for f in range(nf):
        fs = np.uint32(f)
        for b in range(frame_ptr[f], frame_ptr[f + 1]):
            cx = boxes[b, 0]
            cy = boxes[b, 1]
            cz = boxes[b, 2]
            ch = boxes[b, 3]
            sh = boxes[b, 4]
            hx = boxes[b, 5]
            hy = boxes[b, 6]
            hz = boxes[b, 7]
            ex = abs(ch) * hx + abs(sh) * hy
            ey = abs(sh) * hx + abs(ch) * hy
            i0 = np.int64(math.ceil((cx - ex - g0[0]) / edge - 0.5 - 1e-9))
            i1 = np.int64(math.floor((cx + ex - g0[0]) / edge - 0.5 + 1e-9))
            j0 = np.int64(math.ceil((cy - ey - g0[1]) / edge - 0.5 - 1e-9))
            j1 = np.int64(math.floor((cy + ey - g0[1]) / edge - 0.5 + 1e-9))
            k0 = np.int64(math.ceil((cz - hz - g0[2]) / edge - 0.5 - 1e-9))
            k1 = np.int64(math.floor((cz + hz - g0[2]) / edge - 0.5 + 1e-9))
            if i0 < 0:
                i0 = 0
            if j0 < 0:
                j0 = 0
            if k0 < 0:
                k0 = 0
            if i1 > n0 - 1:
                i1 = n0 - 1
            if j1 > n1 - 1:
                j1 = n1 - 1
            if k1 > n2 - 1:
                k1 = n2 - 1
            for i in range(i0, i1 + 1):
                dx = (g0[0] + (np.float64(i) + 0.5) * edge) - cx
                for j in range(j0, j1 + 1):
                    dy = (g0[1] + (np.float64(j) + 0.5) * edge) - cy
                    lx = ch * dx + sh * dy
                    if abs(lx) > hx:
                        continue
                    ly = -sh * dx + ch * dy
                    if abs(ly) > hy:
                        continue
                    for k in range(k0, k1 + 1):
                        dz = (g0[2] + (np.float64(k) + 0.5) * edge) - cz
                        if abs(dz) <= hz:
                            v = (i * n1 + j) * n2 + k
                            if stamp[v] != fs:
                                stamp[v] = fs
                                counts[v] += np.uint32(1)


def rasterize_frames(frame_ptr, boxes, g0, edge, dims, counts):
    """Add one count per voxel per frame whose center lies in any box."""
    n0, n1, n2 = (int(v) for v in dims)
    _rasterize_frames(
        np.ascontiguousarray(frame_ptr, dtype=np.int64),
        np.ascontiguousarray(boxes, dtype=np.float64),
        np.ascontiguousarray(g0, dtype=np.float64),
        float(edge), n0, n1, n2, counts,
    )


# ---------------------------------------------------------------------------
# occlusion scan


@njit(**_JIT)
def _occlusion_scan(inv_ptr, inv_ray, inv_t, thresh, freq):
    occ = 0
    for v in range(inv_ptr.shape[0] - 1):
        reached = False
        for e in range(inv_ptr[v], inv_ptr[v + 1]):
            if inv_t[e] <= thresh[inv_ray[e]]:
                reached = True
                break
        if not reached:
            occ += 1
            freq[v] += np.uint32(1)
    return occ


def occlusion_scan(inv_ptr, inv_ray, inv_t, thresh, freq):
    """One traffic frame: count visible voxels no truncated ray reaches."""
    return int(_occlusion_scan(inv_ptr, inv_ray, inv_t, thresh, freq))
