"""Voxelized region of interest and exact ray traversal.

The ROI is a vertical cylinder: radius ``radius_D_inf`` around a
center point, from ground elevation up to ``ground + height``. It is
discretized into an axis-aligned voxel lattice; membership is tested
at voxel centers, boundary inclusive. Traversal is exact supercover
walking (boundary ties touch every adjacent cube), not classic
Bresenham, so grazing contacts are never dropped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ResourceLimitError, ValidationError
from .scene import VectorMap

DEFAULT_MAX_VOXELS = 50_000_000

# epsilon biases dimension counts upward: an extra candidate voxel is
# harmless (its center simply fails membership), a missing one drops
# active voxels
_DIM_EPS = 1e-9


@dataclass(frozen=True)
class RoiSpec:
    """Cylindrical region-of-interest parameters."""

    center: tuple[float, float]
    radius: float
    ground: float = 0.0
    height: float = 4.0
    voxel_edge: float = 0.5
    core_radius: float = 30.0

    def __post_init__(self):
        cx, cy = float(self.center[0]), float(self.center[1])
        object.__setattr__(self, "center", (cx, cy))
        if not (math.isfinite(cx) and math.isfinite(cy)):
            raise ValidationError("roi center must be finite")
        for name in ("radius", "ground", "height", "voxel_edge", "core_radius"):
            v = float(getattr(self, name))
            object.__setattr__(self, name, v)
            if not math.isfinite(v):
                raise ValidationError(f"roi {name} must be finite")
        if self.radius <= 0:
            raise ValidationError("roi radius must be > 0")
        if self.height <= 0:
            raise ValidationError("roi height must be > 0")
        if self.voxel_edge <= 0:
            raise ValidationError("roi voxel_edge must be > 0")
        if self.core_radius < 0:
            raise ValidationError("roi core_radius must be >= 0")
        if self.core_radius > self.radius:
            raise ValidationError(
                f"core_radius {self.core_radius} exceeds roi radius {self.radius}")


@dataclass(frozen=True)
class Ray:
    """Parametric segment origin + t * direction, t in [0, t_max]."""

    origin: tuple[float, float, float]
    direction: tuple[float, float, float]
    t_max: float

    def __post_init__(self):
        o = tuple(float(v) for v in self.origin)
        d = tuple(float(v) for v in self.direction)
        object.__setattr__(self, "origin", o)
        object.__setattr__(self, "direction", d)
        object.__setattr__(self, "t_max", float(self.t_max))
        if not all(math.isfinite(v) for v in o + d):
            raise ValidationError("ray origin/direction must be finite")
        norm = math.sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2])
        if abs(norm - 1.0) > 1e-9:
            raise ValidationError(f"ray direction must be unit length, |d|={norm}")
        if not (math.isfinite(self.t_max) and self.t_max > 0):
            raise ValidationError("ray t_max must be finite and > 0")


class VoxelGrid:
    """Immutable voxel lattice over the ROI.

    Flat per-voxel arrays are ordered z-fastest: linear id of voxel
    (i, j, k) is (i * ny + j) * nz + k, so one xy column occupies a
    contiguous run of nz entries.
    """

    def __init__(self, spec: RoiSpec, dims: tuple[int, int, int],
                 origin: tuple[float, float, float], active: np.ndarray,
                 region_kind: np.ndarray, weight: np.ndarray,
                 occupancy_p: np.ndarray | None = None):
        nx, ny, nz = (int(v) for v in dims)
        n = nx * ny * nz
        self.spec = spec
        self.dims = (nx, ny, nz)
        self.origin = tuple(float(v) for v in origin)
        self.edge = float(spec.voxel_edge)
        self.active = np.ascontiguousarray(active, dtype=bool)
        self.region_kind = np.ascontiguousarray(region_kind, dtype=np.int8)
        self.weight = np.ascontiguousarray(weight, dtype=np.float64)
        if occupancy_p is None:
            occupancy_p = np.zeros(n, dtype=np.float64)
        self.occupancy_p = np.ascontiguousarray(occupancy_p, dtype=np.float64)
        for name in ("active", "region_kind", "weight", "occupancy_p"):
            arr = getattr(self, name)
            if arr.shape != (n,):
                raise ValidationError(
                    f"grid array {name} has shape {arr.shape}, expected ({n},)")

    # -- index maps ---------------------------------------------------------

    @property
    def n_voxels(self) -> int:
        nx, ny, nz = self.dims
        return nx * ny * nz

    @property
    def n_active(self) -> int:
        return int(np.count_nonzero(self.active))

    def lin(self, i, j, k):
        _, ny, nz = self.dims
        return (np.asarray(i) * ny + np.asarray(j)) * nz + np.asarray(k)

    def coords(self, lin_ids):
        """Linear ids -> integer (i, j, k) arrays."""
        _, ny, nz = self.dims
        lin_ids = np.asarray(lin_ids)
        k = lin_ids % nz
        ij = lin_ids // nz
        return ij // ny, ij % ny, k

    def centers(self, lin_ids) -> np.ndarray:
        """World-space voxel centers for linear ids, shape (n, 3)."""
        i, j, k = self.coords(lin_ids)
        e = self.edge
        ox, oy, oz = self.origin
        return np.stack([ox + (i + 0.5) * e,
                         oy + (j + 0.5) * e,
                         oz + (k + 0.5) * e], axis=-1)

    def column_centers(self) -> np.ndarray:
        """xy centers of every column, shape (nx * ny, 2), row-major."""
        nx, ny, _ = self.dims
        e = self.edge
        xs = self.origin[0] + (np.arange(nx) + 0.5) * e
        ys = self.origin[1] + (np.arange(ny) + 0.5) * e
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        return np.stack([gx.ravel(), gy.ravel()], axis=-1)

    def core_mask(self) -> np.ndarray:
        """Per-voxel flag: active and center within core_radius of center."""
        nx, ny, nz = self.dims
        cx, cy = self.spec.center
        cols = self.column_centers()
        d2 = (cols[:, 0] - cx) ** 2 + (cols[:, 1] - cy) ** 2
        col_in = d2 <= self.spec.core_radius ** 2
        return np.repeat(col_in, nz) & self.active


def build_roi(vmap: VectorMap, spec: RoiSpec,
              region_weights=None,
              max_voxels: int = DEFAULT_MAX_VOXELS) -> VoxelGrid:
    """Discretize the ROI cylinder over a map into a VoxelGrid."""
    if region_weights is None:
        from .metrics import DEFAULT_REGION_WEIGHTS
        region_weights = DEFAULT_REGION_WEIGHTS
    e = spec.voxel_edge
    nxy = max(1, int(math.floor(2.0 * spec.radius / e + _DIM_EPS)))
    nz = max(1, int(math.floor(spec.height / e - 0.5 + _DIM_EPS)) + 1)
    n = nxy * nxy * nz
    if n > max_voxels:
        raise ResourceLimitError(
            f"grid of {nxy}x{nxy}x{nz} = {n} voxels exceeds cap {max_voxels}")
    cx, cy = spec.center
    origin = (cx - nxy * e / 2.0, cy - nxy * e / 2.0, spec.ground)

    xs = origin[0] + (np.arange(nxy) + 0.5) * e
    ys = origin[1] + (np.arange(nxy) + 0.5) * e
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    col_d2 = (gx - cx) ** 2 + (gy - cy) ** 2
    col_active = (col_d2 <= spec.radius ** 2).ravel()
    zs = spec.ground + (np.arange(nz) + 0.5) * e
    z_ok = (zs >= spec.ground) & (zs <= spec.ground + spec.height)
    active = (np.repeat(col_active, nz).reshape(-1, nz) & z_ok).ravel()

    # region_kind 0 = unlabeled, matching scene.kinds_at
    col_kind = np.zeros(nxy * nxy, dtype=np.int8)
    idx = np.flatnonzero(col_active)
    if idx.size:
        col_kind[idx] = vmap.kinds_at(gx.ravel()[idx], gy.ravel()[idx])
    region_kind = np.repeat(col_kind, nz)
    region_kind[~active] = 0

    wtable = np.zeros(8, dtype=np.float64)
    for kind, w in region_weights.items():
        wtable[int(kind)] = float(w)
    weight = wtable[region_kind]

    return VoxelGrid(spec, (nxy, nxy, nz), origin, active, region_kind, weight)


def traverse_ray(grid: VoxelGrid, ray: Ray) -> list[tuple[int, int, int]]:
    """Voxels the segment passes through, in increasing-entry order.

    Exact supercover semantics: voxel cubes are closed, so boundary
    and corner contacts count; rays starting or ending inside bounds
    include their containing voxel; fully outside rays yield [].
    """
    origins = np.asarray([ray.origin], dtype=np.float64)
    dirs = np.asarray([ray.direction], dtype=np.float64)
    t_arr = np.asarray([ray.t_max], dtype=np.float64)
    g0 = np.asarray(grid.origin, dtype=np.float64)
    _, vox, _ = kernels.traverse_bundle(origins, dirs, t_arr, g0,
                                        grid.edge, grid.dims)
    i, j, k = grid.coords(vox.astype(np.int64))
    return [(int(a), int(b), int(c)) for a, b, c in zip(i, j, k)]


@dataclass
class VisibilityField:
    """Per-voxel perception flag f, one bool per grid voxel."""

    grid: VoxelGrid
    f: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.f is None:
            self.f = np.zeros(self.grid.n_voxels, dtype=bool)
        else:
            self.f = np.ascontiguousarray(self.f, dtype=bool)
            if self.f.shape != (self.grid.n_voxels,):
                raise ValidationError("visibility field shape mismatch")

    @property
    def n_visible(self) -> int:
        return int(np.count_nonzero(self.f))


def mark_visible(vis: VisibilityField, voxels) -> VisibilityField:
    """Set f=1 for each listed active voxel (set union: idempotent,
    order independent). Accepts (i, j, k) triples or linear ids."""
    if len(voxels) == 0:
        return vis
    grid = vis.grid
    arr = np.asarray(voxels)
    if arr.ndim == 2:
        lin = grid.lin(arr[:, 0], arr[:, 1], arr[:, 2])
    else:
        lin = arr.astype(np.int64)
    lin = lin[grid.active[lin]]
    vis.f[lin] = True
    return vis
