"""Waypoint-based traffic occluder model.

Vehicles are oriented bounding boxes marching along lane polylines.
Frame 0 places one box at every retained waypoint (a waypoint survives
when any voxel of the vertical grid column at its xy position is
visible); frame k advances each box by k * step of arc length along
its lane, wrapping past the lane end back to the start. Box bases sit
on the ground plane; headings follow the containing polyline segment.
The model is fully deterministic: the seed is carried through to
reports for config provenance but drives no randomness in v1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DegenerateSceneError, ValidationError
from .grid import Ray, VisibilityField, VoxelGrid
from .scene import VectorMap


@dataclass(frozen=True)
class VehicleDims:
    """Occluder box extents: length (along heading), width, height."""

    length: float = 10.0
    width: float = 2.6
    height: float = 3.5

    def __post_init__(self):
        for name in ("length", "width", "height"):
            v = float(getattr(self, name))
            object.__setattr__(self, name, v)
            if not (v > 0 and math.isfinite(v)):
                raise ValidationError(f"vehicle {name} must be > 0")


@dataclass(frozen=True)
class OrientedBox:
    center: tuple[float, float, float]
    heading: float
    dims: VehicleDims

    def __post_init__(self):
        c = tuple(float(v) for v in self.center)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "heading", float(self.heading))
        if not all(math.isfinite(v) for v in c):
            raise ValidationError("box center must be finite")
        if not math.isfinite(self.heading):
            raise ValidationError("box heading must be finite")

    def packed(self) -> np.ndarray:
        """9-float kernel row: center, cos/sin heading, half-extents,
        bounding-sphere radius."""
        hx = self.dims.length / 2.0
        hy = self.dims.width / 2.0
        hz = self.dims.height / 2.0
        return np.array([
            self.center[0], self.center[1], self.center[2],
            math.cos(self.heading), math.sin(self.heading),
            hx, hy, hz,
            math.sqrt(hx * hx + hy * hy + hz * hz),
        ])


@dataclass(frozen=True)
class TrafficConfig:
    seed: int = 0
    advance_per_frame: float | None = None  # None: each lane's nominal_spacing
    frame_count: int | None = None  # None: max in-ROI waypoint count
    lane_ids: tuple | None = None  # None: all lanes

    def __post_init__(self):
        object.__setattr__(self, "seed", int(self.seed))
        if self.advance_per_frame is not None:
            v = float(self.advance_per_frame)
            object.__setattr__(self, "advance_per_frame", v)
            if not (v > 0 and math.isfinite(v)):
                raise ValidationError("advance_per_frame must be > 0")
        if self.frame_count is not None:
            n = int(self.frame_count)
            object.__setattr__(self, "frame_count", n)
            if n < 1:
                raise ValidationError("frame_count must be >= 1")
        if self.lane_ids is not None:
            object.__setattr__(self, "lane_ids", tuple(self.lane_ids))


@dataclass
class TrafficSequence:
    frames: list  # list of list[OrientedBox]
    dims: VehicleDims
    config: TrafficConfig
    retained_waypoints: int = 0

    @property
    def n_frames(self) -> int:
        return len(self.frames)


def pack_frames(frames) -> tuple[np.ndarray, np.ndarray]:
    """Flatten frames to (frame_ptr, packed boxes) for the kernels."""
    ptr = np.zeros(len(frames) + 1, dtype=np.int64)
    rows = []
    for i, boxes in enumerate(frames):
        ptr[i + 1] = ptr[i] + len(boxes)
        rows.extend(b.packed() for b in boxes)
    packed = np.vstack(rows) if rows else np.zeros((0, 9))
    return ptr, packed


def _column_visible(grid: VoxelGrid, vis: VisibilityField,
                    x: float, y: float) -> bool:
    nx, ny, nz = grid.dims
    i = math.floor((x - grid.origin[0]) / grid.edge)
    j = math.floor((y - grid.origin[1]) / grid.edge)
    if not (0 <= i < nx and 0 <= j < ny):
        return False
    base = (i * ny + j) * nz
    return bool(vis.f[base:base + nz].any())


def _lane_geometry(lane):
    """xy vertices, cumulative xy arc length, and segment headings
    (None where the segment is xy-degenerate and no fallback exists)."""
    pts = np.asarray(lane.waypoints, dtype=np.float64)[:, :2]
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    return pts, cum


def _position_on_lane(pts, cum, s):
    """Point at arc position s in [0, cum[-1]], and containing segment
    (outgoing segment at exact vertex landings)."""
    idx = int(np.searchsorted(cum, s, side="right")) - 1
    idx = max(0, min(idx, len(pts) - 2))
    seg_len = cum[idx + 1] - cum[idx]
    t = 0.0 if seg_len <= 0 else (s - cum[idx]) / seg_len
    p = pts[idx] + t * (pts[idx + 1] - pts[idx])
    return p, idx


def generate_frames(vmap: VectorMap, grid: VoxelGrid, vis: VisibilityField,
                    dims: VehicleDims | None = None,
                    config: TrafficConfig | None = None) -> TrafficSequence:
    """Build the occluder sequence for one evaluated placement."""
    dims = dims or VehicleDims()
    config = config or TrafficConfig()
    spec = grid.spec
    cx, cy = spec.center
    ground = spec.ground
    cz = ground + dims.height / 2.0

    lanes = vmap.lanes
    if config.lane_ids is not None:
        wanted = set(config.lane_ids)
        missing = wanted - {ln.id for ln in lanes}
        if missing:
            raise ValidationError(f"unknown lane ids in traffic config: {sorted(missing)}")
        lanes = [ln for ln in lanes if ln.id in wanted]

    # step (a): keep waypoints whose grid column is perceived
    retained = []  # (lane, pts, cum, s0)
    max_roi_wp = 0
    for lane in lanes:
        pts, cum = _lane_geometry(lane)
        total = float(cum[-1])
        if total <= 0.0:
            continue  # no usable xy extent: cannot march or orient boxes
        in_roi = 0
        for w, wp in enumerate(lane.waypoints):
            x, y = float(wp[0]), float(wp[1])
            if math.hypot(x - cx, y - cy) <= spec.radius:
                in_roi += 1
            if _column_visible(grid, vis, x, y):
                retained.append((lane, pts, cum, float(cum[w])))
        max_roi_wp = max(max_roi_wp, in_roi)
    if not retained:
        raise DegenerateSceneError(
            "no lane waypoint lies in a perceived grid column; "
            "traffic sequence would be empty")

    n_frames = config.frame_count or max(1, max_roi_wp)
    frames = []
    for k in range(n_frames):
        boxes = []
        for lane, pts, cum, s0 in retained:
            step = (config.advance_per_frame
                    if config.advance_per_frame is not None
                    else lane.nominal_spacing)
            total = float(cum[-1])
            s = s0 + k * step
            r = math.fmod(s, total)
            # arc positions live on (0, total]; an exact multiple wraps
            # to the lane end, not the start
            s_red = r if (r > 0.0 or s == 0.0) else total
            p, seg_idx = _position_on_lane(pts, cum, s_red)
            d = math.hypot(p[0] - cx, p[1] - cy)
            if d > spec.radius:
                continue  # box has marched out of the ROI this frame
            heading = lane.segment_heading(seg_idx)
            boxes.append(OrientedBox((float(p[0]), float(p[1]), cz),
                                     heading, dims))
        frames.append(boxes)
    return TrafficSequence(frames=frames, dims=dims, config=config,
                           retained_waypoints=len(retained))


def ray_first_hit(ray: Ray, boxes) -> float | None:
    """Smallest t in [0, t_max] at which the ray enters any box, or
    None. Closed-surface semantics: grazing tangency counts; an origin
    inside a box yields 0."""
    if len(boxes) == 0:
        return None
    packed = np.vstack([b.packed() for b in boxes])
    origins = np.asarray([ray.origin], dtype=np.float64)
    dirs = np.asarray([ray.direction], dtype=np.float64)
    t = kernels.first_hits(origins, dirs, np.asarray([ray.t_max]), packed)
    return None if math.isinf(t[0]) else float(t[0])


def occupancy_probabilities(grid: VoxelGrid, seq: TrafficSequence) -> VoxelGrid:
    """Fill grid.occupancy_p: per active voxel, the fraction of frames
    whose boxes contain the voxel center."""
    if seq.n_frames < 1:
        raise ValidationError("traffic sequence has no frames")
    ptr, packed = pack_frames(seq.frames)
    counts = np.zeros(grid.n_voxels, dtype=np.uint32)
    kernels.rasterize_frames(ptr, packed, np.asarray(grid.origin),
                             grid.edge, grid.dims, counts)
    p = counts.astype(np.float64) / float(seq.n_frames)
    p[~grid.active] = 0.0
    grid.occupancy_p[:] = p
    return grid
