"""Vector world model: labeled ground regions and lane centerlines.

Coordinates are metric, right-handed, z up. Region polygons live in the
(x, y) ground plane; every z within a region's vertical column shares its
label. Headings are measured in the xy-plane, counter-clockwise from +x,
and normalized to (-pi, pi].
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from shapely.geometry import Point, Polygon
from shapely.prepared import prep

from .errors import ValidationError

# xy displacement below which a heading is undefined
DEGENERATE_XY_DIST = 1e-9
# consecutive lane waypoints must be farther apart than this (3D)
MIN_WAYPOINT_GAP = 1e-6


class RegionKind(enum.IntEnum):
    """Functional road-surface classes.

    The integer value doubles as the default overlap-resolution priority:
    higher wins when polygons of different kinds cover the same point.
    """

    SHOULDER = 1
    SIDEWALK = 2
    DRIVEWAY = 3
    JUNCTION = 4
    CROSSWALK = 5

    @classmethod
    def from_name(cls, name: str) -> "RegionKind":
        try:
            return cls[str(name).strip().upper()]
        except KeyError:
            valid = ", ".join(k.name.lower() for k in cls)
            raise ValidationError(
                f"unknown region kind {name!r}; expected one of: {valid}"
            ) from None


@dataclass(frozen=True)
class Region:
    """One labeled ground polygon.

    polygon: (n, 2) float array, n >= 3, implicitly closed (the last vertex
    connects back to the first) and simple. priority defaults to the kind's
    rank; larger priority wins point lookups where polygons overlap.
    """

    name: str
    kind: RegionKind
    polygon: np.ndarray
    priority: int | None = None

    def __post_init__(self):
        verts = np.asarray(self.polygon, dtype=np.float64)
        if verts.ndim != 2 or verts.shape[1] != 2:
            raise ValidationError(
                f"region {self.name!r}: polygon must be an (n, 2) array, "
                f"got shape {verts.shape}"
            )
        if verts.shape[0] < 3:
            raise ValidationError(
                f"region {self.name!r}: polygon needs ≥3 vertices, "
                f"got {verts.shape[0]}"
            )
        if not np.isfinite(verts).all():
            raise ValidationError(
                f"region {self.name!r}: polygon has non-finite vertices"
            )
        poly = Polygon(verts)
        if not poly.is_valid:
            raise ValidationError(
                f"region {self.name!r}: polygon is not simple"
            )
        if poly.area <= 0.0:
            raise ValidationError(f"region {self.name!r}: polygon has zero area")
        object.__setattr__(self, "polygon", verts)
        object.__setattr__(self, "_shape", poly)
        if self.priority is None:
            object.__setattr__(self, "priority", int(self.kind))

    @property
    def shape(self) -> Polygon:
        return self._shape


@dataclass(frozen=True)
class Lane:
    """Ordered vehicle path: a polyline of 3D waypoints.

    nominal_spacing is the intended arc-length gap between consecutive
    waypoints; the traffic model uses it as the default per-frame advance.
    """

    id: str
    waypoints: np.ndarray
    nominal_spacing: float = 4.0

    def __post_init__(self):
        wps = np.asarray(self.waypoints, dtype=np.float64)
        if wps.ndim != 2 or wps.shape[1] != 3:
            raise ValidationError(
                f"lane {self.id!r}: waypoints must be an (n, 3) array, "
                f"got shape {wps.shape}"
            )
        if wps.shape[0] < 2:
            raise ValidationError(
                f"lane {self.id!r}: polyline needs ≥2 waypoints, "
                f"got {wps.shape[0]}"
            )
        if not np.isfinite(wps).all():
            raise ValidationError(
                f"lane {self.id!r}: waypoints contain non-finite values"
            )
        gaps = np.linalg.norm(np.diff(wps, axis=0), axis=1)
        if (gaps <= MIN_WAYPOINT_GAP).any():
            i = int(np.argmax(gaps <= MIN_WAYPOINT_GAP))
            raise ValidationError(
                f"lane {self.id!r}: waypoints {i} and {i + 1} coincide "
                f"(gap {gaps[i]:.2e} m)"
            )
        if not (math.isfinite(self.nominal_spacing) and self.nominal_spacing > 0):
            raise ValidationError(
                f"lane {self.id!r}: nominal_spacing must be positive, "
                f"got {self.nominal_spacing}"
            )
        object.__setattr__(self, "waypoints", wps)

    def segment_heading(self, seg: int) -> float:
        """Heading of polyline segment seg -> seg+1.

        Falls back to the nearest non-degenerate segment (forward first,
        then backward) when the segment's xy-projection collapses; raises
        only if every segment is xy-degenerate.
        """
        wps = self.waypoints
        n = wps.shape[0]
        if not 0 <= seg < n - 1:
            raise IndexError(f"segment index {seg} out of range [0, {n - 1})")
        for j in range(seg, n - 1):
            h = _heading_or_none(wps[j], wps[j + 1])
            if h is not None:
                return h
        for j in range(seg - 1, -1, -1):
            h = _heading_or_none(wps[j], wps[j + 1])
            if h is not None:
                return h
        raise ValidationError(
            f"lane {self.id!r}: all segments are degenerate in xy; "
            "no heading defined"
        )


def _heading_or_none(a, b) -> float | None:
    dx = float(b[0]) - float(a[0])
    dy = float(b[1]) - float(a[1])
    if math.hypot(dx, dy) < DEGENERATE_XY_DIST:
        return None
    return normalize_heading(math.atan2(dy, dx))


def heading_between(a, b) -> float:
    """Planar heading of the displacement a -> b, in (-pi, pi].

    The z components are ignored. Raises ValidationError when the
    xy-projections coincide (within 1e-9 m): no direction is defined.
    """
    h = _heading_or_none(a, b)
    if h is None:
        raise ValidationError(
            f"degenerate point pair: xy-projections of {tuple(np.asarray(a)[:2])} "
            f"and {tuple(np.asarray(b)[:2])} coincide"
        )
    return h


def normalize_heading(theta: float) -> float:
    """Wrap an angle to (-pi, pi]. Exact -pi maps to +pi."""
    out = math.remainder(theta, 2.0 * math.pi)
    if out <= -math.pi:
        out = math.pi
    return out


@dataclass
class VectorMap:
    """Complete scene description: center, ground plane, regions, lanes.

    Ground elevation is a single constant (flat intersection). Point
    lookups resolve overlapping regions by priority (descending), ties by
    declaration order; boundary points count as inside.
    """

    name: str
    center: tuple[float, float]
    regions: list[Region]
    lanes: list[Lane]
    ground_elevation: float = 0.0
    recommended_roi_radius: float | None = None
    _lookup: list = field(init=False, repr=False)

    def __post_init__(self):
        cx, cy = float(self.center[0]), float(self.center[1])
        if not (math.isfinite(cx) and math.isfinite(cy)):
            raise ValidationError(f"map {self.name!r}: center must be finite")
        self.center = (cx, cy)
        if not math.isfinite(self.ground_elevation):
            raise ValidationError(
                f"map {self.name!r}: ground_elevation must be finite"
            )
        if not self.regions:
            raise ValidationError(f"map {self.name!r}: at least one region required")
        seen: set[str] = set()
        for r in self.regions:
            if r.name in seen:
                raise ValidationError(
                    f"map {self.name!r}: duplicate region name {r.name!r}"
                )
            seen.add(r.name)
        seen = set()
        for lane in self.lanes:
            if lane.id in seen:
                raise ValidationError(
                    f"map {self.name!r}: duplicate lane id {lane.id!r}"
                )
            seen.add(lane.id)
        if self.recommended_roi_radius is not None and not (
            math.isfinite(self.recommended_roi_radius)
            and self.recommended_roi_radius > 0
        ):
            raise ValidationError(
                f"map {self.name!r}: recommended_roi_radius must be positive"
            )
        # Resolve lookup order once: priority desc, then declaration order.
        order = sorted(
            range(len(self.regions)),
            key=lambda i: (-self.regions[i].priority, i),
        )
        self._lookup = [
            (self.regions[i], prep(self.regions[i].shape)) for i in order
        ]

    def region_at(self, x: float, y: float) -> RegionKind | None:
        """Kind of the highest-priority region covering (x, y), or None.

        Boundary-inclusive: a point exactly on an edge or vertex belongs
        to the region.
        """
        pt = Point(float(x), float(y))
        for region, prepared in self._lookup:
            if prepared.covers(pt):
                return region.kind
        return None

    def kinds_at(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        """Region-kind lookup over flat point arrays.

        Returns int8 RegionKind values, 0 where no region covers the
        point. Same priority rules as region_at.
        """
        xs = np.asarray(xs, dtype=np.float64).ravel()
        ys = np.asarray(ys, dtype=np.float64).ravel()
        out = np.zeros(xs.shape[0], dtype=np.int8)
        pts = [Point(float(x), float(y)) for x, y in zip(xs, ys)]
        remaining = np.arange(xs.shape[0])
        for region, prepared in self._lookup:
            if remaining.size == 0:
                break
            hit = np.fromiter(
                (prepared.covers(pts[i]) for i in remaining),
                dtype=bool,
                count=remaining.size,
            )
            out[remaining[hit]] = int(region.kind)
            remaining = remaining[~hit]
        return out


def region_at(vmap: VectorMap, x: float, y: float) -> RegionKind | None:
    """Functional form of VectorMap.region_at."""
    return vmap.region_at(x, y)
