"""Sensor models: ray-bundle generation and co-location validation.

A camera emits one ray per downsampled pixel through its pinhole
model; a LiDAR emits a fan of azimuth/elevation beams. Sensors are
grouped into infrastructure units (IUs) whose members must sit within
2 m horizontally and 4 m vertically of each other and share a
processor.

Pose convention: right-handed world frame, +z up. Intrinsic rotation
order yaw (about +z), then pitch, then roll; positive pitch tilts the
forward axis upward. At zero pose the sensor forward axis is world +x.
The camera optical frame (x right, y down, z forward) maps onto the
pose frame as (u, v, w) -> (w, -u, -v).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

MAX_IU_XY_DIST = 2.0
MAX_IU_Z_DIST = 4.0

# guards floor() against values like 69.999999999999986 that are an
# exact product mathematically
_FLOOR_EPS = 1e-9


@dataclass(frozen=True)
class Pose:
    position: tuple[float, float, float]
    yaw: float = 0.0
    pitch: float = 0.0
    roll: float = 0.0

    def __post_init__(self):
        pos = tuple(float(v) for v in self.position)
        object.__setattr__(self, "position", pos)
        for name in ("yaw", "pitch", "roll"):
            v = float(getattr(self, name))
            object.__setattr__(self, name, v)
            if not math.isfinite(v):
                raise ValidationError(f"pose {name} must be finite")
        if len(pos) != 3 or not all(math.isfinite(v) for v in pos):
            raise ValidationError("pose position must be a finite 3D point")

    def rotation(self) -> np.ndarray:
        """World-from-sensor rotation matrix."""
        cy, sy = math.cos(self.yaw), math.sin(self.yaw)
        cp, sp = math.cos(-self.pitch), math.sin(-self.pitch)
        cr, sr = math.cos(self.roll), math.sin(self.roll)
        rz = np.array([[cy, -sy, 0.0], [sy, cy, 0.0], [0.0, 0.0, 1.0]])
        ry = np.array([[cp, 0.0, sp], [0.0, 1.0, 0.0], [-sp, 0.0, cp]])
        rx = np.array([[1.0, 0.0, 0.0], [0.0, cr, -sr], [0.0, sr, cr]])
        return rz @ ry @ rx


@dataclass(frozen=True)
class CameraSpec:
    id: str
    pose: Pose
    focal_px: float
    resolution: tuple[int, int]  # (width, height)
    principal: tuple[float, float] | None = None
    downsample_rate: float = 0.05
    max_range: float = 50.0

    def __post_init__(self):
        if not self.id:
            raise ValidationError("camera id must be a nonempty string")
        w, h = (int(v) for v in self.resolution)
        object.__setattr__(self, "resolution", (w, h))
        if w <= 0 or h <= 0:
            raise ValidationError(f"camera {self.id}: resolution must be positive")
        if self.principal is None:
            object.__setattr__(self, "principal", (w / 2.0, h / 2.0))
        else:
            object.__setattr__(
                self, "principal", tuple(float(v) for v in self.principal))
        object.__setattr__(self, "focal_px", float(self.focal_px))
        object.__setattr__(self, "downsample_rate", float(self.downsample_rate))
        object.__setattr__(self, "max_range", float(self.max_range))
        if not (self.focal_px > 0 and math.isfinite(self.focal_px)):
            raise ValidationError(f"camera {self.id}: focal_px must be > 0")
        lam = self.downsample_rate
        if not (0.0 < lam <= 1.0):
            raise ValidationError(
                f"camera {self.id}: downsample_rate must be in (0, 1], got {lam}")
        if self.grid_shape[0] < 1 or self.grid_shape[1] < 1:
            raise ValidationError(
                f"camera {self.id}: downsampled grid is empty "
                f"({h}x{w} at rate {lam})")
        if not (self.max_range > 0 and math.isfinite(self.max_range)):
            raise ValidationError(f"camera {self.id}: max_range must be > 0")

    @property
    def grid_shape(self) -> tuple[int, int]:
        """(rows, cols) of the downsampled ray lattice."""
        w, h = self.resolution
        lam = self.downsample_rate
        return (int(math.floor(h * lam + _FLOOR_EPS)),
                int(math.floor(w * lam + _FLOOR_EPS)))

    @property
    def n_rays(self) -> int:
        r, c = self.grid_shape
        return r * c


@dataclass(frozen=True)
class LidarSpec:
    id: str
    pose: Pose
    h_fov: float = 2.0 * math.pi
    v_fov: float = math.radians(30.0)
    azimuth_steps: int = 1800
    elevation_steps: int = 32
    max_range: float = 50.0

    def __post_init__(self):
        if not self.id:
            raise ValidationError("lidar id must be a nonempty string")
        object.__setattr__(self, "h_fov", float(self.h_fov))
        object.__setattr__(self, "v_fov", float(self.v_fov))
        object.__setattr__(self, "azimuth_steps", int(self.azimuth_steps))
        object.__setattr__(self, "elevation_steps", int(self.elevation_steps))
        object.__setattr__(self, "max_range", float(self.max_range))
        if not (0.0 < self.h_fov <= 2.0 * math.pi + 1e-12):
            raise ValidationError(
                f"lidar {self.id}: h_fov must be in (0, 2*pi], got {self.h_fov}")
        if not (0.0 < self.v_fov < math.pi):
            raise ValidationError(
                f"lidar {self.id}: v_fov must be in (0, pi), got {self.v_fov}")
        if self.azimuth_steps < 1 or self.elevation_steps < 1:
            raise ValidationError(
                f"lidar {self.id}: azimuth/elevation steps must be >= 1")
        if not (self.max_range > 0 and math.isfinite(self.max_range)):
            raise ValidationError(f"lidar {self.id}: max_range must be > 0")

    @property
    def n_rays(self) -> int:
        return self.azimuth_steps * self.elevation_steps


@dataclass(frozen=True)
class InfrastructureUnit:
    id: str
    sensors: tuple
    processor_id: str

    def __post_init__(self):
        if not self.id:
            raise ValidationError("iu id must be a nonempty string")
        if not self.processor_id:
            raise ValidationError(f"iu {self.id}: processor_id must be nonempty")
        sensors = tuple(self.sensors)
        object.__setattr__(self, "sensors", sensors)
        for s in sensors:
            if not isinstance(s, (CameraSpec, LidarSpec)):
                raise ValidationError(
                    f"iu {self.id}: sensors must be CameraSpec or LidarSpec")


@dataclass(frozen=True)
class Placement:
    ius: tuple

    def __post_init__(self):
        ius = tuple(self.ius)
        object.__setattr__(self, "ius", ius)
        seen_iu = set()
        seen_sensor = set()
        for iu in ius:
            if not isinstance(iu, InfrastructureUnit):
                raise ValidationError("placement entries must be InfrastructureUnit")
            if iu.id in seen_iu:
                raise ValidationError(f"duplicate iu id {iu.id!r}")
            seen_iu.add(iu.id)
            for s in iu.sensors:
                if s.id in seen_sensor:
                    raise ValidationError(f"duplicate sensor id {s.id!r}")
                seen_sensor.add(s.id)

    def all_sensors(self):
        for iu in self.ius:
            yield from iu.sensors

    @property
    def n_sensors(self) -> int:
        return sum(len(iu.sensors) for iu in self.ius)


@dataclass(frozen=True)
class RayBundle:
    """All rays of one sensor: shared origin, per-ray unit directions."""

    sensor_id: str
    kind: str  # "camera" | "lidar"
    origin: np.ndarray  # (3,)
    dirs: np.ndarray  # (n, 3)
    t_max: float


@dataclass
class IuViolation:
    sensor_a: str
    sensor_b: str
    constraint: str  # "xy" | "z"
    measured: float
    limit: float


@dataclass
class IuReport:
    iu_id: str
    violations: list[IuViolation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def camera_rays(cam: CameraSpec) -> list:
    """One Ray per downsampled pixel, row-major over (i, j)."""
    from .grid import Ray
    dirs = camera_dirs(cam)
    o = cam.pose.position
    return [Ray(o, tuple(d), cam.max_range) for d in dirs]


def camera_dirs(cam: CameraSpec) -> np.ndarray:
    """World-frame unit directions of the camera's ray lattice (n, 3)."""
    rows, cols = cam.grid_shape
    lam = cam.downsample_rate
    f = cam.focal_px
    cx, cy = cam.principal
    i = np.arange(1, rows + 1, dtype=np.float64)
    j = np.arange(1, cols + 1, dtype=np.float64)
    # downsampled pixel centers in original image coordinates
    h_i = (i - 0.5) / lam
    w_j = (j - 0.5) / lam
    u = (w_j - cx) / f  # optical x: right
    v = (h_i - cy) / f  # optical y: down
    uu, vv = np.meshgrid(u, v, indexing="xy")
    cam_dirs = np.stack(
        [uu.ravel(), vv.ravel(), np.ones(rows * cols)], axis=1)
    cam_dirs /= np.linalg.norm(cam_dirs, axis=1, keepdims=True)
    # optical (u, v, w) -> pose frame (w, -u, -v), then world
    local = np.stack(
        [cam_dirs[:, 2], -cam_dirs[:, 0], -cam_dirs[:, 1]], axis=1)
    return local @ cam.pose.rotation().T


def lidar_rays(lidar: LidarSpec) -> list:
    """I*J Rays, elevation-major ordering."""
    from .grid import Ray
    dirs = lidar_dirs(lidar)
    o = lidar.pose.position
    return [Ray(o, tuple(d), lidar.max_range) for d in dirs]


def lidar_dirs(lidar: LidarSpec) -> np.ndarray:
    """World-frame unit directions of the LiDAR fan (I*J, 3).

    Angle lattices are half-open: theta_j = -h_fov/2 + j*h_fov/J for
    j = 1..J (never includes -h_fov/2 itself), and likewise psi_i over
    i = 1..I.
    """
    jj = np.arange(1, lidar.azimuth_steps + 1, dtype=np.float64)
    ii = np.arange(1, lidar.elevation_steps + 1, dtype=np.float64)
    theta = -lidar.h_fov / 2.0 + jj * (lidar.h_fov / lidar.azimuth_steps)
    psi = -lidar.v_fov / 2.0 + ii * (lidar.v_fov / lidar.elevation_steps)
    tt, pp = np.meshgrid(theta, psi, indexing="xy")
    tt = tt.ravel()
    pp = pp.ravel()
    local = np.stack([np.cos(pp) * np.cos(tt),
                      np.cos(pp) * np.sin(tt),
                      np.sin(pp)], axis=1)
    return local @ lidar.pose.rotation().T


def sensor_bundle(spec) -> RayBundle:
    if isinstance(spec, CameraSpec):
        dirs = camera_dirs(spec)
        kind = "camera"
    elif isinstance(spec, LidarSpec):
        dirs = lidar_dirs(spec)
        kind = "lidar"
    else:
        raise ValidationError(f"unknown sensor spec type {type(spec).__name__}")
    return RayBundle(
        sensor_id=spec.id,
        kind=kind,
        origin=np.asarray(spec.pose.position, dtype=np.float64),
        dirs=np.ascontiguousarray(dirs, dtype=np.float64),
        t_max=float(spec.max_range),
    )


def validate_iu(iu: InfrastructureUnit) -> IuReport:
    """Check pairwise co-location bounds; violations are reported, not
    raised. Positions compare by pose, processor is shared by
    construction."""
    report = IuReport(iu_id=iu.id)
    sensors = iu.sensors
    for a in range(len(sensors)):
        for b in range(a + 1, len(sensors)):
            pa = sensors[a].pose.position
            pb = sensors[b].pose.position
            xy = math.hypot(pa[0] - pb[0], pa[1] - pb[1])
            dz = abs(pa[2] - pb[2])
            if xy > MAX_IU_XY_DIST:
                report.violations.append(IuViolation(
                    sensors[a].id, sensors[b].id, "xy", xy, MAX_IU_XY_DIST))
            if dz > MAX_IU_Z_DIST:
                report.violations.append(IuViolation(
                    sensors[a].id, sensors[b].id, "z", dz, MAX_IU_Z_DIST))
    return report


def placement_rays(p: Placement) -> dict[str, RayBundle]:
    """Sensor-id -> RayBundle, in placement declaration order."""
    out: dict[str, RayBundle] = {}
    for iu in p.ius:
        for spec in iu.sensors:
            try:
                out[spec.id] = sensor_bundle(spec)
            except ValidationError as exc:
                raise ValidationError(f"sensor {spec.id!r}: {exc}") from exc
    return out
