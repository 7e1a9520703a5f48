"""vantage: surrogate-metric evaluation of roadside sensor placements.

Scores heterogeneous camera/LiDAR deployments at road intersections by
ray-casting into a voxelized region of interest: weighted perception
coverage, traffic-conditioned occlusion robustness, and information
gain over a vehicle-occupancy prior, fused into a single placement
score. Exposed as a library, a CLI (``vantage``), and a local HTTP
service with an interactive placement-explorer UI.
"""

from .errors import (
    DegenerateSceneError,
    ParseError,
    ResourceLimitError,
    ValidationError,
    VantageError,
)
from .scene import (
    Lane,
    Region,
    RegionKind,
    VectorMap,
    heading_between,
    normalize_heading,
    region_at,
)
from .grid import (
    Ray,
    RoiSpec,
    VisibilityField,
    VoxelGrid,
    build_roi,
    mark_visible,
    traverse_ray,
)
from .sensors import (
    CameraSpec,
    InfrastructureUnit,
    LidarSpec,
    Placement,
    Pose,
    RayBundle,
    camera_rays,
    lidar_rays,
    placement_rays,
    validate_iu,
)
from .traffic import (
    OrientedBox,
    TrafficConfig,
    TrafficSequence,
    VehicleDims,
    generate_frames,
    occupancy_probabilities,
    ray_first_hit,
)
from .metrics import (
    MetricWeights,
    MetricsReport,
    clone_grid,
    compute_visibility,
    coverage,
    evaluate,
    fuse,
    information_gain,
    occlusion,
)

__version__ = "0.1.0"

__all__ = [
    "VantageError",
    "ValidationError",
    "ParseError",
    "ResourceLimitError",
    "DegenerateSceneError",
    "RegionKind",
    "Region",
    "Lane",
    "VectorMap",
    "region_at",
    "heading_between",
    "normalize_heading",
    "RoiSpec",
    "VoxelGrid",
    "Ray",
    "VisibilityField",
    "build_roi",
    "mark_visible",
    "traverse_ray",
    "Pose",
    "CameraSpec",
    "LidarSpec",
    "InfrastructureUnit",
    "Placement",
    "RayBundle",
    "camera_rays",
    "lidar_rays",
    "validate_iu",
    "placement_rays",
    "VehicleDims",
    "OrientedBox",
    "TrafficConfig",
    "TrafficSequence",
    "generate_frames",
    "ray_first_hit",
    "occupancy_probabilities",
    "MetricWeights",
    "MetricsReport",
    "coverage",
    "occlusion",
    "information_gain",
    "fuse",
    "evaluate",
    "clone_grid",
    "compute_visibility",
    "__version__",
]
