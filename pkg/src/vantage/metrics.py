"""Surrogate metrics and the evaluation pipeline.

Three per-placement scores over the voxelized ROI:

- coverage C: weight-fraction of region-labeled voxels perceived by at
  least one ray;
- occlusion robustness O: average over traffic frames of the fraction
  of baseline-visible voxels still reached when rays truncate at their
  first vehicle hit (higher = less occlusion);
- information gain IG: fraction of total occupancy-prior entropy
  removed by observing the visible set (natural log).

The fused score is their weighted sum, default 0.3/0.5/0.2.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DegenerateSceneError, ValidationError
from .grid import RoiSpec, VisibilityField, VoxelGrid, build_roi
from .scene import RegionKind, VectorMap
from .sensors import Placement, RayBundle, placement_rays, validate_iu
from .traffic import (
    TrafficConfig,
    TrafficSequence,
    VehicleDims,
    generate_frames,
    occupancy_probabilities,
    pack_frames,
)

DEFAULT_REGION_WEIGHTS = {
    RegionKind.DRIVEWAY: 0.22,
    RegionKind.JUNCTION: 0.25,
    RegionKind.CROSSWALK: 0.23,
    RegionKind.SIDEWALK: 0.17,
    RegionKind.SHOULDER: 0.13,
}

DEFAULT_FUSION = (0.3, 0.5, 0.2)

_FUSION_SUM_TOL = 1e-9


def _worker_count() -> int:
    env = os.environ.get("VANTAGE_WORKERS", "").strip()
    if env:
        return max(1, int(env))
    return max(1, os.cpu_count() or 1)


@dataclass(frozen=True)
class MetricWeights:
    region: dict = field(default_factory=lambda: dict(DEFAULT_REGION_WEIGHTS))
    fusion: tuple[float, float, float] = DEFAULT_FUSION

    def __post_init__(self):
        reg = {}
        for kind, w in self.region.items():
            kind = RegionKind(kind) if not isinstance(kind, RegionKind) \
                else kind
            w = float(w)
            if not (w >= 0 and math.isfinite(w)):
                raise ValidationError(
                    f"region weight for {kind.name} must be >= 0, got {w}")
            reg[kind] = w
        object.__setattr__(self, "region", reg)
        fusion = tuple(float(v) for v in self.fusion)
        object.__setattr__(self, "fusion", fusion)
        if len(fusion) != 3:
            raise ValidationError("fusion weights must be a triple")
        s = fusion[0] + fusion[1] + fusion[2]
        if abs(s - 1.0) > _FUSION_SUM_TOL:
            raise ValidationError(
                f"fusion weights must sum to 1, got {s!r}")

    def weight_table(self) -> np.ndarray:
        """RegionKind value -> weight lookup (index 0 = unlabeled = 0)."""
        table = np.zeros(8, dtype=np.float64)
        for kind, w in self.region.items():
            table[int(kind)] = w
        return table


@dataclass
class MetricsReport:
    coverage: float
    occlusion: float | None
    information_gain: float
    score: float | None
    per_region: dict
    core: dict
    counts: dict
    config: dict
    timing: dict
    warnings: list

    def to_dict(self) -> dict:
        return {
            "metrics": {
                "coverage": self.coverage,
                "occlusion": self.occlusion,
                "information_gain": self.information_gain,
                "score": self.score,
            },
            "per_region_coverage": self.per_region,
            "core": self.core,
            "counts": self.counts,
            "config": self.config,
            "timing": self.timing,
            "warnings": list(self.warnings),
        }


def coverage(grid: VoxelGrid, vis: VisibilityField,
             weights: MetricWeights | None = None) -> float:
    """Weighted fraction of region-labeled active voxels that are
    visible. Voxels without a region label carry zero weight on both
    sides of the ratio."""
    weights = weights or MetricWeights()
    table = weights.weight_table()
    w = table[grid.region_kind]
    w[~grid.active] = 0.0
    denom = float(w.sum())
    if denom <= 0.0:
        raise DegenerateSceneError(
            "no active voxel carries region weight; coverage undefined")
    num = float(w[vis.f].sum())
    return num / denom


def information_gain(grid: VoxelGrid, vis: VisibilityField,
                     warn: list | None = None) -> float:
    """1 - residual/total occupancy entropy; visible voxels contribute
    zero residual. Returns 0 (with a warning) when the prior carries
    no entropy at all."""
    h = _entropy_terms(grid.occupancy_p)
    total = float(h[grid.active].sum())
    if total == 0.0:
        msg = ("occupancy prior has zero entropy; information gain "
               "defined as 0")
        if warn is not None:
            warn.append(msg)
        return 0.0
    residual = float(h[grid.active & ~vis.f].sum())
    return 1.0 - residual / total


def _entropy_terms(p: np.ndarray) -> np.ndarray:
    # binary entropy in nats with the 0*log(0) = 0 convention
    p = np.clip(p, 0.0, 1.0)
    out = np.zeros_like(p)
    inside = (p > 0.0) & (p < 1.0)
    q = p[inside]
    out[inside] = -(q * np.log(q) + (1.0 - q) * np.log1p(-q))
    return out


def fuse(c: float, o: float, ig: float,
         weights: MetricWeights | None = None) -> float:
    weights = weights or MetricWeights()
    wc, wo, wig = weights.fusion
    s = wc + wo + wig
    if abs(s - 1.0) > _FUSION_SUM_TOL:
        raise ValidationError(f"fusion weights must sum to 1, got {s!r}")
    return wc * c + wo * o + wig * ig


# ---------------------------------------------------------------------------
# visibility and occlusion drivers


def _traverse_sensor(bundle: RayBundle, grid: VoxelGrid):
    n = bundle.dirs.shape[0]
    origins = np.broadcast_to(bundle.origin, (n, 3))
    t_arr = np.full(n, bundle.t_max)
    return kernels.traverse_bundle(origins, bundle.dirs, t_arr,
                                   np.asarray(grid.origin), grid.edge,
                                   grid.dims)


def compute_visibility(grid: VoxelGrid, bundles: dict[str, RayBundle],
                       workers: int | None = None):
    """Traverse every sensor bundle and union the perceived voxels.

    Returns (vis, per_sensor_csr, per_sensor_visible_counts). Sensors
    are traversed on a thread pool; results merge in declaration
    order, so the output is identical for any worker count.
    """
    vis = VisibilityField(grid)
    order = list(bundles)
    csr = {}
    if order:
        workers = workers or _worker_count()
        with ThreadPoolExecutor(max_workers=min(workers, len(order))) as ex:
            results = list(ex.map(
                lambda sid: _traverse_sensor(bundles[sid], grid), order))
        for sid, res in zip(order, results):
            csr[sid] = res
    counts = {}
    for sid in order:
        _, vox, _ = csr[sid]
        act = vox[grid.active[vox]]
        vis.f[act] = True
        counts[sid] = int(np.unique(act).size)
    return vis, csr, counts


def _inverse_csr(grid: VoxelGrid, vis: VisibilityField, bundles, csr):
    """Entries regrouped voxel-major over the visible set.

    Returns (visible_lin, inv_ptr, inv_ray, inv_t, ray_offsets) where
    ray ids are global across bundles in declaration order.
    """
    visible_lin = np.flatnonzero(vis.f)
    nv = visible_lin.size
    compact = np.full(grid.n_voxels, -1, dtype=np.int64)
    compact[visible_lin] = np.arange(nv)
    vox_parts, ray_parts, t_parts = [], [], []
    offsets = {}
    off = 0
    for sid, bundle in bundles.items():
        # pop so the big forward arrays free as they are consumed
        ptr, vox, entry = csr.pop(sid)
        nr = bundle.dirs.shape[0]
        cid = compact[vox]
        keep = cid >= 0
        ray_local = np.repeat(np.arange(nr, dtype=np.int64), np.diff(ptr))
        vox_parts.append(cid[keep].astype(np.int64))
        ray_parts.append((ray_local[keep] + off).astype(np.int32))
        t_parts.append(entry[keep])
        offsets[sid] = off
        off += nr
    vox_c = np.concatenate(vox_parts) if vox_parts else np.zeros(0, np.int64)
    ray_c = np.concatenate(ray_parts) if ray_parts else np.zeros(0, np.int32)
    t_c = np.concatenate(t_parts) if t_parts else np.zeros(0, np.float64)
    order = np.argsort(vox_c, kind="stable")
    inv_ray = np.ascontiguousarray(ray_c[order])
    inv_t = np.ascontiguousarray(t_c[order])
    seg = np.bincount(vox_c, minlength=nv) if vox_c.size else np.zeros(nv, np.int64)
    inv_ptr = np.zeros(nv + 1, dtype=np.int64)
    np.cumsum(seg, out=inv_ptr[1:])
    return visible_lin, inv_ptr, inv_ray, inv_t, offsets, off


def _frame_thresholds(bundles, frame_boxes: np.ndarray, total_rays: int):
    """Per-ray truncation parameter for one frame: +inf when the ray
    is unblocked, -1 when blocked at its origin (reaches nothing,
    entries at t=0 included), else the hit parameter."""
    thresh = np.full(total_rays, np.inf)
    off = 0
    for bundle in bundles.values():
        nr = bundle.dirs.shape[0]
        if frame_boxes.shape[0]:
            hits = kernels.first_hits_from(bundle.origin, bundle.dirs,
                                           bundle.t_max, frame_boxes)
            hits[hits == 0.0] = -1.0
            thresh[off:off + nr] = hits
        off += nr
    return thresh


def occlusion(grid: VoxelGrid, vis: VisibilityField,
              bundles: dict[str, RayBundle], seq: TrafficSequence,
              workers: int | None = None,
              _csr=None, _freq_out: list | None = None) -> float:
    """Average perceived fraction of the baseline visible set across
    traffic frames, rays truncated at their first box hit."""
    if vis.n_visible == 0:
        raise DegenerateSceneError(
            "baseline visible set is empty; occlusion undefined")
    if seq.n_frames < 1:
        raise ValidationError("traffic sequence has no frames")
    csr = _csr
    if csr is None:
        csr = {sid: _traverse_sensor(bundles[sid], grid) for sid in bundles}
    visible_lin, inv_ptr, inv_ray, inv_t, _, total_rays = _inverse_csr(
        grid, vis, bundles, csr)
    nv = visible_lin.size

    frame_ptr, packed = pack_frames(seq.frames)
    n_frames = seq.n_frames
    occluded = np.zeros(n_frames, dtype=np.int64)
    workers = workers or _worker_count()
    workers = max(1, min(workers, n_frames))

    freq_parts = []

    def run_span(span):
        lo, hi = span
        freq = np.zeros(nv, dtype=np.uint32)
        for k in range(lo, hi):
            boxes_k = packed[frame_ptr[k]:frame_ptr[k + 1]]
            thresh = _frame_thresholds(bundles, boxes_k, total_rays)
            occluded[k] = kernels.occlusion_scan(
                inv_ptr, inv_ray, inv_t, thresh, freq)
        return freq

    bounds = np.linspace(0, n_frames, workers + 1).astype(int)
    spans = [(int(bounds[i]), int(bounds[i + 1])) for i in range(workers)
             if bounds[i] < bounds[i + 1]]
    if len(spans) <= 1:
        freq_parts.append(run_span((0, n_frames)))
    else:
        with ThreadPoolExecutor(max_workers=len(spans)) as ex:
            freq_parts = list(ex.map(run_span, spans))
    if _freq_out is not None:
        total_freq = freq_parts[0].copy()
        for part in freq_parts[1:]:
            total_freq += part
        _freq_out.append((visible_lin, total_freq))
    per_frame = 1.0 - occluded.astype(np.float64) / float(nv)
    return float(per_frame.mean())


# ---------------------------------------------------------------------------
# full pipeline


def clone_grid(base: VoxelGrid) -> VoxelGrid:
    """Share the immutable arrays of a built grid, fresh occupancy.

    Lets a cached grid serve concurrent evaluations: occupancy_p is
    the only per-evaluation state.
    """
    return VoxelGrid(base.spec, base.dims, base.origin, base.active,
                     base.region_kind, base.weight)


def evaluate(vmap: VectorMap, roi: RoiSpec, placement: Placement,
             weights: MetricWeights | None = None,
             traffic: TrafficConfig | None = None,
             vehicle_dims: VehicleDims | None = None,
             max_voxels: int | None = None,
             workers: int | None = None,
             base_grid: VoxelGrid | None = None,
             fields_out: dict | None = None) -> MetricsReport:
    """Run the whole scoring pipeline on one placement.

    base_grid: an already-built grid for this (map, roi) pair; it is
    cloned, never mutated. fields_out: when a dict is passed, the
    per-voxel arrays (grid, visibility, occupancy_p,
    occlusion_frequency) are stored into it for heatmap/BEV export.
    """
    weights = weights or MetricWeights()
    traffic = traffic or TrafficConfig()
    vehicle_dims = vehicle_dims or VehicleDims()
    warnings: list[str] = []
    timing: dict[str, float] = {}

    def stage(name):
        timing[name] = time.perf_counter()

    def stage_done(name):
        timing[name] = round(time.perf_counter() - timing[name], 6)

    for iu in placement.ius:
        report = validate_iu(iu)
        if not report.ok:
            details = "; ".join(
                f"{v.sensor_a}/{v.sensor_b} {v.constraint}="
                f"{v.measured:.3f}m (limit {v.limit}m)"
                for v in report.violations)
            raise ValidationError(
                f"iu {iu.id!r} violates co-location constraints: {details}")

    stage("build_roi")
    if base_grid is not None and base_grid.spec == roi:
        grid = clone_grid(base_grid)
    else:
        kwargs = {"region_weights": weights.region}
        if max_voxels is not None:
            kwargs["max_voxels"] = max_voxels
        grid = build_roi(vmap, roi, **kwargs)
    stage_done("build_roi")

    stage("rays")
    bundles = placement_rays(placement)
    stage_done("rays")

    stage("visibility")
    vis, csr, sensor_visible = compute_visibility(grid, bundles, workers)
    stage_done("visibility")

    counts = {
        "voxels": grid.n_voxels,
        "active_voxels": grid.n_active,
        "visible_voxels": vis.n_visible,
        "rays": int(sum(b.dirs.shape[0] for b in bundles.values())),
        "per_sensor_visible": sensor_visible,
    }
    core_mask = grid.core_mask()

    c_val = coverage(grid, vis, weights)
    per_region = _region_breakdown(grid, vis, weights)
    core = {"coverage": _masked_coverage(grid, vis, weights, core_mask)}

    if vis.n_visible == 0:
        warnings.append(
            "placement perceives no voxels; occlusion is not applicable "
            "and the fused score is omitted")
        if fields_out is not None:
            fields_out.update(
                grid=grid, visibility=vis.f.copy(),
                occupancy_p=grid.occupancy_p.copy(),
                occlusion_frequency=np.zeros(grid.n_voxels))
        return MetricsReport(
            coverage=c_val, occlusion=None, information_gain=0.0,
            score=None, per_region=per_region,
            core={**core, "occlusion": None, "information_gain": 0.0},
            counts={**counts, "traffic_frames": 0, "retained_waypoints": 0},
            config=_config_echo(roi, weights, traffic, vehicle_dims, bundles,
                                workers),
            timing=timing, warnings=warnings)

    stage("traffic")
    seq = generate_frames(vmap, grid, vis, vehicle_dims, traffic)
    occupancy_probabilities(grid, seq)
    stage_done("traffic")
    counts["traffic_frames"] = seq.n_frames
    counts["retained_waypoints"] = seq.retained_waypoints
    sizes = [len(f) for f in seq.frames]
    counts["boxes_per_frame"] = [min(sizes), max(sizes)]

    stage("occlusion")
    freq_out: list = []
    o_val = occlusion(grid, vis, bundles, seq, workers,
                      _csr=csr, _freq_out=freq_out)
    stage_done("occlusion")

    ig_val = information_gain(grid, vis, warnings)

    visible_lin, freq = freq_out[0]
    core_visible = core_mask[visible_lin]
    n_core_vis = int(core_visible.sum())
    if n_core_vis:
        core_occ = 1.0 - float(freq[core_visible].sum()) / (
            seq.n_frames * n_core_vis)
    else:
        core_occ = None
    core["occlusion"] = core_occ
    core["information_gain"] = _masked_ig(grid, vis, core_mask)

    if fields_out is not None:
        occ_freq = np.zeros(grid.n_voxels)
        occ_freq[visible_lin] = freq.astype(np.float64) / seq.n_frames
        fields_out.update(
            grid=grid, visibility=vis.f.copy(),
            occupancy_p=grid.occupancy_p.copy(),
            occlusion_frequency=occ_freq)

    score = fuse(c_val, o_val, ig_val, weights)
    return MetricsReport(
        coverage=c_val, occlusion=o_val, information_gain=ig_val,
        score=score, per_region=per_region, core=core, counts=counts,
        config=_config_echo(roi, weights, traffic, vehicle_dims, bundles,
                            workers),
        timing=timing, warnings=warnings)


def _region_breakdown(grid, vis, weights):
    out = {}
    for kind in RegionKind:
        mask = grid.active & (grid.region_kind == int(kind))
        total = int(mask.sum())
        if total == 0:
            continue
        visible = int((mask & vis.f).sum())
        out[kind.name.lower()] = {
            "voxels": total,
            "visible": visible,
            "fraction": visible / total,
            "weight": weights.region.get(kind, 0.0),
        }
    return out


def _masked_coverage(grid, vis, weights, mask):
    table = weights.weight_table()
    w = table[grid.region_kind]
    w[~mask] = 0.0
    denom = float(w.sum())
    if denom <= 0.0:
        return None
    return float(w[vis.f & mask].sum()) / denom


def _masked_ig(grid, vis, mask):
    h = _entropy_terms(grid.occupancy_p)
    total = float(h[mask].sum())
    if total == 0.0:
        return 0.0
    return 1.0 - float(h[mask & ~vis.f].sum()) / total


def _config_echo(roi, weights, traffic, vehicle_dims, bundles, workers):
    sensors = {}
    for sid, b in bundles.items():
        sensors[sid] = {
            "kind": b.kind,
            "rays": int(b.dirs.shape[0]),
            "max_range": b.t_max,
        }
    return {
        "roi": {
            "center": list(roi.center),
            "radius": roi.radius,
            "ground": roi.ground,
            "height": roi.height,
            "voxel_edge": roi.voxel_edge,
            "core_radius": roi.core_radius,
        },
        "weights": {
            "region": {k.name.lower(): v for k, v in weights.region.items()},
            "fusion": list(weights.fusion),
        },
        "traffic": {
            "seed": traffic.seed,
            "advance_per_frame": traffic.advance_per_frame,
            "frame_count": traffic.frame_count,
            "lane_ids": list(traffic.lane_ids) if traffic.lane_ids else None,
            "vehicle_dims": [vehicle_dims.length, vehicle_dims.width,
                             vehicle_dims.height],
        },
        "backend": kernels.backend_name(),
        "workers": workers or _worker_count(),
    }
