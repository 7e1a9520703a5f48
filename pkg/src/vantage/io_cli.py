"""File formats (map, scenario, report, heatmap) and the CLI.

Documents are YAML with a format_version field; JSON payloads parse
through the same loader. Angles live in documents as degrees under
*_deg keys and are radians everywhere in code. Exit codes: 0 success,
1 validation failure, 2 runtime error.
"""

from __future__ import annotations

import argparse
import copy
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from .errors import ParseError, ValidationError, VantageError
from .grid import RoiSpec, VoxelGrid
from .metrics import (
    DEFAULT_FUSION,
    DEFAULT_REGION_WEIGHTS,
    MetricsReport,
    MetricWeights,
    evaluate,
)
from .scene import Lane, Region, RegionKind, VectorMap
from .sensors import CameraSpec, InfrastructureUnit, LidarSpec, Placement, Pose, validate_iu
from .traffic import TrafficConfig, VehicleDims

FORMAT_VERSION = 1


# ---------------------------------------------------------------------------
# primitive field access with path context


def _err(path, msg):
    raise ParseError(f"{path}: {msg}")


def _as_dict(value, path):
    if not isinstance(value, dict):
        _err(path, f"expected a mapping, got {type(value).__name__}")
    return value


def _as_list(value, path):
    if not isinstance(value, list):
        _err(path, f"expected a list, got {type(value).__name__}")
    return value


def _need(data, key, path):
    if key not in data:
        _err(path, f"missing required field {key!r}")
    return data[key]


def _num(value, path):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _err(path, f"expected a number, got {value!r}")
    return float(value)


def _opt_num(data, key, path, default=None):
    if key not in data or data[key] is None:
        return default
    return _num(data[key], f"{path}.{key}")


def _check_version(data, path):
    v = data.get("format_version")
    if v is not None and int(v) != FORMAT_VERSION:
        _err(f"{path}.format_version",
             f"unsupported version {v} (this build reads {FORMAT_VERSION})")


def _wrap_validation(path, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except ValidationError as exc:
        raise ParseError(f"{path}: {exc}") from exc


# ---------------------------------------------------------------------------
# map documents


def parse_map_data(data, source="map") -> VectorMap:
    data = _as_dict(data, source)
    _check_version(data, source)
    name = data.get("name") or Path(str(source)).stem
    center = _as_list(_need(data, "center", source), f"{source}.center")
    if len(center) != 2:
        _err(f"{source}.center", "expected [x, y]")
    regions = []
    for i, rd in enumerate(_as_list(data.get("regions", []),
                                    f"{source}.regions")):
        rp = f"{source}.regions[{i}]"
        rd = _as_dict(rd, rp)
        kind_name = str(_need(rd, "kind", rp))
        kind = _wrap_validation(f"{rp}.kind", RegionKind.from_name, kind_name)
        poly = np.asarray(_as_list(_need(rd, "polygon", rp), f"{rp}.polygon"),
                          dtype=np.float64)
        prio = rd.get("priority")
        regions.append(_wrap_validation(
            rp, Region,
            name=str(rd.get("name", f"region_{i}")),
            kind=kind, polygon=poly,
            priority=None if prio is None else int(prio)))
    lanes = []
    for i, ld in enumerate(_as_list(data.get("lanes", []),
                                    f"{source}.lanes")):
        lp = f"{source}.lanes[{i}]"
        ld = _as_dict(ld, lp)
        wps = np.asarray(_as_list(_need(ld, "waypoints", lp),
                                  f"{lp}.waypoints"), dtype=np.float64)
        lanes.append(_wrap_validation(
            lp, Lane,
            id=str(_need(ld, "id", lp)),
            waypoints=wps,
            nominal_spacing=_opt_num(ld, "nominal_spacing", lp, 4.0)))
    return _wrap_validation(
        source, VectorMap,
        name=str(name),
        center=(_num(center[0], f"{source}.center[0]"),
                _num(center[1], f"{source}.center[1]")),
        regions=regions, lanes=lanes,
        ground_elevation=_opt_num(data, "ground_elevation", source, 0.0),
        recommended_roi_radius=_opt_num(data, "recommended_roi_radius",
                                        source, None))


def load_map(path) -> VectorMap:
    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise FileNotFoundError(f"map file not found: {path}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ParseError(f"{path}: not valid YAML: {exc}") from exc
    return parse_map_data(data, source=str(path))


# ---------------------------------------------------------------------------
# scenario documents


@dataclass
class ScenarioDoc:
    name: str
    vmap: VectorMap
    roi: RoiSpec
    placement: Placement
    weights: MetricWeights
    traffic: TrafficConfig
    vehicle_dims: VehicleDims
    output_format: str
    normalized: dict


def _parse_pose(sd, sp) -> Pose:
    pos = _as_list(_need(sd, "position", sp), f"{sp}.position")
    if len(pos) != 3:
        _err(f"{sp}.position", "expected [x, y, z]")
    return _wrap_validation(
        sp, Pose,
        position=tuple(_num(v, f"{sp}.position") for v in pos),
        yaw=math.radians(_opt_num(sd, "yaw_deg", sp, 0.0)),
        pitch=math.radians(_opt_num(sd, "pitch_deg", sp, 0.0)),
        roll=math.radians(_opt_num(sd, "roll_deg", sp, 0.0)))


def _parse_sensor(sd, sp):
    sd = _as_dict(sd, sp)
    stype = str(_need(sd, "type", sp)).lower()
    sid = str(_need(sd, "id", sp))
    pose = _parse_pose(sd, sp)
    if stype == "camera":
        res = _as_list(_need(sd, "resolution", sp), f"{sp}.resolution")
        if len(res) != 2:
            _err(f"{sp}.resolution", "expected [width, height]")
        principal = sd.get("principal")
        if principal is not None:
            principal = tuple(
                _num(v, f"{sp}.principal")
                for v in _as_list(principal, f"{sp}.principal"))
        return _wrap_validation(
            sp, CameraSpec, id=sid, pose=pose,
            focal_px=_num(_need(sd, "focal_px", sp), f"{sp}.focal_px"),
            resolution=(int(res[0]), int(res[1])),
            principal=principal,
            downsample_rate=_opt_num(sd, "downsample_rate", sp, 0.05),
            max_range=_opt_num(sd, "max_range", sp, 50.0))
    if stype == "lidar":
        return _wrap_validation(
            sp, LidarSpec, id=sid, pose=pose,
            h_fov=math.radians(_opt_num(sd, "h_fov_deg", sp, 360.0)),
            v_fov=math.radians(_opt_num(sd, "v_fov_deg", sp, 30.0)),
            azimuth_steps=int(sd.get("azimuth_steps", 1800)),
            elevation_steps=int(sd.get("elevation_steps", 32)),
            max_range=_opt_num(sd, "max_range", sp, 50.0))
    _err(f"{sp}.type", f"unknown sensor type {stype!r} "
                       "(expected 'camera' or 'lidar')")


def parse_scenario(source, base_dir=None, map_resolver=None) -> ScenarioDoc:
    """Parse a scenario from a path, YAML text, or mapping.

    map_resolver: optional callable name -> VectorMap | None, consulted
    before the filesystem (lets the service resolve registry names).
    """
    origin = "scenario"
    if isinstance(source, (str, Path)) and "\n" not in str(source):
        path = Path(source)
        try:
            text = path.read_text()
        except FileNotFoundError:
            raise FileNotFoundError(f"scenario file not found: {path}") from None
        base_dir = base_dir or path.parent
        origin = str(path)
        data = _load_yaml(text, origin)
    elif isinstance(source, dict):
        data = copy.deepcopy(source)
    else:
        data = _load_yaml(str(source), origin)
    base_dir = Path(base_dir) if base_dir else Path.cwd()
    data = _as_dict(data, origin)
    _check_version(data, origin)

    map_field = _need(data, "map", origin)
    if isinstance(map_field, dict):
        vmap = parse_map_data(map_field, source=f"{origin}.map")
        norm_map = copy.deepcopy(map_field)
    else:
        vmap = None
        if map_resolver is not None:
            vmap = map_resolver(str(map_field))
            norm_map = str(map_field)
        if vmap is None:
            map_path = Path(str(map_field))
            if not map_path.is_absolute():
                map_path = base_dir / map_path
            try:
                vmap = load_map(map_path)
            except FileNotFoundError as exc:
                # a dangling reference is a document problem, not an
                # invocation problem
                _err(f"{origin}.map", str(exc))
            norm_map = str(map_path.resolve())

    roi_d = _as_dict(data.get("roi") or {}, f"{origin}.roi")
    center = roi_d.get("center")
    if center is not None:
        center = _as_list(center, f"{origin}.roi.center")
        if len(center) != 2:
            _err(f"{origin}.roi.center", "expected [x, y]")
        center = (float(center[0]), float(center[1]))
    else:
        center = vmap.center
    radius = _opt_num(roi_d, "radius", f"{origin}.roi",
                      vmap.recommended_roi_radius)
    if radius is None:
        _err(f"{origin}.roi.radius",
             "required (the map declares no recommended_roi_radius)")
    roi = _wrap_validation(
        f"{origin}.roi", RoiSpec, center=center, radius=radius,
        ground=_opt_num(roi_d, "ground", f"{origin}.roi",
                        vmap.ground_elevation),
        height=_opt_num(roi_d, "height", f"{origin}.roi", 4.0),
        voxel_edge=_opt_num(roi_d, "voxel_edge", f"{origin}.roi", 0.5),
        # document default stays valid on small study areas
        core_radius=_opt_num(roi_d, "core_radius", f"{origin}.roi",
                             min(30.0, radius)))

    pl_d = _as_dict(data.get("placement") or {}, f"{origin}.placement")
    ius = []
    for i, iud in enumerate(_as_list(pl_d.get("ius", []),
                                     f"{origin}.placement.ius")):
        ip = f"{origin}.placement.ius[{i}]"
        iud = _as_dict(iud, ip)
        sensors = [
            _parse_sensor(sd, f"{ip}.sensors[{j}]")
            for j, sd in enumerate(_as_list(_need(iud, "sensors", ip),
                                            f"{ip}.sensors"))
        ]
        ius.append(_wrap_validation(
            ip, InfrastructureUnit,
            id=str(_need(iud, "id", ip)),
            sensors=tuple(sensors),
            processor_id=str(_need(iud, "processor_id", ip))))
    placement = _wrap_validation(f"{origin}.placement", Placement, tuple(ius))

    w_d = _as_dict(data.get("weights") or {}, f"{origin}.weights")
    region_w = dict(DEFAULT_REGION_WEIGHTS)
    for key, val in _as_dict(w_d.get("region") or {},
                             f"{origin}.weights.region").items():
        kind = _wrap_validation(f"{origin}.weights.region.{key}",
                                RegionKind.from_name, str(key))
        region_w[kind] = _num(val, f"{origin}.weights.region.{key}")
    fusion = w_d.get("fusion", list(DEFAULT_FUSION))
    fusion = _as_list(fusion, f"{origin}.weights.fusion")
    if len(fusion) != 3:
        _err(f"{origin}.weights.fusion", "expected [w_c, w_o, w_ig]")
    weights = _wrap_validation(
        f"{origin}.weights", MetricWeights,
        region=region_w,
        fusion=tuple(_num(v, f"{origin}.weights.fusion") for v in fusion))

    t_d = _as_dict(data.get("traffic") or {}, f"{origin}.traffic")
    dims_v = t_d.get("vehicle_dims", [10.0, 2.6, 3.5])
    dims_v = _as_list(dims_v, f"{origin}.traffic.vehicle_dims")
    if len(dims_v) != 3:
        _err(f"{origin}.traffic.vehicle_dims",
             "expected [length, width, height]")
    vdims = _wrap_validation(
        f"{origin}.traffic.vehicle_dims", VehicleDims,
        *(_num(v, f"{origin}.traffic.vehicle_dims") for v in dims_v))
    lane_ids = t_d.get("lane_ids")
    if lane_ids is not None:
        lane_ids = tuple(
            str(v) for v in _as_list(lane_ids, f"{origin}.traffic.lane_ids"))
    fc = t_d.get("frame_count")
    traffic = _wrap_validation(
        f"{origin}.traffic", TrafficConfig,
        seed=int(t_d.get("seed", 0)),
        advance_per_frame=_opt_num(t_d, "advance_per_frame",
                                   f"{origin}.traffic", None),
        frame_count=None if fc is None else int(fc),
        lane_ids=lane_ids)

    out_d = _as_dict(data.get("output") or {}, f"{origin}.output")
    output_format = str(out_d.get("format", "structured"))
    if output_format not in ("structured", "tabular"):
        _err(f"{origin}.output.format",
             f"expected 'structured' or 'tabular', got {output_format!r}")

    name = str(data.get("name") or
               (Path(origin).stem if origin != "scenario" else "scenario"))
    normalized = {
        "format_version": FORMAT_VERSION,
        "name": name,
        "map": norm_map,
        "roi": {
            "center": [roi.center[0], roi.center[1]],
            "radius": roi.radius,
            "ground": roi.ground,
            "height": roi.height,
            "voxel_edge": roi.voxel_edge,
            "core_radius": roi.core_radius,
        },
        "placement": {"ius": [_iu_dict(iu) for iu in placement.ius]},
        "weights": {
            "region": {k.name.lower(): v for k, v in weights.region.items()},
            "fusion": list(weights.fusion),
        },
        "traffic": {
            "seed": traffic.seed,
            "advance_per_frame": traffic.advance_per_frame,
            "frame_count": traffic.frame_count,
            "lane_ids": list(traffic.lane_ids) if traffic.lane_ids else None,
            "vehicle_dims": [vdims.length, vdims.width, vdims.height],
        },
        "output": {"format": output_format},
    }
    return ScenarioDoc(name=name, vmap=vmap, roi=roi, placement=placement,
                       weights=weights, traffic=traffic, vehicle_dims=vdims,
                       output_format=output_format, normalized=normalized)


def _load_yaml(text, origin):
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ParseError(f"{origin}: not valid YAML: {exc}") from exc


def _iu_dict(iu: InfrastructureUnit) -> dict:
    sensors = []
    for s in iu.sensors:
        base = {
            "id": s.id,
            "position": list(s.pose.position),
            "yaw_deg": math.degrees(s.pose.yaw),
            "pitch_deg": math.degrees(s.pose.pitch),
            "roll_deg": math.degrees(s.pose.roll),
            "max_range": s.max_range,
        }
        if isinstance(s, CameraSpec):
            sensors.append({
                "type": "camera", **base,
                "focal_px": s.focal_px,
                "resolution": list(s.resolution),
                "principal": list(s.principal),
                "downsample_rate": s.downsample_rate,
            })
        else:
            sensors.append({
                "type": "lidar", **base,
                "h_fov_deg": math.degrees(s.h_fov),
                "v_fov_deg": math.degrees(s.v_fov),
                "azimuth_steps": s.azimuth_steps,
                "elevation_steps": s.elevation_steps,
            })
    return {"id": iu.id, "processor_id": iu.processor_id, "sensors": sensors}


def write_scenario(doc: ScenarioDoc) -> str:
    """Normalized scenario text: defaults explicit, parse fixpoint."""
    return yaml.safe_dump(doc.normalized, sort_keys=False)


# ---------------------------------------------------------------------------
# reports


def _fmt3(v) -> str:
    return "n/a" if v is None else f"{v:.3f}"


TABULAR_HEADER = "coverage,occlusion,information_gain,score"


def write_report(report: MetricsReport, format: str = "structured") -> str:
    if format == "structured":
        doc = {"format_version": FORMAT_VERSION}
        doc.update(report.to_dict())
        return yaml.safe_dump(doc, sort_keys=False)
    if format == "tabular":
        row = ",".join(_fmt3(v) for v in (
            report.coverage, report.occlusion, report.information_gain,
            report.score))
        return f"{TABULAR_HEADER}\n{row}\n"
    raise ValidationError(f"unknown report format {format!r}")


def read_report(text) -> MetricsReport:
    data = _load_yaml(text, "report")
    data = _as_dict(data, "report")
    _check_version(data, "report")
    m = _as_dict(_need(data, "metrics", "report"), "report.metrics")
    return MetricsReport(
        coverage=m.get("coverage"),
        occlusion=m.get("occlusion"),
        information_gain=m.get("information_gain"),
        score=m.get("score"),
        per_region=data.get("per_region_coverage", {}),
        core=data.get("core", {}),
        counts=data.get("counts", {}),
        config=data.get("config", {}),
        timing=data.get("timing", {}),
        warnings=list(data.get("warnings", [])),
    )


def compare_table(named_reports) -> str:
    """Rows sorted by fused score descending; unscored rows last."""
    rows = sorted(
        named_reports,
        key=lambda nr: (nr[1].score is None,
                        -(nr[1].score if nr[1].score is not None else 0.0)))
    lines = ["name," + TABULAR_HEADER]
    for name, rep in rows:
        lines.append(",".join([name] + [_fmt3(v) for v in (
            rep.coverage, rep.occlusion, rep.information_gain, rep.score)]))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# heatmaps


HEATMAP_SOURCES = ("visibility", "occupancy_p", "occlusion_frequency")


@dataclass
class HeatmapSlice:
    source: str
    layer: object  # int z-index or "max"
    values: np.ndarray  # (ny, nx), row 0 = top (max y), in [0, 1]
    origin: tuple
    edge: float
    dims: tuple

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise ValidationError("heatmap values must be 2D")
        if v.size and (v.min() < 0.0 or v.max() > 1.0):
            raise ValidationError("heatmap values must lie in [0, 1]")
        self.values = v


def heatmap_slice(grid: VoxelGrid, field: np.ndarray, source: str,
                  layer) -> HeatmapSlice:
    """Extract a z-layer (or column max) of a per-voxel field as an
    image-oriented matrix (top row = greatest y)."""
    nx, ny, nz = grid.dims
    vol = np.asarray(field, dtype=np.float64).reshape(nx, ny, nz)
    if layer == "max":
        plane = vol.max(axis=2)
    else:
        k = int(layer)
        if not (0 <= k < nz):
            raise ValidationError(f"layer {k} out of range [0, {nz})")
        plane = vol[:, :, k]
    img = plane.T[::-1, :]  # rows top-to-bottom in y
    return HeatmapSlice(source=source, layer=layer, values=img,
                        origin=grid.origin, edge=grid.edge, dims=grid.dims)


def export_heatmap(slc: HeatmapSlice) -> bytes:
    """Binary portable graymap: P5, maxval 255, round(v * 255)."""
    h, w = slc.values.shape
    payload = np.rint(slc.values * 255.0).astype(np.uint8)
    return f"P5\n{w} {h}\n255\n".encode("ascii") + payload.tobytes()


# ---------------------------------------------------------------------------
# CLI


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="vantage",
        description="Score roadside sensor placements on voxelized "
                    "intersection maps.")
    sub = p.add_subparsers(dest="command", required=True)

    def maps_arg(sp):
        sp.add_argument("--maps", default="maps",
                        help="directory used to resolve map names "
                             "(same lookup the service applies)")

    ev = sub.add_parser("evaluate", help="score one scenario")
    ev.add_argument("scenario")
    ev.add_argument("--out", help="write the report here instead of stdout")
    ev.add_argument("--format", choices=("structured", "tabular"),
                    default=None, help="override the scenario's output format")
    maps_arg(ev)

    cp = sub.add_parser("compare", help="score several scenarios as a table")
    cp.add_argument("scenarios", nargs="+")
    cp.add_argument("--out")
    maps_arg(cp)

    sw = sub.add_parser("sweep", help="re-evaluate varying one config value")
    sw.add_argument("scenario")
    sw.add_argument("--param", required=True,
                    help="dotted path into the scenario, e.g. roi.voxel_edge")
    sw.add_argument("--values", required=True,
                    help="comma-separated values to substitute")
    sw.add_argument("--out")
    maps_arg(sw)

    hm = sub.add_parser("heatmap", help="export a BEV graymap")
    hm.add_argument("scenario")
    hm.add_argument("--source", choices=HEATMAP_SOURCES, default="visibility")
    hm.add_argument("--layer", default="max",
                    help="z layer index, or 'max' for column max")
    hm.add_argument("--out")
    maps_arg(hm)

    va = sub.add_parser("validate", help="check a scenario or map file")
    va.add_argument("path")
    maps_arg(va)

    se = sub.add_parser("serve", help="run the local HTTP service")
    se.add_argument("--port", type=int, default=8321)
    se.add_argument("--maps", default="maps",
                    help="directory scanned for map documents")
    se.add_argument("--job-threshold", type=float, default=2.0,
                    help="seconds before an evaluation becomes a polled job")
    se.add_argument("--ui", default=None,
                    help="directory of static UI files to mount at /")
    return p


def _dir_resolver(maps_dir):
    """Resolve bare map names against a directory of map documents, the
    way the service registry does, so scenarios exported from the UI
    (which reference maps by name) also run from the command line."""
    base = Path(maps_dir)

    def resolve(name: str):
        if "/" in name or "\\" in name or name.endswith((".yaml", ".yml")):
            return None
        candidate = base / f"{name}.yaml"
        return load_map(candidate) if candidate.is_file() else None

    return resolve


def _cmd_evaluate(args) -> int:
    doc = parse_scenario(args.scenario, map_resolver=_dir_resolver(args.maps))
    report = evaluate(doc.vmap, doc.roi, doc.placement, doc.weights,
                      doc.traffic, doc.vehicle_dims)
    fmt = args.format or doc.output_format
    text = write_report(report, fmt)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_compare(args) -> int:
    resolver = _dir_resolver(args.maps)
    named = []
    for s in args.scenarios:
        doc = parse_scenario(s, map_resolver=resolver)
        rep = evaluate(doc.vmap, doc.roi, doc.placement, doc.weights,
                       doc.traffic, doc.vehicle_dims)
        named.append((doc.name, rep))
    text = compare_table(named)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _set_path(data: dict, dotted: str, value):
    # the normalized form spells out every field, so a path that is
    # not already present is a typo, not a new setting
    keys = dotted.split(".")
    node = data
    for key in keys[:-1]:
        node = node[int(key)] if isinstance(node, list) else node[key]
    last = keys[-1]
    if isinstance(node, list):
        node[int(last)] = value
    else:
        if last not in node:
            raise KeyError(last)
        node[last] = value


def _cmd_sweep(args) -> int:
    resolver = _dir_resolver(args.maps)
    base = parse_scenario(args.scenario, map_resolver=resolver).normalized
    values = [yaml.safe_load(v) for v in args.values.split(",")]
    named = []
    for v in values:
        variant = copy.deepcopy(base)
        try:
            _set_path(variant, args.param, v)
        except (KeyError, IndexError, TypeError, ValueError):
            raise ParseError(
                f"sweep param {args.param!r} does not address a scenario field")
        doc = parse_scenario(variant, map_resolver=resolver)
        rep = evaluate(doc.vmap, doc.roi, doc.placement, doc.weights,
                       doc.traffic, doc.vehicle_dims)
        named.append((f"{args.param}={v}", rep))
    lines = ["name," + TABULAR_HEADER]
    for name, rep in named:  # sweep keeps input order, not score order
        lines.append(",".join([name] + [_fmt3(x) for x in (
            rep.coverage, rep.occlusion, rep.information_gain, rep.score)]))
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_heatmap(args) -> int:
    doc = parse_scenario(args.scenario, map_resolver=_dir_resolver(args.maps))
    fields: dict = {}
    evaluate(doc.vmap, doc.roi, doc.placement, doc.weights, doc.traffic,
             doc.vehicle_dims, fields_out=fields)
    layer = args.layer if args.layer == "max" else int(args.layer)
    slc = heatmap_slice(fields["grid"], fields[args.source], args.source,
                        layer)
    out = args.out or f"{doc.name}_{args.source}_{args.layer}.pgm"
    Path(out).write_bytes(export_heatmap(slc))
    print(out)
    return 0


def _looks_like_map(data) -> bool:
    return isinstance(data, dict) and "placement" not in data and (
        "regions" in data or "lanes" in data)


def _cmd_validate(args) -> int:
    path = Path(args.path)
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise FileNotFoundError(f"file not found: {path}") from None
    data = _load_yaml(text, str(path))
    if _looks_like_map(data):
        vmap = parse_map_data(data, source=str(path))
        print(f"OK: map {vmap.name!r} "
              f"({len(vmap.regions)} regions, {len(vmap.lanes)} lanes)")
        return 0
    doc = parse_scenario(text, base_dir=path.parent,
                         map_resolver=_dir_resolver(args.maps))
    problems = []
    for iu in doc.placement.ius:
        rep = validate_iu(iu)
        for v in rep.violations:
            problems.append(
                f"iu {iu.id!r}: sensors {v.sensor_a}/{v.sensor_b} "
                f"{v.constraint}-distance {v.measured:.3f} m exceeds "
                f"{v.limit} m")
    if problems:
        for line in problems:
            print(f"FAIL: {line}", file=sys.stderr)
        return 1
    print(f"OK: scenario {doc.name!r} ({doc.placement.n_sensors} sensors, "
          f"map {doc.vmap.name!r})")
    return 0


def _cmd_serve(args) -> int:
    from .service import run_server
    run_server(port=args.port, maps_dir=args.maps,
               job_threshold=args.job_threshold, ui_dir=args.ui)
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "evaluate": _cmd_evaluate,
        "compare": _cmd_compare,
        "sweep": _cmd_sweep,
        "heatmap": _cmd_heatmap,
        "validate": _cmd_validate,
        "serve": _cmd_serve,
    }
    try:
        return handlers[args.command](args)
    except (ParseError, ValidationError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except VantageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
