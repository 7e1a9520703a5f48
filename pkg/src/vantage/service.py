"""Local HTTP facade over the evaluation pipeline.

Serves map descriptors, runs scenario evaluations (synchronously when
fast, as pollable jobs when slow), and renders BEV matrices for a UI.
Single-process, localhost tool: no auth, no persistence.
"""

from __future__ import annotations

import hashlib
import threading
import uuid
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from concurrent.futures import TimeoutError as FutureTimeout
from dataclasses import dataclass
from pathlib import Path

import yaml
from fastapi import Body, FastAPI
from fastapi.responses import JSONResponse, Response

from .errors import ParseError, ValidationError, VantageError
from .grid import RoiSpec, build_roi
from .io_cli import (
    FORMAT_VERSION,
    HEATMAP_SOURCES,
    export_heatmap,
    heatmap_slice,
    parse_map_data,
    parse_scenario,
)
from .metrics import evaluate
from .scene import VectorMap

DEFAULT_PORT = 8321
_MAP_SUFFIXES = (".yaml", ".yml", ".json")


# ---------------------------------------------------------------------------
# map registry


@dataclass
class MapEntry:
    name: str
    path: Path
    sha256: str
    vmap: VectorMap | None
    error: str | None

    @property
    def valid(self) -> bool:
        return self.vmap is not None

    def descriptor(self) -> dict:
        d = {
            "name": self.name,
            "file": self.path.name,
            "valid": self.valid,
        }
        if self.vmap is not None:
            d.update(
                center=list(self.vmap.center),
                ground_elevation=self.vmap.ground_elevation,
                recommended_roi_radius=self.vmap.recommended_roi_radius,
                regions=len(self.vmap.regions),
                lanes=len(self.vmap.lanes),
            )
        else:
            d["error"] = self.error
        return d


class MapRegistry:
    """Maps found in one directory, each validated once at startup.

    Files that fail validation stay listed (flagged) so the UI can
    surface the problem instead of silently hiding the file.
    """

    def __init__(self, maps_dir):
        self.dir = Path(maps_dir)
        self.entries: dict[str, MapEntry] = {}
        if not self.dir.is_dir():
            return
        for path in sorted(self.dir.iterdir()):
            if path.suffix.lower() not in _MAP_SUFFIXES or not path.is_file():
                continue
            raw = path.read_bytes()
            digest = hashlib.sha256(raw).hexdigest()
            try:
                vmap = parse_map_data(yaml.safe_load(raw), source=str(path))
                entry = MapEntry(vmap.name, path, digest, vmap, None)
            except (ParseError, ValidationError, yaml.YAMLError) as exc:
                entry = MapEntry(path.stem, path, digest, None, str(exc))
            self.entries.setdefault(entry.name, entry)
            self.entries.setdefault(path.stem, entry)

    def descriptors(self) -> list[dict]:
        seen = set()
        out = []
        for entry in self.entries.values():
            if id(entry) in seen:
                continue
            seen.add(id(entry))
            out.append(entry.descriptor())
        return out

    def get(self, name: str) -> MapEntry | None:
        return self.entries.get(name)

    def resolve(self, name: str) -> VectorMap | None:
        """Scenario map-reference hook: registry names win over paths."""
        entry = self.entries.get(name)
        if entry is None:
            return None
        if entry.vmap is None:
            raise ParseError(
                f"map {name!r} failed validation: {entry.error}")
        return entry.vmap


# ---------------------------------------------------------------------------
# evaluation plumbing


class GridCache:
    """Built voxel grids keyed by (map digest, ROI). Read-mostly;
    setdefault under a lock gives atomic publication."""

    def __init__(self):
        self._lock = threading.Lock()
        self._grids: dict = {}

    def get_or_build(self, key, vmap, roi: RoiSpec):
        with self._lock:
            grid = self._grids.get(key)
        if grid is None:
            grid = build_roi(vmap, roi)
            with self._lock:
                grid = self._grids.setdefault(key, grid)
        return grid


def _map_cache_key(payload_map, registry: MapRegistry):
    """Stable digest of the scenario's map reference, or None when the
    map cannot be identified without reading the filesystem twice."""
    if isinstance(payload_map, dict):
        canon = yaml.safe_dump(payload_map, sort_keys=True)
        return hashlib.sha256(canon.encode()).hexdigest()
    entry = registry.get(str(payload_map))
    if entry is not None:
        return entry.sha256
    path = Path(str(payload_map))
    if path.is_file():
        return hashlib.sha256(path.read_bytes()).hexdigest()
    return None


def _error_response(exc: Exception):
    """(status, body) for a failed request.

    Client errors (unparseable or invalid documents) map to 400 with
    the offending field path in `detail`; pipeline failures map to 500
    with the failing stage named in the message.
    """
    if isinstance(exc, (ParseError, ValidationError)):
        return 400, {"error": type(exc).__name__, "detail": str(exc)}
    if isinstance(exc, VantageError):
        return 500, {"error": type(exc).__name__, "detail": str(exc)}
    return 500, {"error": "InternalError",
                 "detail": f"{type(exc).__name__}: {exc}"}


class JobStore:
    """In-memory evaluation jobs: id -> finished (status, body) pair."""

    def __init__(self, max_workers: int = 2):
        self.executor = ThreadPoolExecutor(max_workers=max_workers,
                                           thread_name_prefix="eval-job")
        self._lock = threading.Lock()
        self._futures: dict = {}

    def submit(self, fn) -> str:
        job_id = uuid.uuid4().hex[:12]
        with self._lock:
            self._futures[job_id] = self.executor.submit(fn)
        return job_id

    def future(self, job_id):
        with self._lock:
            return self._futures.get(job_id)


def create_app(maps_dir="maps", job_threshold: float = 2.0,
               ui_dir=None) -> FastAPI:
    app = FastAPI(title="vantage", version="0.1.0")
    registry = MapRegistry(maps_dir)
    cache = GridCache()
    jobs = JobStore()
    log: deque = deque(maxlen=256)
    app.state.registry = registry
    app.state.request_log = log

    def run_pipeline(payload: dict, fields_out=None):
        """Parse + evaluate one scenario document; (status, body)."""
        try:
            doc = parse_scenario(payload, base_dir=registry.dir,
                                 map_resolver=registry.resolve)
            key = _map_cache_key(payload.get("map"), registry)
            base = None
            if key is not None:
                base = cache.get_or_build((key, doc.roi), doc.vmap, doc.roi)
            report = evaluate(doc.vmap, doc.roi, doc.placement, doc.weights,
                              doc.traffic, doc.vehicle_dims,
                              base_grid=base, fields_out=fields_out)
        except Exception as exc:
            return _error_response(exc)
        body = {"format_version": FORMAT_VERSION}
        body.update(report.to_dict())
        log.append(("evaluate", doc.name))
        return 200, body

    @app.get("/api/maps")
    def get_maps():
        return registry.descriptors()

    @app.get("/api/maps/{name}")
    def get_map(name: str):
        entry = registry.get(name)
        if entry is None:
            return JSONResponse(
                status_code=404,
                content={"error": "NotFound",
                         "detail": f"no map named {name!r}"})
        if entry.vmap is None:
            return JSONResponse(
                status_code=400,
                content={"error": "ParseError", "detail": entry.error})
        m = entry.vmap
        return {
            "name": m.name,
            "center": list(m.center),
            "ground_elevation": m.ground_elevation,
            "recommended_roi_radius": m.recommended_roi_radius,
            "regions": [
                {"name": r.name, "kind": r.kind.name.lower(),
                 "priority": r.priority,
                 "polygon": r.polygon.tolist()}
                for r in m.regions
            ],
            "lanes": [
                {"id": ln.id, "nominal_spacing": ln.nominal_spacing,
                 "waypoints": ln.waypoints.tolist()}
                for ln in m.lanes
            ],
        }

    @app.post("/api/evaluate")
    def post_evaluate(payload: dict = Body(...)):
        job_id = jobs.submit(lambda: run_pipeline(payload))
        future = jobs.future(job_id)
        try:
            status, body = future.result(timeout=job_threshold)
        except FutureTimeout:
            return JSONResponse(
                status_code=202,
                content={"status": "running", "job": job_id,
                         "poll": f"/api/jobs/{job_id}"})
        return JSONResponse(status_code=status, content=body)

    @app.get("/api/jobs/{job_id}")
    def get_job(job_id: str):
        future = jobs.future(job_id)
        if future is None:
            return JSONResponse(
                status_code=404,
                content={"error": "NotFound",
                         "detail": f"no job {job_id!r}"})
        if not future.done():
            return {"status": "running", "job": job_id}
        status, body = future.result()
        if status == 200:
            return {"status": "done", "job": job_id, "result": body}
        return JSONResponse(
            status_code=status,
            content={"status": "error", "job": job_id, **body})

    @app.post("/api/bev")
    def post_bev(payload: dict = Body(...)):
        source = str(payload.get("source", "visibility"))
        if source not in HEATMAP_SOURCES:
            return JSONResponse(
                status_code=400,
                content={"error": "ValidationError",
                         "detail": f"bev.source: expected one of "
                                   f"{list(HEATMAP_SOURCES)}, got {source!r}"})
        layer = payload.get("layer", "max")
        scenario = payload.get("scenario", payload)
        fields: dict = {}
        status, body = run_pipeline(scenario, fields_out=fields)
        if status != 200:
            return JSONResponse(status_code=status, content=body)
        try:
            slc = heatmap_slice(fields["grid"], fields[source], source,
                                layer if layer == "max" else int(layer))
        except (ValidationError, ValueError) as exc:
            return JSONResponse(
                status_code=400,
                content={"error": "ValidationError",
                         "detail": f"bev.layer: {exc}"})
        if payload.get("format") == "pgm":
            return Response(content=export_heatmap(slc),
                            media_type="image/x-portable-graymap")
        return {
            "source": source,
            "layer": slc.layer,
            "values": slc.values.tolist(),
            "origin": list(slc.origin),
            "edge": slc.edge,
            "dims": list(slc.dims),
            "metrics": body["metrics"],
        }

    if ui_dir:
        ui_path = Path(ui_dir)
        if ui_path.is_dir():
            from fastapi.staticfiles import StaticFiles
            app.mount("/", StaticFiles(directory=str(ui_path), html=True),
                      name="ui")
    return app


def run_server(port: int = DEFAULT_PORT, maps_dir="maps",
               job_threshold: float = 2.0, ui_dir=None):
    import uvicorn
    app = create_app(maps_dir=maps_dir, job_threshold=job_threshold,
                     ui_dir=ui_dir)
    uvicorn.run(app, host="127.0.0.1", port=port, log_level="warning")
