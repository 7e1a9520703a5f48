// DOM wiring for the placement explorer. All numbers shown come from
// the service verbatim; this file only draws, drags, and posts.

import { ApiError, Client, EvaluationGate, fieldPathOf,
         MapGeometry } from "./api.js";
import { canvasToWorld, cameraHFovDeg, fitViewport, fovWedge, hitTest,
         Viewport, worldToCanvas, yawFromPointer, yawHandle } from
         "./geometry.js";
import { EditorState, EvaluationReport, Sensor } from "./model.js";
import { BevSlice, bevWorldRect, valuesToRgba } from "./overlay.js";
import { bestIndex, Snapshot, snapshotRow } from "./history.js";
import { fmt3 } from "./util.js";

const REGION_FILL: Record<string, string> = {
  junction: "#3f4753",
  driveway: "#353c46",
  crosswalk: "#8a6d1d",
  sidewalk: "#4c463a",
  shoulder: "#2e333b",
};

const $ = <T extends HTMLElement>(id: string): T =>
  document.getElementById(id) as T;

const canvas = $<HTMLCanvasElement>("view");
const ctx = canvas.getContext("2d")!;

const state = new EditorState();
const client = new Client();
const gate = new EvaluationGate();
const history: Snapshot[] = [];

let geometry: MapGeometry | null = null;
let viewport: Viewport | null = null;
let overlaySlice: BevSlice | null = null;
let overlayImage: HTMLCanvasElement | null = null;
let selectedUnit: string | null = null;
let fieldError: { unitIndex: number; message: string } | null = null;

type DragMode =
  | { kind: "none" }
  | { kind: "move"; unitId: string }
  | { kind: "rotate"; sensorId: string; x: number; y: number };
let drag: DragMode = { kind: "none" };

// ---------------------------------------------------------------- banner

function banner(text: string | null, info = false): void {
  const el = $("banner");
  if (!text) {
    el.classList.add("hidden");
    return;
  }
  el.textContent = text;
  el.classList.toggle("info", info);
  el.classList.remove("hidden");
}

function reportFailure(err: unknown): void {
  if (err instanceof DOMException && err.name === "AbortError") return;
  if (err instanceof ApiError) {
    const path = fieldPathOf(err.detail);
    const m = path ? /ius[.[](\d+)/.exec(path) : null;
    if (m) {
      fieldError = { unitIndex: Number(m[1]), message: err.detail };
      const unit = state.units[fieldError.unitIndex];
      if (unit) selectedUnit = unit.id;
      renderForm();
      banner(null);
    } else {
      banner(err.detail);
    }
    return;
  }
  if (err instanceof TypeError) {
    banner("service unreachable — is `vantage serve` running on this host?");
    return;
  }
  banner(String(err));
}

// ---------------------------------------------------------------- canvas

function resizeCanvas(): void {
  const r = canvas.getBoundingClientRect();
  canvas.width = Math.max(1, Math.round(r.width));
  canvas.height = Math.max(1, Math.round(r.height));
  if (geometry) {
    const radius = state.roi.radius ??
      geometry.recommended_roi_radius ?? 60;
    viewport = fitViewport(canvas.width, canvas.height, radius,
                           geometry.center[0], geometry.center[1]);
  }
  redraw();
}

function drawPolygon(vp: Viewport, pts: [number, number][]): void {
  ctx.beginPath();
  pts.forEach(([x, y], i) => {
    const [px, py] = worldToCanvas(vp, x, y);
    if (i === 0) ctx.moveTo(px, py);
    else ctx.lineTo(px, py);
  });
  ctx.closePath();
}

function rebuildOverlayImage(): void {
  overlayImage = null;
  if (!overlaySlice) return;
  const rows = overlaySlice.values.length;
  const cols = rows ? overlaySlice.values[0].length : 0;
  if (!rows || !cols) return;
  const img = new ImageData(valuesToRgba(overlaySlice.values), cols, rows);
  const off = document.createElement("canvas");
  off.width = cols;
  off.height = rows;
  off.getContext("2d")!.putImageData(img, 0, 0);
  overlayImage = off;
}

function drawSensor(vp: Viewport, s: Sensor, selected: boolean): void {
  const [x, y] = [s.position[0], s.position[1]];
  const hfov = s.type === "camera"
    ? cameraHFovDeg(s.focal_px, s.resolution[0])
    : (s.h_fov_deg ?? 360);
  const color = s.type === "camera" ? "#60a5fa" : "#f472b6";

  ctx.fillStyle = color + "2e";
  ctx.strokeStyle = color;
  ctx.lineWidth = 1;
  if (hfov >= 360) {
    const [px, py] = worldToCanvas(vp, x, y);
    ctx.beginPath();
    ctx.arc(px, py, s.max_range * vp.scale, 0, 2 * Math.PI);
    ctx.fill();
    ctx.stroke();
  } else {
    const w = fovWedge(vp, x, y, s.yaw_deg, hfov, s.max_range);
    ctx.beginPath();
    ctx.moveTo(w.apex[0], w.apex[1]);
    ctx.arc(w.apex[0], w.apex[1], w.radiusPx, w.startAngle, w.endAngle);
    ctx.closePath();
    ctx.fill();
    ctx.stroke();
  }

  if (selected) {
    const [hx, hy] = yawHandle(vp, x, y, s.yaw_deg);
    const [px, py] = worldToCanvas(vp, x, y);
    ctx.strokeStyle = "#fbbf24";
    ctx.beginPath();
    ctx.moveTo(px, py);
    ctx.lineTo(hx, hy);
    ctx.stroke();
    ctx.fillStyle = "#fbbf24";
    ctx.beginPath();
    ctx.arc(hx, hy, 5, 0, 2 * Math.PI);
    ctx.fill();
  }
}

function redraw(): void {
  ctx.fillStyle = "#111418";
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  const vp = viewport;
  if (!vp || !geometry) return;

  for (const region of geometry.regions) {
    drawPolygon(vp, region.polygon);
    ctx.fillStyle = REGION_FILL[region.kind] ?? "#333";
    ctx.fill();
  }

  ctx.strokeStyle = "#6b7280";
  ctx.lineWidth = 1;
  for (const lane of geometry.lanes) {
    ctx.beginPath();
    lane.waypoints.forEach(([x, y], i) => {
      const [px, py] = worldToCanvas(vp, x, y);
      if (i === 0) ctx.moveTo(px, py);
      else ctx.lineTo(px, py);
    });
    ctx.stroke();
  }

  if (overlayImage && overlaySlice) {
    const rect = bevWorldRect(overlaySlice);
    const [left, top] = worldToCanvas(vp, rect.x, rect.y + rect.h);
    ctx.imageSmoothingEnabled = false;
    ctx.drawImage(overlayImage, left, top,
                  rect.w * vp.scale, rect.h * vp.scale);
    ctx.imageSmoothingEnabled = true;
  }

  const radius = state.roi.radius ?? geometry.recommended_roi_radius ?? 60;
  const [ccx, ccy] = worldToCanvas(vp, geometry.center[0],
                                   geometry.center[1]);
  ctx.strokeStyle = "#475569";
  ctx.setLineDash([6, 4]);
  ctx.beginPath();
  ctx.arc(ccx, ccy, radius * vp.scale, 0, 2 * Math.PI);
  ctx.stroke();
  ctx.setLineDash([]);

  for (const unit of state.units) {
    const isSel = unit.id === selectedUnit;
    for (const s of unit.sensors) drawSensor(vp, s, isSel);
    const [x, y] = state.unitPole(unit);
    const [px, py] = worldToCanvas(vp, x, y);
    ctx.fillStyle = isSel ? "#fbbf24" : "#e5e7eb";
    ctx.beginPath();
    ctx.arc(px, py, 6, 0, 2 * Math.PI);
    ctx.fill();
    ctx.fillStyle = "#111418";
    ctx.font = "9px sans-serif";
    ctx.textAlign = "center";
    ctx.fillText(String(state.units.indexOf(unit) + 1), px, py + 3);
  }
}

// ----------------------------------------------------------------- form

function numField(label: string, value: number,
                  onChange: (v: number) => void): HTMLElement {
  const wrap = document.createElement("label");
  wrap.textContent = label;
  const input = document.createElement("input");
  input.type = "number";
  input.step = "any";
  input.value = String(value);
  input.addEventListener("change", () => {
    const v = Number(input.value);
    if (Number.isFinite(v)) onChange(v);
    afterEdit();
  });
  wrap.appendChild(input);
  return wrap;
}

function renderForm(): void {
  const host = $("sensor-form");
  host.textContent = "";
  const unit = selectedUnit ? state.unit(selectedUnit) : undefined;
  if (!unit) {
    host.textContent = "nothing selected";
    host.className = "muted";
    return;
  }
  host.className = "";

  const title = document.createElement("div");
  title.textContent = `${unit.id} (${unit.processor_id})`;
  host.appendChild(title);

  unit.sensors.forEach((s) => {
    const card = document.createElement("div");
    card.className = "sensor-card";
    const head = document.createElement("div");
    head.innerHTML = `<span class="kind">${s.type}</span> ${s.id}`;
    card.appendChild(head);
    const grid = document.createElement("div");
    grid.className = "grid2";
    grid.appendChild(numField("x", s.position[0], (v) => {
      s.position = [v, s.position[1], s.position[2]];
    }));
    grid.appendChild(numField("y", s.position[1], (v) => {
      s.position = [s.position[0], v, s.position[2]];
    }));
    grid.appendChild(numField("z", s.position[2], (v) => {
      s.position = [s.position[0], s.position[1], v];
    }));
    grid.appendChild(numField("yaw °", s.yaw_deg, (v) => {
      state.setYaw(s.id, v);
    }));
    grid.appendChild(numField("pitch °", s.pitch_deg, (v) => {
      s.pitch_deg = v;
    }));
    grid.appendChild(numField("range m", s.max_range, (v) => {
      s.max_range = v;
    }));
    if (s.type === "camera") {
      grid.appendChild(numField("focal px", s.focal_px, (v) => {
        s.focal_px = v;
      }));
      grid.appendChild(numField("sample rate",
                                s.downsample_rate ?? 0.05, (v) => {
        s.downsample_rate = v;
      }));
    } else {
      grid.appendChild(numField("v fov °", s.v_fov_deg, (v) => {
        s.v_fov_deg = v;
      }));
      grid.appendChild(numField("beams", s.elevation_steps, (v) => {
        s.elevation_steps = Math.round(v);
      }));
      grid.appendChild(numField("azimuth steps", s.azimuth_steps, (v) => {
        s.azimuth_steps = Math.round(v);
      }));
    }
    card.appendChild(grid);
    host.appendChild(card);
  });

  const unitIndex = state.units.indexOf(unit);
  if (fieldError && fieldError.unitIndex === unitIndex) {
    const err = document.createElement("div");
    err.className = "field-error";
    err.textContent = fieldError.message;
    host.appendChild(err);
  }

  const addCam = document.createElement("button");
  addCam.textContent = "+ camera here";
  addCam.addEventListener("click", () => {
    state.addSensorTo(unit.id, "camera");
    afterEdit();
  });
  const addLid = document.createElement("button");
  addLid.textContent = "+ lidar here";
  addLid.addEventListener("click", () => {
    state.addSensorTo(unit.id, "lidar");
    afterEdit();
  });
  const row = document.createElement("div");
  row.className = "row";
  row.append(addCam, addLid);
  host.appendChild(row);
}

// ------------------------------------------------------- metrics / history

function renderMetrics(report: EvaluationReport | null): void {
  const m = report?.metrics;
  $("m-coverage").textContent = m ? fmt3(m.coverage) : "—";
  $("m-occlusion").textContent = m ? fmt3(m.occlusion) : "—";
  $("m-ig").textContent = m ? fmt3(m.information_gain) : "—";
  $("m-score").textContent = m ? fmt3(m.score) : "—";
  const warn = $("warnings");
  warn.textContent = "";
  for (const w of report?.warnings ?? []) {
    const li = document.createElement("li");
    li.textContent = w;
    warn.appendChild(li);
  }
  $("stale-note").classList.toggle("hidden", !(report && state.dirty));
}

function renderHistory(): void {
  const host = $("history");
  host.textContent = "";
  history.forEach((snap, i) => {
    const li = document.createElement("li");
    const cb = document.createElement("input");
    cb.type = "checkbox";
    cb.dataset.index = String(i);
    cb.addEventListener("change", updateCompareButton);
    const name = document.createElement("span");
    name.textContent = snap.name;
    const score = document.createElement("span");
    score.className = "score";
    score.textContent = fmt3(snap.metrics.score);
    li.append(cb, name, score);
    host.appendChild(li);
  });
  updateCompareButton();
}

function selectedSnapshots(): Snapshot[] {
  return [...$("history").querySelectorAll<HTMLInputElement>("input:checked")]
    .map((cb) => history[Number(cb.dataset.index)]);
}

function updateCompareButton(): void {
  ($("compare") as HTMLButtonElement).disabled =
    selectedSnapshots().length < 2;
}

function renderCompare(): void {
  const snaps = selectedSnapshots();
  const host = $("compare-table");
  host.textContent = "";
  if (snaps.length < 2) return;
  const table = document.createElement("table");
  const head = document.createElement("tr");
  for (const h of ["name", "C", "O", "IG", "score"]) {
    const th = document.createElement("th");
    th.textContent = h;
    head.appendChild(th);
  }
  table.appendChild(head);
  const best = bestIndex(snaps);
  snaps.forEach((snap, i) => {
    const tr = document.createElement("tr");
    if (i === best) tr.className = "best";
    for (const cell of snapshotRow(snap)) {
      const td = document.createElement("td");
      td.textContent = cell;
      tr.appendChild(td);
    }
    table.appendChild(tr);
  });
  host.appendChild(table);
}

// ------------------------------------------------------------- evaluation

function refreshControls(): void {
  const problems = state.violations();
  const list = $("violations");
  list.textContent = "";
  for (const p of problems) {
    const li = document.createElement("li");
    li.textContent = p;
    list.appendChild(li);
  }
  ($("evaluate") as HTMLButtonElement).disabled =
    problems.length > 0 || gate.busy;
  ($("cancel-eval") as HTMLButtonElement).disabled = !gate.busy;
  ($("delete-unit") as HTMLButtonElement).disabled = !selectedUnit;
}

function afterEdit(): void {
  // an edit invalidates any run still in flight
  gate.cancel();
  fieldError = null;
  renderMetrics(state.lastReport);
  refreshControls();
  renderForm();
  redraw();
}

async function runEvaluation(): Promise<void> {
  if (state.violations().length) return;
  const doc = state.toDocument();
  banner(null);
  fieldError = null;
  refreshControls();
  try {
    const outcome = await gate.run(async (signal) => {
      const report = await client.evaluate(doc, signal);
      const slice = await client.bev(doc, state.overlay, "max", signal);
      return { report, slice };
    });
    state.lastReport = outcome.report;
    state.dirty = false;
    overlaySlice = outcome.slice;
    rebuildOverlayImage();
    history.push({
      name: `${state.scenarioName} #${history.length + 1}`,
      metrics: outcome.report.metrics,
    });
    renderMetrics(outcome.report);
    renderHistory();
    redraw();
  } catch (err) {
    reportFailure(err);
  } finally {
    refreshControls();
  }
}

async function refreshOverlay(): Promise<void> {
  if (!state.lastReport || state.dirty) return;
  const doc = state.toDocument();
  try {
    overlaySlice = await gate.run((signal) =>
      client.bev(doc, state.overlay, "max", signal));
    rebuildOverlayImage();
    redraw();
  } catch (err) {
    reportFailure(err);
  } finally {
    refreshControls();
  }
}

// ------------------------------------------------------------------- maps

async function loadGeometry(name: string): Promise<void> {
  try {
    geometry = await client.mapGeometry(name);
    state.mapName = name;
    if (geometry.recommended_roi_radius && !state.roi.radius) {
      state.roi.radius = geometry.recommended_roi_radius;
    }
    overlaySlice = null;
    overlayImage = null;
    banner(null);
    resizeCanvas();
    refreshControls();
  } catch (err) {
    geometry = null;
    reportFailure(err);
  }
}

async function loadMaps(): Promise<void> {
  try {
    const maps = await client.maps();
    const select = $<HTMLSelectElement>("map-select");
    select.textContent = "";
    for (const m of maps) {
      const opt = document.createElement("option");
      opt.value = m.name;
      opt.textContent = m.valid ? m.name : `${m.name} (invalid)`;
      opt.disabled = !m.valid;
      select.appendChild(opt);
    }
    const first = maps.find((m) => m.valid);
    if (first) {
      select.value = first.name;
      await loadGeometry(first.name);
    } else {
      banner("no valid maps available from the service");
    }
  } catch (err) {
    reportFailure(err);
  }
}

// ---------------------------------------------------------------- pointer

function pointerPos(ev: PointerEvent): [number, number] {
  const r = canvas.getBoundingClientRect();
  return [ev.clientX - r.left, ev.clientY - r.top];
}

canvas.addEventListener("pointerdown", (ev) => {
  if (!viewport) return;
  const [px, py] = pointerPos(ev);

  const unit = selectedUnit ? state.unit(selectedUnit) : undefined;
  if (unit) {
    for (const s of unit.sensors) {
      const [hx, hy] = yawHandle(viewport, s.position[0], s.position[1],
                                 s.yaw_deg);
      if (Math.hypot(hx - px, hy - py) <= 9) {
        drag = { kind: "rotate", sensorId: s.id,
                 x: s.position[0], y: s.position[1] };
        canvas.setPointerCapture(ev.pointerId);
        return;
      }
    }
  }

  const markers = state.units.map((u) => {
    const [x, y] = state.unitPole(u);
    return { id: u.id, x, y };
  });
  const hit = hitTest(viewport, markers, px, py);
  selectedUnit = hit;
  if (hit) {
    drag = { kind: "move", unitId: hit };
    canvas.setPointerCapture(ev.pointerId);
  }
  renderForm();
  refreshControls();
  redraw();
});

canvas.addEventListener("pointermove", (ev) => {
  if (!viewport || drag.kind === "none") return;
  const [px, py] = pointerPos(ev);
  if (drag.kind === "move") {
    const [x, y] = canvasToWorld(viewport, px, py);
    state.moveUnit(drag.unitId, x, y);
  } else {
    state.setYaw(drag.sensorId,
                 yawFromPointer(viewport, drag.x, drag.y, px, py));
  }
  gate.cancel();
  renderForm();
  redraw();
});

canvas.addEventListener("pointerup", () => {
  if (drag.kind !== "none") {
    drag = { kind: "none" };
    afterEdit();
  }
});

// ------------------------------------------------------------------ wiring

function addUnitAtCenter(kind: "camera" | "lidar"): void {
  const c: [number, number] = geometry ? geometry.center : [0, 0];
  const jitter = state.units.length * 3;
  const unit = state.addUnit(kind, c[0] + 10 + jitter, c[1] + 10);
  selectedUnit = unit.id;
  afterEdit();
}

$("add-camera").addEventListener("click", () => addUnitAtCenter("camera"));
$("add-lidar").addEventListener("click", () => addUnitAtCenter("lidar"));

$("delete-unit").addEventListener("click", () => {
  if (!selectedUnit) return;
  state.removeUnit(selectedUnit);
  selectedUnit = null;
  afterEdit();
});

$("evaluate").addEventListener("click", () => void runEvaluation());
$("cancel-eval").addEventListener("click", () => {
  gate.cancel();
  refreshControls();
});

$("compare").addEventListener("click", renderCompare);
$("clear-history").addEventListener("click", () => {
  history.length = 0;
  renderHistory();
  $("compare-table").textContent = "";
});

$<HTMLInputElement>("snap-toggle").addEventListener("change", (ev) => {
  state.snapEnabled = (ev.target as HTMLInputElement).checked;
});

$<HTMLSelectElement>("overlay-select").addEventListener("change", (ev) => {
  state.overlay = (ev.target as HTMLSelectElement).value as
    typeof state.overlay;
  void refreshOverlay();
});

$<HTMLSelectElement>("map-select").addEventListener("change", (ev) => {
  void loadGeometry((ev.target as HTMLSelectElement).value);
});

$<HTMLInputElement>("scenario-name").addEventListener("change", (ev) => {
  state.scenarioName = (ev.target as HTMLInputElement).value || "placement";
});

$("export").addEventListener("click", () => {
  const blob = new Blob([state.exportYaml()], { type: "text/yaml" });
  const a = document.createElement("a");
  a.href = URL.createObjectURL(blob);
  a.download = `${state.scenarioName}.yaml`;
  a.click();
  URL.revokeObjectURL(a.href);
});

$<HTMLInputElement>("import").addEventListener("change", async (ev) => {
  const file = (ev.target as HTMLInputElement).files?.[0];
  if (!file) return;
  try {
    const imported = EditorState.importYaml(await file.text());
    state.scenarioName = imported.scenarioName;
    state.roi = imported.roi;
    state.units = imported.units;
    state.seed = imported.seed;
    state.dirty = true;
    selectedUnit = null;
    $<HTMLInputElement>("scenario-name").value = state.scenarioName;
    if (imported.mapName && imported.mapName !== state.mapName) {
      const select = $<HTMLSelectElement>("map-select");
      const known = [...select.options].some(
        (o) => o.value === imported.mapName);
      if (known) {
        select.value = imported.mapName;
        await loadGeometry(imported.mapName);
      } else {
        banner(`imported scenario references map ` +
               `'${imported.mapName}' not offered by the service; ` +
               `keeping the current map`, true);
      }
    }
    afterEdit();
  } catch (err) {
    banner(`import failed: ${err}`);
  }
  (ev.target as HTMLInputElement).value = "";
});

window.addEventListener("resize", resizeCanvas);

resizeCanvas();
refreshControls();
void loadMaps();
