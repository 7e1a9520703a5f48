// Scenario documents and the editor's working state.
//
// The document shapes mirror what the engine's CLI reads and writes, so
// anything exported here evaluates identically from the command line.

import { parse, stringify } from "yaml";
import { normDeg } from "./util.js";

export interface CameraSensor {
  type: "camera";
  id: string;
  position: [number, number, number];
  yaw_deg: number;
  pitch_deg: number;
  focal_px: number;
  resolution: [number, number];
  downsample_rate?: number;
  max_range: number;
}

export interface LidarSensor {
  type: "lidar";
  id: string;
  position: [number, number, number];
  yaw_deg: number;
  pitch_deg: number;
  v_fov_deg: number;
  azimuth_steps: number;
  elevation_steps: number;
  max_range: number;
  h_fov_deg?: number;
}

export type Sensor = CameraSensor | LidarSensor;

export interface InfrastructureUnit {
  id: string;
  processor_id: string;
  sensors: Sensor[];
}

export interface RoiFields {
  radius?: number;
  voxel_edge?: number;
  height?: number;
  core_radius?: number;
}

export interface ScenarioDocument {
  format_version: number;
  name: string;
  map: string | Record<string, unknown>;
  roi: RoiFields;
  placement: { ius: InfrastructureUnit[] };
  traffic?: { seed?: number; frame_count?: number };
}

export interface MetricValues {
  coverage: number | null;
  occlusion: number | null;
  information_gain: number | null;
  score: number | null;
}

export interface EvaluationReport {
  format_version: number;
  metrics: MetricValues;
  per_region_coverage: Record<string, number>;
  core: MetricValues | Record<string, number | null>;
  counts: Record<string, unknown>;
  config: Record<string, unknown>;
  timing: Record<string, number>;
  warnings: string[];
}

export type OverlaySource =
  | "visibility"
  | "occupancy_p"
  | "occlusion_frequency";

// sensors of one unit share a pole: pairwise limits enforced server-side,
// checked here so the evaluate button can be disabled with a reason
export const MAX_UNIT_XY = 2.0;
export const MAX_UNIT_Z = 4.0;

export const SNAP_STEP_DEG = 5;

export function snapYawDeg(deg: number, step = SNAP_STEP_DEG): number {
  return normDeg(Math.round(deg / step) * step);
}

function defaultCamera(id: string, x: number, y: number): CameraSensor {
  return {
    type: "camera", id, position: [x, y, 8.0], yaw_deg: 0, pitch_deg: -20,
    focal_px: 1000, resolution: [1920, 1080], downsample_rate: 0.05,
    max_range: 50,
  };
}

function defaultLidar(id: string, x: number, y: number): LidarSensor {
  return {
    type: "lidar", id, position: [x, y, 6.5], yaw_deg: 0, pitch_deg: -10,
    v_fov_deg: 30, azimuth_steps: 1800, elevation_steps: 32, max_range: 50,
  };
}

export class EditorState {
  mapName = "";
  scenarioName = "placement";
  roi: RoiFields = {};
  units: InfrastructureUnit[] = [];
  seed = 0;
  lastReport: EvaluationReport | null = null;
  overlay: OverlaySource = "visibility";
  dirty = false;
  snapEnabled = true;
  private counter = 0;

  unit(id: string): InfrastructureUnit | undefined {
    return this.units.find((u) => u.id === id);
  }

  findSensor(id: string): { unit: InfrastructureUnit; sensor: Sensor } | undefined {
    for (const unit of this.units) {
      const sensor = unit.sensors.find((s) => s.id === id);
      if (sensor) return { unit, sensor };
    }
    return undefined;
  }

  addUnit(kind: "camera" | "lidar", x: number, y: number): InfrastructureUnit {
    const n = ++this.counter;
    const sid = `${kind === "camera" ? "cam" : "lidar"}_${n}`;
    const unit: InfrastructureUnit = {
      id: `unit_${n}`,
      processor_id: `proc_${n}`,
      sensors: [kind === "camera" ? defaultCamera(sid, x, y)
                                  : defaultLidar(sid, x, y)],
    };
    this.units.push(unit);
    this.dirty = true;
    return unit;
  }

  addSensorTo(unitId: string, kind: "camera" | "lidar"): Sensor | undefined {
    const unit = this.unit(unitId);
    if (!unit) return undefined;
    const [x, y] = unit.sensors.length
      ? [unit.sensors[0].position[0], unit.sensors[0].position[1]]
      : [0, 0];
    const n = ++this.counter;
    const sid = `${kind === "camera" ? "cam" : "lidar"}_${n}`;
    const sensor = kind === "camera" ? defaultCamera(sid, x, y)
                                     : defaultLidar(sid, x, y);
    unit.sensors.push(sensor);
    this.dirty = true;
    return sensor;
  }

  removeUnit(id: string): void {
    this.units = this.units.filter((u) => u.id !== id);
    this.dirty = true;
  }

  // drags move the whole pole: every sensor keeps its offset, so a
  // placement that was co-located stays co-located
  moveUnit(id: string, x: number, y: number): void {
    const unit = this.unit(id);
    if (!unit || !unit.sensors.length) return;
    const dx = x - unit.sensors[0].position[0];
    const dy = y - unit.sensors[0].position[1];
    for (const s of unit.sensors) {
      s.position = [s.position[0] + dx, s.position[1] + dy, s.position[2]];
    }
    this.dirty = true;
  }

  setYaw(sensorId: string, deg: number): void {
    const hit = this.findSensor(sensorId);
    if (!hit) return;
    hit.sensor.yaw_deg = this.snapEnabled ? snapYawDeg(deg) : normDeg(deg);
    this.dirty = true;
  }

  updateSensor(sensorId: string, patch: Partial<Sensor>): void {
    const hit = this.findSensor(sensorId);
    if (!hit) return;
    Object.assign(hit.sensor, patch);
    this.dirty = true;
  }

  unitPole(unit: InfrastructureUnit): [number, number] {
    const s = unit.sensors[0];
    return s ? [s.position[0], s.position[1]] : [0, 0];
  }

  // every reason the current placement cannot be evaluated; empty
  // means the evaluate action is allowed
  violations(): string[] {
    const out: string[] = [];
    if (!this.mapName) out.push("no map selected");
    if (!this.units.length) out.push("placement has no sensors");
    const seen = new Set<string>();
    for (const unit of this.units) {
      if (!unit.sensors.length) {
        out.push(`unit ${unit.id} has no sensors`);
      }
      for (const s of unit.sensors) {
        if (seen.has(s.id)) out.push(`duplicate sensor id ${s.id}`);
        seen.add(s.id);
      }
      for (let a = 0; a < unit.sensors.length; a++) {
        for (let b = a + 1; b < unit.sensors.length; b++) {
          const pa = unit.sensors[a].position;
          const pb = unit.sensors[b].position;
          const xy = Math.hypot(pa[0] - pb[0], pa[1] - pb[1]);
          const dz = Math.abs(pa[2] - pb[2]);
          if (xy > MAX_UNIT_XY) {
            out.push(
              `unit ${unit.id}: ${unit.sensors[a].id} and ` +
              `${unit.sensors[b].id} are ${xy.toFixed(1)} m apart in xy ` +
              `(limit ${MAX_UNIT_XY} m)`);
          }
          if (dz > MAX_UNIT_Z) {
            out.push(
              `unit ${unit.id}: ${unit.sensors[a].id} and ` +
              `${unit.sensors[b].id} are ${dz.toFixed(1)} m apart in z ` +
              `(limit ${MAX_UNIT_Z} m)`);
          }
        }
      }
    }
    return out;
  }

  toDocument(): ScenarioDocument {
    const doc: ScenarioDocument = {
      format_version: 1,
      name: this.scenarioName,
      map: this.mapName,
      roi: { ...this.roi },
      placement: {
        ius: this.units.map((u) => ({
          id: u.id,
          processor_id: u.processor_id,
          sensors: u.sensors.map((s) => ({ ...s })),
        })),
      },
      traffic: { seed: this.seed },
    };
    return JSON.parse(JSON.stringify(doc)) as ScenarioDocument;
  }

  exportYaml(): string {
    return stringify(this.toDocument());
  }

  static fromDocument(doc: ScenarioDocument): EditorState {
    if (!doc || typeof doc !== "object" || !doc.placement?.ius) {
      throw new Error("not a scenario document: missing placement.ius");
    }
    const state = new EditorState();
    state.scenarioName = doc.name ?? "imported";
    state.mapName = typeof doc.map === "string" ? doc.map : "";
    state.roi = { ...(doc.roi ?? {}) };
    state.seed = doc.traffic?.seed ?? 0;
    state.units = doc.placement.ius.map((u) => ({
      id: u.id,
      processor_id: u.processor_id,
      sensors: u.sensors.map((s) => ({ ...s })),
    }));
    state.counter = state.units.reduce(
      (n, u) => n + u.sensors.length, state.units.length);
    state.dirty = true;
    return state;
  }

  static importYaml(text: string): EditorState {
    return EditorState.fromDocument(parse(text) as ScenarioDocument);
  }
}
