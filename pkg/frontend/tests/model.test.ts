import { describe, expect, it } from "vitest";
import { EditorState, snapYawDeg } from "../src/model.js";

function withLidar(): EditorState {
  const s = new EditorState();
  s.mapName = "tutorial_4way";
  s.addUnit("lidar", 5, -5);
  return s;
}

describe("yaw snapping", () => {
  it("rounds to 5 degree steps", () => {
    expect(snapYawDeg(47.4)).toBe(45);
    expect(snapYawDeg(47.6)).toBe(50);
    expect(snapYawDeg(-12.4)).toBe(-10);
  });

  it("wraps into (-180, 180]", () => {
    expect(snapYawDeg(185)).toBe(-175);
    expect(snapYawDeg(359)).toBe(0);
    expect(snapYawDeg(180)).toBe(180);
  });

  it("is applied through setYaw only when enabled", () => {
    const s = withLidar();
    const id = s.units[0].sensors[0].id;
    s.setYaw(id, 47.4);
    expect(s.units[0].sensors[0].yaw_deg).toBe(45);
    s.snapEnabled = false;
    s.setYaw(id, 47.4);
    expect(s.units[0].sensors[0].yaw_deg).toBeCloseTo(47.4);
  });
});

describe("placement validity", () => {
  it("accepts co-located sensors on one pole", () => {
    const s = withLidar();
    s.addSensorTo(s.units[0].id, "camera");
    expect(s.violations()).toEqual([]);
  });

  it("flags unit sensors 3 m apart and names both", () => {
    const s = withLidar();
    const cam = s.addSensorTo(s.units[0].id, "camera")!;
    cam.position = [8, -5, 8];
    const problems = s.violations();
    expect(problems.length).toBe(1);
    expect(problems[0]).toContain("3.0 m apart in xy");
    expect(problems[0]).toContain(cam.id);
  });

  it("allows offsets inside the pole tolerance", () => {
    const s = withLidar();
    const cam = s.addSensorTo(s.units[0].id, "camera")!;
    cam.position = [5.4, -5, 8];
    expect(s.violations()).toEqual([]);
  });

  it("flags an empty placement and a missing map", () => {
    const s = new EditorState();
    const problems = s.violations();
    expect(problems).toContain("no map selected");
    expect(problems).toContain("placement has no sensors");
  });

  it("flags duplicate sensor ids", () => {
    const s = withLidar();
    s.addUnit("lidar", -5, 5);
    s.units[1].sensors[0].id = s.units[0].sensors[0].id;
    expect(s.violations().some((p) => p.includes("duplicate"))).toBe(true);
  });
});

describe("drag semantics", () => {
  it("moving a unit moves every sensor, preserving offsets", () => {
    const s = withLidar();
    const cam = s.addSensorTo(s.units[0].id, "camera")!;
    cam.position = [5.5, -5, 8];
    s.moveUnit(s.units[0].id, 20, 30);
    expect(s.units[0].sensors[0].position).toEqual([20, 30, 6.5]);
    expect(cam.position).toEqual([20.5, 30, 8]);
    expect(s.violations()).toEqual([]);
  });
});

describe("documents", () => {
  it("round-trips through yaml unchanged", () => {
    const s = withLidar();
    s.scenarioName = "trip";
    s.roi = { radius: 40, voxel_edge: 1.0 };
    s.seed = 7;
    const back = EditorState.importYaml(s.exportYaml());
    expect(back.toDocument()).toEqual(s.toDocument());
  });

  it("exports the engine's scenario shape", () => {
    const s = withLidar();
    const doc = s.toDocument();
    expect(doc.format_version).toBe(1);
    expect(doc.map).toBe("tutorial_4way");
    expect(doc.placement.ius[0].processor_id).toMatch(/^proc_/);
    const sensor = doc.placement.ius[0].sensors[0];
    expect(sensor.type).toBe("lidar");
    expect(sensor.position).toEqual([5, -5, 6.5]);
  });

  it("imports an authored document", () => {
    const text = [
      "format_version: 1",
      "name: corners",
      "map: tutorial_4way",
      "roi: {radius: 60, voxel_edge: 0.5}",
      "placement:",
      "  ius:",
      "    - id: ne",
      "      processor_id: p_ne",
      "      sensors:",
      "        - type: camera",
      "          id: cam_ne",
      "          position: [8.5, 8.5, 8.0]",
      "          yaw_deg: 180.0",
      "          pitch_deg: -20.0",
      "          focal_px: 1000.0",
      "          resolution: [1920, 1080]",
      "          max_range: 50.0",
      "traffic: {seed: 3}",
    ].join("\n");
    const s = EditorState.importYaml(text);
    expect(s.scenarioName).toBe("corners");
    expect(s.mapName).toBe("tutorial_4way");
    expect(s.seed).toBe(3);
    expect(s.units.length).toBe(1);
    expect(s.units[0].sensors[0].yaw_deg).toBe(180);
    expect(s.violations()).toEqual([]);
  });

  it("rejects junk on import", () => {
    expect(() => EditorState.importYaml("just: text")).toThrow(/placement/);
  });

  it("toDocument returns an independent copy", () => {
    const s = withLidar();
    const doc = s.toDocument();
    doc.placement.ius[0].sensors[0].position[0] = 99;
    expect(s.units[0].sensors[0].position[0]).toBe(5);
  });
});
