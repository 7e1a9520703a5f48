import { describe, expect, it } from "vitest";
import { cameraHFovDeg, canvasToWorld, fitViewport, fovWedge, hitTest,
         worldToCanvas, yawFromPointer, yawHandle } from "../src/geometry.js";

const vp = fitViewport(800, 600, 60);

describe("transforms", () => {
  it("centers the world origin on the canvas", () => {
    expect(worldToCanvas(vp, 0, 0)).toEqual([400, 300]);
  });

  it("flips the y axis: north is up", () => {
    const [, py] = worldToCanvas(vp, 0, 10);
    expect(py).toBeLessThan(300);
  });

  it("round-trips", () => {
    const [px, py] = worldToCanvas(vp, 13.25, -41.5);
    const [x, y] = canvasToWorld(vp, px, py);
    expect(x).toBeCloseTo(13.25, 10);
    expect(y).toBeCloseTo(-41.5, 10);
  });

  it("fits the roi diameter into the short canvas side", () => {
    expect(2 * 60 * vp.scale).toBeLessThanOrEqual(600);
    expect(2 * 60 * vp.scale).toBeGreaterThan(500);
  });
});

describe("camera optics", () => {
  it("derives the horizontal fov from focal length and width", () => {
    // 1920 px wide at f=1000 px: 2*atan(0.96)
    expect(cameraHFovDeg(1000, 1920)).toBeCloseTo(87.664, 2);
    expect(cameraHFovDeg(1000, 1000)).toBeCloseTo(53.130, 2);
  });
});

describe("markers", () => {
  it("hit-tests the topmost marker within radius", () => {
    const markers = [
      { id: "a", x: 0, y: 0 },
      { id: "b", x: 0.5, y: 0 },
    ];
    const [px, py] = worldToCanvas(vp, 0.3, 0);
    expect(hitTest(vp, markers, px, py)).toBe("b");
    expect(hitTest(vp, markers, px + 200, py)).toBeNull();
  });

  it("puts the yaw handle along the heading, flipped for canvas", () => {
    const [mx, my] = worldToCanvas(vp, 5, 5);
    const east = yawHandle(vp, 5, 5, 0);
    expect(east[0]).toBeGreaterThan(mx);
    expect(east[1]).toBeCloseTo(my, 6);
    const north = yawHandle(vp, 5, 5, 90);
    expect(north[1]).toBeLessThan(my);
    expect(north[0]).toBeCloseTo(mx, 6);
  });

  it("recovers yaw from a pointer position", () => {
    for (const deg of [0, 45, 90, -135]) {
      const [hx, hy] = yawHandle(vp, 2, -3, deg, 40);
      expect(yawFromPointer(vp, 2, -3, hx, hy)).toBeCloseTo(deg, 6);
    }
  });
});

describe("fov wedge", () => {
  it("points along +x at yaw 0 with symmetric half-angles", () => {
    const w = fovWedge(vp, 0, 0, 0, 90, 50);
    expect(w.apex).toEqual([400, 300]);
    expect(w.radiusPx).toBeCloseTo(50 * vp.scale);
    expect(w.startAngle).toBeCloseTo(-Math.PI / 4);
    expect(w.endAngle).toBeCloseTo(Math.PI / 4);
  });

  it("rotates with yaw", () => {
    const w = fovWedge(vp, 0, 0, 90, 60, 50);
    // canvas angles are negated world angles
    expect(w.startAngle).toBeCloseTo(-(Math.PI / 2 + Math.PI / 6));
    expect(w.endAngle).toBeCloseTo(-(Math.PI / 2 - Math.PI / 6));
  });
});
