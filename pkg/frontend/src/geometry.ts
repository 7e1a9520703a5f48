// World/canvas transforms and marker geometry. World frame: +x east,
// +y north, meters. Canvas frame: +x right, +y DOWN, pixels; the y axis
// flips between the two.

import { degToRad } from "./util.js";

export interface Viewport {
  cx: number;      // world point at the canvas center
  cy: number;
  scale: number;   // pixels per meter
  width: number;   // canvas size in pixels
  height: number;
}

export function fitViewport(width: number, height: number, radius: number,
                            cx = 0, cy = 0, fill = 0.92): Viewport {
  const scale = (Math.min(width, height) * fill) / (2 * radius);
  return { cx, cy, scale, width, height };
}

export function worldToCanvas(vp: Viewport, x: number, y: number):
    [number, number] {
  return [
    vp.width / 2 + (x - vp.cx) * vp.scale,
    vp.height / 2 - (y - vp.cy) * vp.scale,
  ];
}

export function canvasToWorld(vp: Viewport, px: number, py: number):
    [number, number] {
  return [
    vp.cx + (px - vp.width / 2) / vp.scale,
    vp.cy - (py - vp.height / 2) / vp.scale,
  ];
}

// horizontal field of view of a pinhole camera, in degrees
export function cameraHFovDeg(focalPx: number, resX: number): number {
  return (2 * Math.atan(resX / (2 * focalPx)) * 180) / Math.PI;
}

export interface Marker {
  id: string;
  x: number;
  y: number;
}

// topmost (last drawn) marker within rPx of the pointer
export function hitTest(vp: Viewport, markers: Marker[], px: number,
                        py: number, rPx = 12): string | null {
  for (let i = markers.length - 1; i >= 0; i--) {
    const [mx, my] = worldToCanvas(vp, markers[i].x, markers[i].y);
    if (Math.hypot(mx - px, my - py) <= rPx) return markers[i].id;
  }
  return null;
}

// canvas endpoint of the rotation handle for a sensor at (x, y) world
export function yawHandle(vp: Viewport, x: number, y: number, yawDeg: number,
                          lenPx = 28): [number, number] {
  const [mx, my] = worldToCanvas(vp, x, y);
  const a = degToRad(yawDeg);
  return [mx + lenPx * Math.cos(a), my - lenPx * Math.sin(a)];
}

// yaw implied by dragging the handle to a canvas point
export function yawFromPointer(vp: Viewport, x: number, y: number,
                               px: number, py: number): number {
  const [mx, my] = worldToCanvas(vp, x, y);
  return (Math.atan2(my - py, px - mx) * 180) / Math.PI;
}

export interface Wedge {
  apex: [number, number];    // canvas px
  radiusPx: number;
  startAngle: number;        // canvas-frame radians for ctx.arc
  endAngle: number;
}

// camera field-of-view wedge; canvas angles run clockwise because the
// y axis points down, hence the sign flips
export function fovWedge(vp: Viewport, x: number, y: number, yawDeg: number,
                         hfovDeg: number, range: number): Wedge {
  const apex = worldToCanvas(vp, x, y);
  const half = degToRad(hfovDeg) / 2;
  const yaw = degToRad(yawDeg);
  return {
    apex,
    radiusPx: range * vp.scale,
    startAngle: -(yaw + half),
    endAngle: -(yaw - half),
  };
}
