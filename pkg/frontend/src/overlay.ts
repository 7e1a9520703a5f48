// Bird's-eye-view overlay: service field slices to RGBA pixels plus the
// world rectangle they cover, so the canvas can alpha-blend them in the
// right place.

import type { MetricValues } from "./model.js";

export interface BevSlice {
  source: string;
  layer: number | string;
  values: number[][];        // row 0 = +y edge, column 0 = -x edge
  origin: [number, number];  // world xy of the low corner
  edge: number;              // meters per cell
  dims: number[];            // grid dims, [nx, ny, ...]
  metrics: MetricValues;
}

export interface WorldRect {
  x: number;   // low corner
  y: number;
  w: number;
  h: number;
}

export function bevWorldRect(s: BevSlice): WorldRect {
  const rows = s.values.length;
  const cols = rows ? s.values[0].length : 0;
  return { x: s.origin[0], y: s.origin[1], w: cols * s.edge,
           h: rows * s.edge };
}

// cold-to-hot ramp; stops chosen for contrast on the gray road palette
const STOPS: [number, [number, number, number]][] = [
  [0.0, [37, 99, 235]],
  [0.35, [13, 148, 136]],
  [0.7, [250, 204, 21]],
  [1.0, [239, 68, 68]],
];

export function rampColor(v: number): [number, number, number] {
  const t = v < 0 ? 0 : v > 1 ? 1 : v;
  for (let i = 1; i < STOPS.length; i++) {
    const [t1, c1] = STOPS[i];
    if (t <= t1) {
      const [t0, c0] = STOPS[i - 1];
      const f = t1 === t0 ? 0 : (t - t0) / (t1 - t0);
      return [
        Math.round(c0[0] + f * (c1[0] - c0[0])),
        Math.round(c0[1] + f * (c1[1] - c0[1])),
        Math.round(c0[2] + f * (c1[2] - c0[2])),
      ];
    }
  }
  return STOPS[STOPS.length - 1][1];
}

// one pixel per cell; zero-valued cells stay fully transparent so the
// map shows through where there is nothing to report. Row 0 of the
// slice is the +y edge, which is also the top row on a canvas.
export function valuesToRgba(values: number[][], alpha = 0.55) {
  const rows = values.length;
  const cols = rows ? values[0].length : 0;
  const out = new Uint8ClampedArray(new ArrayBuffer(rows * cols * 4));
  const a = Math.round(alpha * 255);
  for (let r = 0; r < rows; r++) {
    for (let c = 0; c < cols; c++) {
      const v = values[r][c];
      const o = (r * cols + c) * 4;
      if (v === 0) continue;
      const [red, green, blue] = rampColor(v);
      out[o] = red;
      out[o + 1] = green;
      out[o + 2] = blue;
      out[o + 3] = a;
    }
  }
  return out;
}
