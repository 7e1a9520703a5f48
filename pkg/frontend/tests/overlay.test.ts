import { describe, expect, it } from "vitest";
import { bevWorldRect, rampColor, valuesToRgba } from "../src/overlay.js";
import type { BevSlice } from "../src/overlay.js";

function slice(values: number[][]): BevSlice {
  return {
    source: "visibility", layer: "max", values,
    origin: [-6, -6], edge: 0.5, dims: [12, 12, 4],
    metrics: { coverage: 1, occlusion: 1, information_gain: 1, score: 1 },
  };
}

describe("world alignment", () => {
  it("covers origin plus cells times edge", () => {
    const r = bevWorldRect(slice([[0, 0, 0], [0, 0, 0]]));
    expect(r).toEqual({ x: -6, y: -6, w: 1.5, h: 1.0 });
  });
});

describe("color ramp", () => {
  it("pins the endpoints", () => {
    expect(rampColor(0)).toEqual([37, 99, 235]);
    expect(rampColor(1)).toEqual([239, 68, 68]);
  });

  it("clamps out-of-range values", () => {
    expect(rampColor(-3)).toEqual(rampColor(0));
    expect(rampColor(9)).toEqual(rampColor(1));
  });

  it("distinguishes low, mid and high", () => {
    const low = rampColor(0.1).join(",");
    const mid = rampColor(0.5).join(",");
    const high = rampColor(0.9).join(",");
    expect(low).not.toBe(mid);
    expect(mid).not.toBe(high);
  });
});

describe("rgba conversion", () => {
  it("writes one translucent pixel per cell, zeros transparent", () => {
    const px = valuesToRgba([[0, 1], [0.5, 0]], 0.6);
    expect(px.length).toBe(16);
    expect(px[3]).toBe(0);                    // value 0: fully transparent
    expect(px[7]).toBe(Math.round(0.6 * 255)); // value 1: overlay alpha
    expect([px[4], px[5], px[6]]).toEqual([239, 68, 68]);
    expect(px[11]).toBe(Math.round(0.6 * 255));
    expect(px[15]).toBe(0);
  });

  it("keeps row 0 first: the +y edge stays the top row", () => {
    const px = valuesToRgba([[1, 1], [0, 0]], 1);
    expect(px[3]).toBe(255);
    expect(px[11]).toBe(0);
  });

  it("uniform input yields a uniform tint", () => {
    const px = valuesToRgba([[0.7, 0.7], [0.7, 0.7]]);
    const first = [px[0], px[1], px[2], px[3]].join(",");
    for (let i = 1; i < 4; i++) {
      const cell = [px[i * 4], px[i * 4 + 1], px[i * 4 + 2],
                    px[i * 4 + 3]].join(",");
      expect(cell).toBe(first);
    }
  });
});
