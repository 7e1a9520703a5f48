// three-decimal formatting, matching the CLI's tabular output:
// fixed point for numbers, "n/a" for metrics a blind placement lacks
export function fmt3(v: number | null | undefined): string {
  if (v === null || v === undefined) return "n/a";
  return v.toFixed(3);
}

export function clamp(v: number, lo: number, hi: number): number {
  return v < lo ? lo : v > hi ? hi : v;
}

export function degToRad(d: number): number {
  return (d * Math.PI) / 180;
}

export function radToDeg(r: number): number {
  return (r * 180) / Math.PI;
}

// wrap to (-180, 180]
export function normDeg(d: number): number {
  let x = d % 360;
  if (x <= -180) x += 360;
  if (x > 180) x -= 360;
  return x;
}
