// HTTP client for the placement-scoring service. The UI computes no
// metric of its own; everything numeric flows through these calls.

import type { EvaluationReport } from "./model.js";
import type { BevSlice } from "./overlay.js";

export interface MapDescriptor {
  name: string;
  file: string;
  valid: boolean;
  center?: [number, number];
  recommended_roi_radius?: number | null;
  error?: string;
}

export interface MapRegion {
  name: string;
  kind: string;
  priority: number | null;
  polygon: [number, number][];
}

export interface MapLane {
  id: string;
  nominal_spacing: number;
  waypoints: [number, number, number][];
}

export interface MapGeometry {
  name: string;
  center: [number, number];
  ground_elevation: number;
  recommended_roi_radius: number | null;
  regions: MapRegion[];
  lanes: MapLane[];
}

export class ApiError extends Error {
  constructor(public status: number, public kind: string,
              public detail: string) {
    super(`${kind}: ${detail}`);
  }
}

// document errors arrive as "dotted.field.path: explanation"; pull the
// path out so it can be shown next to the offending form field
export function fieldPathOf(detail: string): string | null {
  const m = /^([A-Za-z0-9_.[\]]+): /.exec(detail);
  return m && m[1].includes(".") ? m[1] : null;
}

function sleep(ms: number, signal?: AbortSignal): Promise<void> {
  return new Promise((resolve, reject) => {
    const t = setTimeout(resolve, ms);
    signal?.addEventListener("abort", () => {
      clearTimeout(t);
      reject(new DOMException("evaluation cancelled", "AbortError"));
    }, { once: true });
  });
}

async function raiseFor(r: Response): Promise<never> {
  let kind = "HttpError";
  let detail = `${r.status}`;
  try {
    const body = await r.json();
    kind = body.error ?? kind;
    detail = body.detail ?? JSON.stringify(body);
  } catch {
    // non-JSON error body; keep the status code
  }
  throw new ApiError(r.status, kind, detail);
}

export class Client {
  constructor(private base = "",
              private fetchFn: typeof fetch = fetch.bind(globalThis),
              private pollMs = 400) {}

  private async get(path: string, signal?: AbortSignal): Promise<Response> {
    return this.fetchFn(this.base + path, { signal });
  }

  private async post(path: string, body: unknown,
                     signal?: AbortSignal): Promise<Response> {
    return this.fetchFn(this.base + path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
      signal,
    });
  }

  async maps(): Promise<MapDescriptor[]> {
    const r = await this.get("/api/maps");
    if (!r.ok) await raiseFor(r);
    return r.json();
  }

  async mapGeometry(name: string): Promise<MapGeometry> {
    const r = await this.get(`/api/maps/${encodeURIComponent(name)}`);
    if (!r.ok) await raiseFor(r);
    return r.json();
  }

  // resolves when the evaluation is done, transparently following the
  // polled-job path the service takes for long runs
  async evaluate(doc: object,
                 signal?: AbortSignal): Promise<EvaluationReport> {
    const r = await this.post("/api/evaluate", doc, signal);
    if (r.status === 202) {
      const j = await r.json();
      return this.pollJob(j.poll ?? `/api/jobs/${j.job}`, signal);
    }
    if (!r.ok) await raiseFor(r);
    return r.json();
  }

  private async pollJob(path: string,
                        signal?: AbortSignal): Promise<EvaluationReport> {
    for (;;) {
      await sleep(this.pollMs, signal);
      const r = await this.get(path, signal);
      if (!r.ok) await raiseFor(r);
      const j = await r.json();
      if (j.status === "running") continue;
      if (j.status === "done") return j.result;
      throw new ApiError(500, j.error ?? "JobError",
                         j.detail ?? "evaluation failed");
    }
  }

  async bev(doc: object, source: string, layer: number | string,
            signal?: AbortSignal): Promise<BevSlice> {
    const r = await this.post("/api/bev",
                              { scenario: doc, source, layer }, signal);
    if (!r.ok) await raiseFor(r);
    return r.json();
  }
}

// at most one evaluation in flight: starting a new one aborts the
// previous request, and edits can cancel a pending run outright
export class EvaluationGate {
  private ctrl: AbortController | null = null;

  get busy(): boolean {
    return this.ctrl !== null;
  }

  cancel(): void {
    this.ctrl?.abort();
    this.ctrl = null;
  }

  async run<T>(fn: (signal: AbortSignal) => Promise<T>): Promise<T> {
    this.cancel();
    const ctrl = new AbortController();
    this.ctrl = ctrl;
    try {
      return await fn(ctrl.signal);
    } finally {
      if (this.ctrl === ctrl) this.ctrl = null;
    }
  }
}
