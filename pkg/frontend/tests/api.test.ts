import { describe, expect, it } from "vitest";
import { ApiError, Client, EvaluationGate, fieldPathOf } from "../src/api.js";

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

const REPORT = {
  format_version: 1,
  metrics: { coverage: 0.8, occlusion: 0.7, information_gain: 0.5,
             score: 0.71 },
  per_region_coverage: {}, core: {}, counts: {}, config: {}, timing: {},
  warnings: [],
};

// fetch stand-in fed from a scripted queue; records calls and honors
// abort signals like the real thing
function scripted(queue: (Response | (() => Response))[]) {
  const calls: { url: string; init?: RequestInit }[] = [];
  const fn = async (url: string | URL | Request,
                    init?: RequestInit): Promise<Response> => {
    if (init?.signal?.aborted) {
      throw new DOMException("aborted", "AbortError");
    }
    calls.push({ url: String(url), init });
    const next = queue.shift();
    if (!next) throw new TypeError("fetch queue exhausted");
    return typeof next === "function" ? next() : next;
  };
  return { fn: fn as typeof fetch, calls };
}

describe("evaluate", () => {
  it("returns the report body on 200", async () => {
    const { fn, calls } = scripted([jsonResponse(200, REPORT)]);
    const client = new Client("", fn, 1);
    const report = await client.evaluate({ name: "x" });
    expect(report.metrics.score).toBe(0.71);
    expect(calls[0].url).toBe("/api/evaluate");
    expect(calls[0].init?.method).toBe("POST");
  });

  it("follows the polled-job path on 202", async () => {
    const { fn, calls } = scripted([
      jsonResponse(202, { status: "running", job: "j1",
                          poll: "/api/jobs/j1" }),
      jsonResponse(200, { status: "running", job: "j1" }),
      jsonResponse(200, { status: "done", job: "j1", result: REPORT }),
    ]);
    const client = new Client("", fn, 1);
    const report = await client.evaluate({ name: "slow" });
    expect(report.metrics.coverage).toBe(0.8);
    expect(calls.map((c) => c.url)).toEqual(
      ["/api/evaluate", "/api/jobs/j1", "/api/jobs/j1"]);
  });

  it("surfaces a failed job as an error", async () => {
    const { fn } = scripted([
      jsonResponse(202, { status: "running", job: "j2",
                          poll: "/api/jobs/j2" }),
      jsonResponse(200, { status: "error", job: "j2",
                          error: "DegenerateSceneError",
                          detail: "no lane waypoint is perceived" }),
    ]);
    const client = new Client("", fn, 1);
    await expect(client.evaluate({}))
      .rejects.toThrow(/no lane waypoint/);
  });

  it("turns a 400 into an ApiError carrying the field path", async () => {
    const { fn } = scripted([jsonResponse(400, {
      error: "ParseError",
      detail: "scenario.roi.radius: must be > 0",
    })]);
    const client = new Client("", fn, 1);
    const err = await client.evaluate({}).catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(400);
    expect(fieldPathOf(err.detail)).toBe("scenario.roi.radius");
  });
});

describe("field paths", () => {
  it("extracts dotted paths and ignores plain prose", () => {
    expect(fieldPathOf("scenario.placement.ius[0].sensors: empty"))
      .toBe("scenario.placement.ius[0].sensors");
    expect(fieldPathOf("something went wrong")).toBeNull();
    expect(fieldPathOf("detail: but not a path")).toBeNull();
  });
});

describe("bev", () => {
  it("wraps the scenario with source and layer", async () => {
    const slice = { source: "visibility", layer: "max", values: [[1]],
                    origin: [0, 0], edge: 1, dims: [1, 1, 1],
                    metrics: REPORT.metrics };
    const { fn, calls } = scripted([jsonResponse(200, slice)]);
    const client = new Client("", fn, 1);
    const got = await client.bev({ name: "s" }, "visibility", "max");
    expect(got.values).toEqual([[1]]);
    const sent = JSON.parse(String(calls[0].init?.body));
    expect(sent.source).toBe("visibility");
    expect(sent.scenario.name).toBe("s");
  });
});

describe("evaluation gate", () => {
  it("aborts the previous run when a new one starts", async () => {
    const gate = new EvaluationGate();
    const first = gate.run((signal) => new Promise((_, reject) => {
      signal.addEventListener("abort", () =>
        reject(new DOMException("aborted", "AbortError")));
    }));
    const second = gate.run(async () => "fresh");
    await expect(first).rejects.toThrow(/aborted/);
    await expect(second).resolves.toBe("fresh");
    expect(gate.busy).toBe(false);
  });

  it("cancel() rejects the pending run and clears busy", async () => {
    const gate = new EvaluationGate();
    const pending = gate.run((signal) => new Promise((_, reject) => {
      signal.addEventListener("abort", () =>
        reject(new DOMException("aborted", "AbortError")));
    }));
    expect(gate.busy).toBe(true);
    gate.cancel();
    await expect(pending).rejects.toThrow(/aborted/);
    expect(gate.busy).toBe(false);
  });

  it("a cancelled evaluate never resolves with data", async () => {
    let release: (() => void) | null = null;
    const { fn } = scripted([
      () => {
        throw new DOMException("aborted", "AbortError");
      },
    ]);
    const client = new Client("", fn, 1);
    const gate = new EvaluationGate();
    const run = gate.run(async (signal) => {
      await new Promise<void>((r) => { release = r; });
      return client.evaluate({}, signal);
    });
    release!();
    gate.cancel();
    await expect(run).rejects.toThrow();
  });
});
