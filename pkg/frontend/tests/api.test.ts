import { describe, expect, it } from "vitest";

import {
  ServiceError,
  StudioClient,
  type FetchLike,
} from "../src/api.js";
import { watchJob } from "../src/jobs.js";

function fakeFetch(
  handler: (url: string, init?: RequestInit) => { status: number; body: unknown },
): { impl: FetchLike; calls: Array<{ url: string; init?: RequestInit }> } {
  const calls: Array<{ url: string; init?: RequestInit }> = [];
  const impl: FetchLike = async (url, init) => {
    calls.push({ url, init });
    const { status, body } = handler(url, init);
    return {
      ok: status >= 200 && status < 300,
      status,
      statusText: `status ${status}`,
      json: async () => body,
    } as Response;
  };
  return { impl, calls };
}

describe("StudioClient", () => {
  it("builds query urls and parses payloads", async () => {
    const { impl, calls } = fakeFetch(() => ({
      status: 200,
      body: { revision: 3, fractions: { proximal: 1 }, intervals: {} },
    }));
    const client = new StudioClient("http://svc", impl);
    const payload = await client.coverage("s1", 30, 45);
    expect(calls[0].url).toBe("http://svc/coverage?session=s1&pip=30&dip=45");
    expect(payload.revision).toBe(3);
    expect(payload.fractions.proximal).toBe(1);
  });

  it("sends scene patches with the revision embedded", async () => {
    const { impl, calls } = fakeFetch(() => ({
      status: 200,
      body: { session_id: "s1", revision: 4 },
    }));
    const client = new StudioClient("", impl);
    await client.patchScene("s1", 3, { camera_boresight_deg: 80 });
    expect(calls[0].url).toBe("/sessions/s1/scene");
    expect(calls[0].init?.method).toBe("PATCH");
    expect(JSON.parse(String(calls[0].init?.body))).toEqual({
      revision: 3,
      camera_boresight_deg: 80,
    });
  });

  it("raises ServiceError with the server detail", async () => {
    const { impl } = fakeFetch(() => ({
      status: 422,
      body: { detail: "configuration outside the operating range" },
    }));
    const client = new StudioClient("", impl);
    await expect(client.solve("s1", 720)).rejects.toThrowError(ServiceError);
    await expect(client.solve("s1", 720)).rejects.toThrowError(
      /operating range/,
    );
  });
});

describe("watchJob", () => {
  it("polls until done and reports monotone progress", async () => {
    const states = [
      { state: "queued", progress: 0 },
      { state: "running", progress: 0.4 },
      { state: "running", progress: 0.9 },
      { state: "done", progress: 1, result: { objective: 0.97 } },
    ];
    let k = 0;
    const { impl } = fakeFetch(() => ({
      status: 200,
      body: { job_id: "j1", kind: "optimize-optics", revision: 1, ...states[k++] },
    }));
    const client = new StudioClient("", impl);
    const seen: number[] = [];
    const job = await watchJob(client, "j1", {
      onProgress: (p) => seen.push(p),
      sleep: async () => {},
    });
    expect(job.state).toBe("done");
    expect(seen).toEqual([0, 0.4, 0.9, 1]);
    expect((job.result as { objective: number }).objective).toBe(0.97);
  });

  it("settles on failed jobs (cancellation path)", async () => {
    const { impl } = fakeFetch(() => ({
      status: 200,
      body: {
        job_id: "j2",
        kind: "grasp",
        state: "failed",
        progress: 0.2,
        revision: 1,
        error: "cancelled",
      },
    }));
    const client = new StudioClient("", impl);
    const job = await watchJob(client, "j2", { sleep: async () => {} });
    expect(job.state).toBe("failed");
    expect(job.error).toBe("cancelled");
  });

  it("cancel endpoint posts to the job", async () => {
    const { impl, calls } = fakeFetch(() => ({
      status: 200,
      body: { job_id: "j3", state: "running", cancelling: true },
    }));
    const client = new StudioClient("", impl);
    await client.cancelJob("j3");
    expect(calls[0].url).toBe("/jobs/j3/cancel");
    expect(calls[0].init?.method).toBe("POST");
  });
});
