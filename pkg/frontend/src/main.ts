/** DOM wiring for the studio page. */

import {
  ServiceError,
  StudioClient,
  type CoveragePayload,
  type DesignResultPayload,
  type GraspResult,
  type SolvePayload,
  type TracePayload,
} from "./api.js";
import { drawFrame, type Surface, type Viewport } from "./canvas.js";
import { watchJob } from "./jobs.js";
import { renderCanvas, type ScenePayloads } from "./scene.js";
import { initialViewState, setJoint, type ViewState } from "./state.js";
import { QueryScheduler } from "./scheduler.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function canvasSurface(ctx: CanvasRenderingContext2D): Surface {
  return {
    clear() {
      ctx.clearRect(0, 0, ctx.canvas.width, ctx.canvas.height);
    },
    setGrayed(on) {
      ctx.globalAlpha = on ? 0.35 : 1.0;
    },
    polyline(points, color, width, dashed) {
      if (points.length < 2) return;
      ctx.strokeStyle = color;
      ctx.lineWidth = width;
      ctx.setLineDash(dashed ? [6, 4] : []);
      ctx.beginPath();
      ctx.moveTo(points[0][0], points[0][1]);
      for (const p of points.slice(1)) ctx.lineTo(p[0], p[1]);
      ctx.stroke();
      ctx.setLineDash([]);
    },
    circle(center, radius, color) {
      ctx.fillStyle = color;
      ctx.beginPath();
      ctx.arc(center[0], center[1], radius, 0, 2 * Math.PI);
      ctx.fill();
    },
    bar(index, label, fraction, color) {
      const y = 20 + index * 18;
      ctx.fillStyle = color;
      ctx.fillRect(620, y, 120 * fraction, 12);
      ctx.strokeStyle = "#888888";
      ctx.strokeRect(620, y, 120, 12);
      ctx.fillStyle = "#000000";
      ctx.font = "11px sans-serif";
      ctx.fillText(`${label} ${(100 * fraction).toFixed(1)}%`, 748, y + 10);
    },
    gauge(index, label, valueDeg, color) {
      const y = 90 + index * 16;
      ctx.fillStyle = color;
      ctx.font = "11px sans-serif";
      ctx.fillText(`${label}: ${valueDeg.toFixed(1)} deg`, 620, y);
    },
  };
}

function toast(message: string): void {
  const box = el<HTMLDivElement>("toasts");
  const node = document.createElement("div");
  node.className = "toast";
  node.textContent = message;
  box.appendChild(node);
  setTimeout(() => node.remove(), 4000);
}

async function start(): Promise<void> {
  const client = new StudioClient("");
  let view: ViewState = initialViewState();
  const payloads: ScenePayloads = {};
  let graspTrace: GraspResult | null = null;
  let ghostResult: DesignResultPayload | null = null;

  const canvas = el<HTMLCanvasElement>("scene");
  const ctx = canvas.getContext("2d");
  if (!ctx) throw new Error("no 2d context");
  const surface = canvasSurface(ctx);
  const viewport: Viewport = { scale: 4.0, offsetX: 40, offsetY: 220 };

  function redraw(): void {
    payloads.ghost = ghostResult ?? undefined;
    drawFrame(surface, viewport, renderCanvas(view, payloads));
  }

  function onError(err: unknown): void {
    if (err instanceof ServiceError && err.status === 422) {
      view = { ...view, infeasible: true };
      redraw();
      toast(`infeasible: ${err.message}`);
    } else {
      toast(String(err));
    }
  }

  const session = await client.createSession();
  view = { ...view, sessionId: session.session_id, revision: session.revision };

  const solveQ = new QueryScheduler<number, SolvePayload>(
    (act) => client.solve(session.session_id, act),
    (payload) => {
      payloads.solve = payload;
      view = { ...view, infeasible: false };
      redraw();
    },
    onError,
  );
  const traceQ = new QueryScheduler<[number, number], TracePayload>(
    ([pip, dip]) => client.trace(session.session_id, pip, dip),
    (payload) => {
      payloads.trace = payload;
      redraw();
    },
    onError,
  );
  const coverageQ = new QueryScheduler<[number, number], CoveragePayload>(
    ([pip, dip]) => client.coverage(session.session_id, pip, dip),
    (payload) => {
      payloads.coverage = payload;
      redraw();
    },
    onError,
  );

  function refetch(): void {
    traceQ.request([view.pipDeg, view.dipDeg]);
    coverageQ.request([view.pipDeg, view.dipDeg]);
  }

  el<HTMLInputElement>("slider-actuator").addEventListener("input", (e) => {
    const v = Number((e.target as HTMLInputElement).value);
    view = { ...view, actuatorDeg: v };
    solveQ.request(v);
  });
  for (const joint of ["pip", "dip"] as const) {
    el<HTMLInputElement>(`slider-${joint}`).addEventListener("input", (e) => {
      const v = Number((e.target as HTMLInputElement).value);
      view = setJoint(view, joint, v);
      refetch();
    });
  }
  el<HTMLInputElement>("camera-tilt").addEventListener("change", async (e) => {
    const v = Number((e.target as HTMLInputElement).value);
    try {
      const info = await client.patchScene(session.session_id, view.revision, {
        camera_boresight_deg: v,
      });
      view = { ...view, cameraTiltDeg: v, revision: info.revision };
      refetch();
    } catch (err) {
      onError(err);
    }
  });
  for (const overlay of ["rays", "coverage", "gauges"] as const) {
    el<HTMLInputElement>(`toggle-${overlay}`).addEventListener("change",
      (e) => {
        const on = (e.target as HTMLInputElement).checked;
        view = { ...view, overlays: { ...view.overlays, [overlay]: on } };
        redraw();
      });
  }

  el<HTMLButtonElement>("run-grasp").addEventListener("click", async () => {
    const diameter = Number(el<HTMLInputElement>("grasp-diameter").value);
    try {
      const handle = await client.startGrasp(session.session_id, diameter);
      const job = await watchJob(client, handle.job_id, {
        onProgress: (p) => {
          el<HTMLProgressElement>("job-progress").value = p;
        },
      });
      if (job.state === "failed") throw new Error(job.error ?? "job failed");
      graspTrace = job.result as GraspResult;
      el<HTMLInputElement>("playback").max =
        String(graspTrace.steps.length - 1);
      toast(`grasp done: ${graspTrace.contacts.length} contacts`);
    } catch (err) {
      onError(err);
    }
  });

  el<HTMLInputElement>("playback").addEventListener("input", (e) => {
    if (!graspTrace) return;
    const cursor = Number((e.target as HTMLInputElement).value);
    view = { ...view, playbackCursor: cursor };
    const step = graspTrace.steps[cursor];
    view = setJoint(setJoint(view, "pip", step.theta_pip_deg),
      "dip", step.theta_dip_deg);
    refetch();
  });

  for (const kind of ["linkage", "optics"] as const) {
    el<HTMLButtonElement>(`optimize-${kind}`).addEventListener("click",
      async () => {
        try {
          const handle = await client.startOptimize(
            session.session_id, kind, 200, 0);
          const job = await watchJob(client, handle.job_id, {
            onProgress: (p) => {
              el<HTMLProgressElement>("job-progress").value = p;
            },
          });
          if (job.state === "failed") {
            throw new Error(job.error ?? "job failed");
          }
          ghostResult = job.result as DesignResultPayload;
          redraw();
          toast(`${kind} search done; review the ghost overlay`);
        } catch (err) {
          onError(err);
        }
      });
  }
  el<HTMLButtonElement>("ghost-reject").addEventListener("click", () => {
    ghostResult = null;
    redraw();
  });

  solveQ.request(view.actuatorDeg);
  refetch();
}

start().catch((err) => toast(String(err)));
