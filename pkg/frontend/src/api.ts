/** Thin typed client for the workbench HTTP service.
 *
 * The studio never computes kinematics or optics itself; every number it
 * renders comes out of one of these payloads.
 */

export interface ConfigPayload {
  actuator_deg: number;
  theta_pip_deg: number;
  theta_dip_deg: number;
}

export interface FramePayload {
  origin: [number, number];
  angle_rad: number;
}

export interface SolvePayload {
  revision: number;
  config: ConfigPayload;
  frames: Record<string, FramePayload>;
  pads: Record<string, [number, number][]>;
}

export interface RayPayload {
  pixel: number;
  vertices: [number, number][];
  terminal: "pad" | "occluded" | "escaped";
  pad: string | null;
  bounces: number;
}

export interface TracePayload {
  revision: number;
  rays: RayPayload[];
  camera: [number, number];
  mirrors: [[number, number], [number, number]][];
}

export interface CoveragePayload {
  revision: number;
  fractions: Record<string, number>;
  intervals: Record<string, [number, number][]>;
}

export interface JobHandle {
  job_id: string;
  state: string;
  revision: number;
}

export interface JobPayload {
  job_id: string;
  kind: string;
  state: "queued" | "running" | "done" | "failed";
  progress: number;
  revision: number;
  result?: unknown;
  error?: string;
}

export interface GraspResult {
  steps: ConfigPayload[];
  contacts: { step: number; pad: string; actuator_deg: number }[];
  final: ConfigPayload;
  contact_flags: Record<string, boolean>;
  applied_torque: number;
  torque_limited: boolean;
  reached: boolean;
}

export interface DesignResultPayload {
  parameters: Record<string, number>;
  objective: number;
  margins: Record<string, number>;
  evaluations: number;
  feasible: boolean;
}

export interface SessionInfo {
  session_id: string;
  revision: number;
}

export class ServiceError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class StudioClient {
  constructor(
    private readonly base: string,
    private readonly fetchImpl: FetchLike = (u, i) => fetch(u, i),
  ) {}

  private async call<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchImpl(this.base + path, init);
    if (!resp.ok) {
      let detail = resp.statusText;
      try {
        const body = (await resp.json()) as { detail?: string };
        if (body.detail) detail = body.detail;
      } catch {
        /* non-JSON error body; keep the status text */
      }
      throw new ServiceError(resp.status, detail);
    }
    return (await resp.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.call<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  createSession(project?: unknown): Promise<SessionInfo> {
    return this.post<SessionInfo>("/sessions", { project: project ?? null });
  }

  solve(session: string, actuatorDeg: number): Promise<SolvePayload> {
    return this.call<SolvePayload>(
      `/solve?session=${session}&actuator=${actuatorDeg}`,
    );
  }

  trace(session: string, pip: number, dip: number, step = 30):
      Promise<TracePayload> {
    return this.call<TracePayload>(
      `/trace?session=${session}&pip=${pip}&dip=${dip}&step=${step}`,
    );
  }

  coverage(session: string, pip: number, dip: number):
      Promise<CoveragePayload> {
    return this.call<CoveragePayload>(
      `/coverage?session=${session}&pip=${pip}&dip=${dip}`,
    );
  }

  patchScene(session: string, revision: number, patch: object):
      Promise<SessionInfo> {
    return this.call<SessionInfo>(`/sessions/${session}/scene`, {
      method: "PATCH",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ revision, ...patch }),
    });
  }

  startGrasp(session: string, diameter: number): Promise<JobHandle> {
    return this.post<JobHandle>(`/grasp?session=${session}`, { diameter });
  }

  startOptimize(session: string, kind: "linkage" | "optics",
      budget: number, seed: number): Promise<JobHandle> {
    return this.post<JobHandle>(
      `/optimize/${kind}?session=${session}`, { budget, seed });
  }

  job(jobId: string): Promise<JobPayload> {
    return this.call<JobPayload>(`/jobs/${jobId}`);
  }

  cancelJob(jobId: string): Promise<unknown> {
    return this.post(`/jobs/${jobId}/cancel`, {});
  }
}
