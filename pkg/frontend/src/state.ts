/** View state: what the user is steering, independent of any payload. */

export interface OverlayToggles {
  rays: boolean;
  coverage: boolean;
  gauges: boolean;
}

export interface ViewState {
  sessionId: string | null;
  revision: number;
  actuatorDeg: number;
  pipDeg: number;
  dipDeg: number;
  cameraTiltDeg: number | null; // null until the handle is first dragged
  overlays: OverlayToggles;
  playbackCursor: number; // index into a fetched grasp trace
  infeasible: boolean;    // last query was rejected; gray the frame
}

export const JOINT_LIMITS = { min: 0, max: 90 };

export function initialViewState(): ViewState {
  return {
    sessionId: null,
    revision: 0,
    actuatorDeg: 0,
    pipDeg: 0,
    dipDeg: 0,
    cameraTiltDeg: null,
    overlays: { rays: true, coverage: true, gauges: true },
    playbackCursor: 0,
    infeasible: false,
  };
}

function clamp(v: number, lo: number, hi: number): number {
  return Math.min(hi, Math.max(lo, v));
}

export function setJoint(
  state: ViewState,
  joint: "pip" | "dip",
  valueDeg: number,
): ViewState {
  const v = clamp(valueDeg, JOINT_LIMITS.min, JOINT_LIMITS.max);
  return joint === "pip" ? { ...state, pipDeg: v } : { ...state, dipDeg: v };
}

export function setActuator(state: ViewState, valueDeg: number): ViewState {
  return { ...state, actuatorDeg: Math.max(0, valueDeg) };
}
