/** Pure frame builder: (ViewState, latest payloads) -> display list.
 *
 * No geometry is computed here beyond passing payload coordinates
 * through; the canvas adapter just replays the list.  This keeps the
 * thin-client rule testable: every number in the list is traceable to a
 * service payload field.
 */

import type {
  CoveragePayload,
  DesignResultPayload,
  RayPayload,
  SolvePayload,
  TracePayload,
} from "./api.js";
import type { ViewState } from "./state.js";

export const PAD_COLORS: Record<string, string> = {
  proximal: "#2ca02c",
  intermediate: "#1f77b4",
  distal: "#d62728",
};

export const RAY_COLORS: Record<RayPayload["terminal"], string> = {
  pad: "#2ca02c",
  occluded: "#e377c2",
  escaped: "#c7c7c7",
};

export const MIRROR_COLOR = "#555555";
export const GAUGE_OK = "#2ca02c";
export const GAUGE_BAD = "#d62728";
export const TRANSMISSION_WINDOW: [number, number] = [35, 145];

export interface PolylineItem {
  kind: "polyline";
  points: [number, number][];
  color: string;
  dashed?: boolean;
  width?: number;
}

export interface CircleItem {
  kind: "circle";
  center: [number, number];
  radius: number;
  color: string;
}

export interface BarItem {
  kind: "bar";
  label: string;
  fraction: number;
  color: string;
}

export interface GaugeItem {
  kind: "gauge";
  label: string;
  valueDeg: number;
  color: string;
}

export type DisplayItem = PolylineItem | CircleItem | BarItem | GaugeItem;

export interface Frame {
  items: DisplayItem[];
  grayed: boolean;
}

export interface ScenePayloads {
  solve?: SolvePayload;
  trace?: TracePayload;
  coverage?: CoveragePayload;
  transmissionDeg?: Record<string, number>;
  ghost?: DesignResultPayload; // pending optimization result overlay
}

export function renderCanvas(view: ViewState, payloads: ScenePayloads): Frame {
  const items: DisplayItem[] = [];

  if (payloads.solve) {
    for (const [name, segment] of Object.entries(payloads.solve.pads)) {
      items.push({
        kind: "polyline",
        points: segment,
        color: PAD_COLORS[name] ?? "#000000",
        width: 3,
      });
    }
  }

  if (payloads.trace) {
    items.push({
      kind: "circle",
      center: payloads.trace.camera,
      radius: 1.5,
      color: "#000000",
    });
    for (const mirror of payloads.trace.mirrors) {
      items.push({ kind: "polyline", points: mirror, color: MIRROR_COLOR });
    }
    if (view.overlays.rays) {
      for (const ray of payloads.trace.rays) {
        items.push({
          kind: "polyline",
          points: ray.vertices,
          color: RAY_COLORS[ray.terminal],
          width: 0.5,
        });
      }
    }
  }

  if (view.overlays.coverage && payloads.coverage) {
    for (const [name, fraction] of Object.entries(
      payloads.coverage.fractions,
    )) {
      items.push({
        kind: "bar",
        label: name,
        fraction,
        color: PAD_COLORS[name] ?? "#000000",
      });
    }
  }

  if (view.overlays.gauges && payloads.transmissionDeg) {
    const [lo, hi] = TRANSMISSION_WINDOW;
    for (const [joint, valueDeg] of Object.entries(payloads.transmissionDeg)) {
      const inside = valueDeg >= lo && valueDeg <= hi;
      items.push({
        kind: "gauge",
        label: joint,
        valueDeg,
        color: inside ? GAUGE_OK : GAUGE_BAD,
      });
    }
  }

  if (payloads.ghost) {
    for (const mirror of ghostMirrors(payloads.ghost)) {
      items.push({
        kind: "polyline",
        points: mirror,
        color: MIRROR_COLOR,
        dashed: true,
      });
    }
  }

  return { items, grayed: view.infeasible };
}

/** Mirror endpoint segments from an optics design result's parameters
 * (center/length/tilt per slot, exactly as the service reports them). */
export function ghostMirrors(
  result: DesignResultPayload,
): [[number, number], [number, number]][] {
  const out: [[number, number], [number, number]][] = [];
  for (let i = 0; ; i++) {
    const cx = result.parameters[`m${i}_x`];
    const cy = result.parameters[`m${i}_y`];
    const len = result.parameters[`m${i}_len`];
    const tilt = result.parameters[`m${i}_tilt`];
    if ([cx, cy, len, tilt].some((v) => v === undefined)) break;
    const t = (tilt * Math.PI) / 180;
    const hx = 0.5 * len * Math.cos(t);
    const hy = 0.5 * len * Math.sin(t);
    out.push([
      [cx - hx, cy - hy],
      [cx + hx, cy + hy],
    ]);
  }
  return out;
}
