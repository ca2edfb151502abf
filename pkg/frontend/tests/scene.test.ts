import { describe, expect, it } from "vitest";

import type {
  CoveragePayload,
  DesignResultPayload,
  SolvePayload,
  TracePayload,
} from "../src/api.js";
import {
  GAUGE_BAD,
  GAUGE_OK,
  PAD_COLORS,
  RAY_COLORS,
  ghostMirrors,
  renderCanvas,
  type PolylineItem,
} from "../src/scene.js";
import { initialViewState } from "../src/state.js";

const straightSolve: SolvePayload = {
  revision: 1,
  config: { actuator_deg: 0, theta_pip_deg: 0, theta_dip_deg: 0 },
  frames: {
    proximal: { origin: [0, 0], angle_rad: 0 },
    intermediate: { origin: [46, 0], angle_rad: 0 },
    distal: { origin: [76, 0], angle_rad: 0 },
  },
  pads: {
    proximal: [
      [0, 0],
      [46, 0],
    ],
    intermediate: [
      [46, 0],
      [76, 0],
    ],
    distal: [
      [76, 0],
      [102, 0],
    ],
  },
};

const trace: TracePayload = {
  revision: 1,
  camera: [50, -15],
  mirrors: [
    [
      [30, -10],
      [40, -12],
    ],
  ],
  rays: [
    {
      pixel: 0,
      vertices: [
        [50, -15],
        [20, -1],
      ],
      terminal: "pad",
      pad: "proximal",
      bounces: 0,
    },
    {
      pixel: 40,
      vertices: [
        [50, -15],
        [90, -40],
      ],
      terminal: "escaped",
      pad: null,
      bounces: 0,
    },
  ],
};

const coverage: CoveragePayload = {
  revision: 1,
  fractions: { proximal: 0.98, intermediate: 1.0, distal: 0.955 },
  intervals: { proximal: [[0, 0.98]], intermediate: [[0, 1]], distal: [] },
};

describe("renderCanvas", () => {
  it("draws three collinear pads at the straight config", () => {
    const frame = renderCanvas(initialViewState(), { solve: straightSolve });
    const pads = frame.items.filter(
      (i): i is PolylineItem =>
        i.kind === "polyline" &&
        Object.values(PAD_COLORS).includes(i.color),
    );
    expect(pads).toHaveLength(3);
    const ys = pads.flatMap((p) => p.points.map((pt) => pt[1]));
    expect(new Set(ys)).toEqual(new Set([0]));
    expect(pads.map((p) => p.color)).toEqual([
      PAD_COLORS.proximal,
      PAD_COLORS.intermediate,
      PAD_COLORS.distal,
    ]);
  });

  it("populates coverage bars straight from payload fractions", () => {
    const frame = renderCanvas(initialViewState(), { coverage });
    const bars = frame.items.filter((i) => i.kind === "bar");
    expect(bars).toHaveLength(3);
    for (const bar of bars) {
      if (bar.kind !== "bar") continue;
      expect(bar.fraction).toBe(coverage.fractions[bar.label]);
    }
  });

  it("colors rays by terminal kind", () => {
    const frame = renderCanvas(initialViewState(), { trace });
    const colors = frame.items
      .filter((i): i is PolylineItem => i.kind === "polyline" && i.width === 0.5)
      .map((i) => i.color);
    expect(colors).toEqual([RAY_COLORS.pad, RAY_COLORS.escaped]);
  });

  it("omits ray polylines when the overlay is toggled off", () => {
    const view = {
      ...initialViewState(),
      overlays: { rays: false, coverage: true, gauges: true },
    };
    const frame = renderCanvas(view, { trace });
    const rays = frame.items.filter(
      (i) => i.kind === "polyline" && i.width === 0.5,
    );
    expect(rays).toHaveLength(0);
    // camera and mirrors stay visible
    expect(frame.items.some((i) => i.kind === "circle")).toBe(true);
  });

  it("turns transmission gauges red outside [35,145]", () => {
    const frame = renderCanvas(initialViewState(), {
      transmissionDeg: { j_c: 90, j_d: 30, j_e: 145, j_gp: 150 },
    });
    const colorByLabel = new Map(
      frame.items
        .filter((i) => i.kind === "gauge")
        .map((i) => [i.kind === "gauge" ? i.label : "", i.color]),
    );
    expect(colorByLabel.get("j_c")).toBe(GAUGE_OK);
    expect(colorByLabel.get("j_d")).toBe(GAUGE_BAD);
    expect(colorByLabel.get("j_e")).toBe(GAUGE_OK);
    expect(colorByLabel.get("j_gp")).toBe(GAUGE_BAD);
  });

  it("grays the frame for infeasible configs instead of crashing", () => {
    const view = { ...initialViewState(), infeasible: true };
    const frame = renderCanvas(view, { solve: straightSolve });
    expect(frame.grayed).toBe(true);
    expect(frame.items.length).toBeGreaterThan(0);
  });

  it("renders optimization results as dashed ghost mirrors", () => {
    const ghost: DesignResultPayload = {
      parameters: {
        camera_x: 9.2,
        camera_y: -15.3,
        boresight_deg: 72.2,
        m0_x: 30,
        m0_y: -14,
        m0_len: 10,
        m0_tilt: 0,
        m1_x: 40,
        m1_y: -20,
        m1_len: 8,
        m1_tilt: 90,
      },
      objective: 0.96,
      margins: {},
      evaluations: 10,
      feasible: true,
    };
    const frame = renderCanvas(initialViewState(), { ghost });
    const dashed = frame.items.filter(
      (i): i is PolylineItem => i.kind === "polyline" && i.dashed === true,
    );
    expect(dashed).toHaveLength(2);
    expect(dashed[0].points).toEqual([
      [25, -14],
      [35, -14],
    ]);
    const [p0, p1] = dashed[1].points;
    expect(p0[0]).toBeCloseTo(40, 9);
    expect(p0[1]).toBeCloseTo(-24, 9);
    expect(p1[1]).toBeCloseTo(-16, 9);
  });

  it("every numeric in the display list is traceable to a payload field", () => {
    const frame = renderCanvas(initialViewState(), {
      solve: straightSolve,
      trace,
      coverage,
    });
    const payloadNumbers = new Set<number>();
    const walk = (v: unknown): void => {
      if (typeof v === "number") payloadNumbers.add(v);
      else if (Array.isArray(v)) v.forEach(walk);
      else if (v && typeof v === "object") {
        Object.values(v).forEach(walk);
      }
    };
    walk(straightSolve);
    walk(trace);
    walk(coverage);
    for (const item of frame.items) {
      if (item.kind === "polyline") {
        for (const [x, y] of item.points) {
          expect(payloadNumbers.has(x)).toBe(true);
          expect(payloadNumbers.has(y)).toBe(true);
        }
      } else if (item.kind === "circle") {
        expect(payloadNumbers.has(item.center[0])).toBe(true);
        expect(payloadNumbers.has(item.center[1])).toBe(true);
      } else if (item.kind === "bar") {
        expect(payloadNumbers.has(item.fraction)).toBe(true);
      }
    }
  });
});

describe("ghostMirrors", () => {
  it("returns no segments when the result has no mirror slots", () => {
    const result: DesignResultPayload = {
      parameters: { crank_len: 12.0 },
      objective: 5.0,
      margins: {},
      evaluations: 3,
      feasible: true,
    };
    expect(ghostMirrors(result)).toEqual([]);
  });
});
