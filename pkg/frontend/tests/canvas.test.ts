import { describe, expect, it } from "vitest";

import { drawFrame, worldToScreen, type Surface } from "../src/canvas.js";
import type { Frame } from "../src/scene.js";

function recordingSurface() {
  const calls: Array<{ op: string; args: unknown[] }> = [];
  const surface: Surface = {
    clear: () => calls.push({ op: "clear", args: [] }),
    setGrayed: (on) => calls.push({ op: "setGrayed", args: [on] }),
    polyline: (...args) => calls.push({ op: "polyline", args }),
    circle: (...args) => calls.push({ op: "circle", args }),
    bar: (...args) => calls.push({ op: "bar", args }),
    gauge: (...args) => calls.push({ op: "gauge", args }),
  };
  return { surface, calls };
}

describe("worldToScreen", () => {
  it("flips y and applies scale and offset", () => {
    const vp = { scale: 2, offsetX: 10, offsetY: 100 };
    expect(worldToScreen(vp, [5, 20])).toEqual([20, 60]);
    expect(worldToScreen(vp, [0, 0])).toEqual([10, 100]);
  });
});

describe("drawFrame", () => {
  it("replays items in order with transformed coordinates", () => {
    const frame: Frame = {
      grayed: true,
      items: [
        {
          kind: "polyline",
          points: [
            [0, 0],
            [10, 0],
          ],
          color: "#2ca02c",
          width: 3,
        },
        { kind: "circle", center: [5, -5], radius: 2, color: "#000000" },
        { kind: "bar", label: "proximal", fraction: 0.9, color: "#2ca02c" },
        { kind: "bar", label: "distal", fraction: 1.0, color: "#d62728" },
        { kind: "gauge", label: "j_c", valueDeg: 80, color: "#2ca02c" },
      ],
    };
    const { surface, calls } = recordingSurface();
    drawFrame(surface, { scale: 1, offsetX: 0, offsetY: 0 }, frame);
    expect(calls[0].op).toBe("clear");
    expect(calls[1]).toEqual({ op: "setGrayed", args: [true] });
    expect(calls[2]).toEqual({
      op: "polyline",
      args: [
        [
          [0, 0],
          [10, 0],
        ],
        "#2ca02c",
        3,
        false,
      ],
    });
    expect(calls[3]).toEqual({
      op: "circle",
      args: [[5, 5], 2, "#000000"],
    });
    // bars and gauges get independent row indices
    expect(calls[4].args[0]).toBe(0);
    expect(calls[5].args[0]).toBe(1);
    expect(calls[6].args[0]).toBe(0);
  });
});
