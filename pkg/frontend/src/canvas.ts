/** Replay a display list onto a 2D context.
 *
 * World units are millimetres with +y up; the viewport flips y and
 * scales.  The context surface is abstracted so tests can record calls.
 */

import type { DisplayItem, Frame } from "./scene.js";

export interface Surface {
  clear(): void;
  polyline(
    points: [number, number][],
    color: string,
    width: number,
    dashed: boolean,
  ): void;
  circle(center: [number, number], radius: number, color: string): void;
  bar(index: number, label: string, fraction: number, color: string): void;
  gauge(index: number, label: string, valueDeg: number, color: string): void;
  setGrayed(on: boolean): void;
}

export interface Viewport {
  scale: number;
  offsetX: number;
  offsetY: number;
}

export function worldToScreen(
  viewport: Viewport,
  p: [number, number],
): [number, number] {
  return [
    viewport.offsetX + p[0] * viewport.scale,
    viewport.offsetY - p[1] * viewport.scale,
  ];
}

export function drawFrame(
  surface: Surface,
  viewport: Viewport,
  frame: Frame,
): void {
  surface.clear();
  surface.setGrayed(frame.grayed);
  let barIndex = 0;
  let gaugeIndex = 0;
  for (const item of frame.items) {
    drawItem(surface, viewport, item, () => barIndex++, () => gaugeIndex++);
  }
}

function drawItem(
  surface: Surface,
  viewport: Viewport,
  item: DisplayItem,
  nextBar: () => number,
  nextGauge: () => number,
): void {
  switch (item.kind) {
    case "polyline":
      surface.polyline(
        item.points.map((p) => worldToScreen(viewport, p)),
        item.color,
        item.width ?? 1,
        item.dashed ?? false,
      );
      break;
    case "circle":
      surface.circle(
        worldToScreen(viewport, item.center),
        item.radius * viewport.scale,
        item.color,
      );
      break;
    case "bar":
      surface.bar(nextBar(), item.label, item.fraction, item.color);
      break;
    case "gauge":
      surface.gauge(nextGauge(), item.label, item.valueDeg, item.color);
      break;
  }
}
