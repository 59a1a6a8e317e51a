/** Viewport state and overlay rendering.
 *
 * Rendering is expressed as a list of draw operations whose coordinates
 * are exact scale transforms of server-provided values; the canvas
 * adapter replays them.  That keeps every pixel decision testable
 * against FrameState fixtures.
 */

import { FrameState, TERMINAL_STATUSES } from "./types.js";

export type DrawOp =
  | { op: "clear"; width: number; height: number }
  | { op: "dot"; x: number; y: number; radius: number; color: string }
  | { op: "circle"; x: number; y: number; radius: number; color: string }
  | {
      op: "segment";
      x1: number;
      y1: number;
      x2: number;
      y2: number;
      color: string;
      width: number;
    }
  | { op: "arrow"; x1: number; y1: number; x2: number; y2: number; color: string }
  | { op: "label"; text: string; x: number; y: number; color: string };

export const COLORS = {
  feature: "#9ad1ff",
  marker: "#ff3b30", // the target marker circle
  inlier: "#2ecc40", // inlier epipolar lines
  outlier: "#ff4136", // outlier epipolar lines
  arrow: "#ffdc00",
  text: "#eeeeee",
};

export const MARKER_RADIUS = 12;
export const DOT_RADIUS = 2.5;
export const ARROW_LENGTH = 120;

export class ViewportModel {
  latest: FrameState | null = null;

  /** Apply a frame; stale frames (index <= last rendered) are dropped.
   * Returns true when the frame advanced the model. */
  apply(state: FrameState): boolean {
    if (this.latest !== null && state.frame <= this.latest.frame) {
      return false;
    }
    this.latest = state;
    return true;
  }

  get terminal(): boolean {
    return this.latest !== null && TERMINAL_STATUSES.has(this.latest.status);
  }
}

/** Turn one frame into draw operations for a canvas of width
 * `canvasWidth` (height follows the image aspect). */
export function renderOverlay(state: FrameState, canvasWidth: number): DrawOp[] {
  const [imgW, imgH] = state.image_size;
  const s = canvasWidth / imgW;
  const ops: DrawOp[] = [{ op: "clear", width: imgW * s, height: imgH * s }];

  for (const f of state.features) {
    ops.push({ op: "dot", x: f.x * s, y: f.y * s, radius: DOT_RADIUS, color: COLORS.feature });
  }

  const ov = state.overlay;
  if (ov !== null) {
    for (const line of ov.lines) {
      if (line.seg === null) continue;
      const [x1, y1, x2, y2] = line.seg;
      ops.push({
        op: "segment",
        x1: x1 * s,
        y1: y1 * s,
        x2: x2 * s,
        y2: y2 * s,
        color: line.inlier ? COLORS.inlier : COLORS.outlier,
        width: 2,
      });
    }
    if (ov.kind === "point" && ov.point !== null) {
      ops.push({
        op: "circle",
        x: ov.point[0] * s,
        y: ov.point[1] * s,
        radius: MARKER_RADIUS,
        color: COLORS.marker,
      });
    } else if (ov.kind === "arrow" && ov.dir !== null) {
      const cx = (imgW / 2) * s;
      const cy = (imgH / 2) * s;
      ops.push({
        op: "arrow",
        x1: cx,
        y1: cy,
        x2: cx + ov.dir[0] * ARROW_LENGTH,
        y2: cy + ov.dir[1] * ARROW_LENGTH,
        color: COLORS.arrow,
      });
    }
  }

  ops.push({
    op: "label",
    text: `step ${state.step} | ${state.status}`,
    x: 8,
    y: 16,
    color: COLORS.text,
  });
  return ops;
}
