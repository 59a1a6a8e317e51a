/** Golden-frame rendering: every drawn coordinate must be an exact
 * scale transform of the server-provided FrameState fixtures. */

import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import { FrameState } from "../src/types.js";
import {
  ARROW_LENGTH,
  COLORS,
  DOT_RADIUS,
  MARKER_RADIUS,
  renderOverlay,
  ViewportModel,
} from "../src/viewport.js";

const fixtures: Record<string, FrameState> = JSON.parse(
  readFileSync(new URL("./fixtures/frames.json", import.meta.url), "utf-8"),
);

const CANVAS_WIDTH = 960;

describe("renderOverlay golden frames", () => {
  it("scales every feature dot exactly", () => {
    for (const frame of Object.values(fixtures)) {
      const s = CANVAS_WIDTH / frame.image_size[0];
      const ops = renderOverlay(frame, CANVAS_WIDTH);
      const dots = ops.filter((o) => o.op === "dot");
      expect(dots.length).toBe(frame.features.length);
      frame.features.forEach((f, i) => {
        const dot = dots[i] as Extract<(typeof dots)[number], { op: "dot" }>;
        expect(dot.x).toBe(f.x * s);
        expect(dot.y).toBe(f.y * s);
        expect(dot.radius).toBe(DOT_RADIUS);
      });
    }
  });

  it("draws the point marker as a circle at the exact scaled pixel", () => {
    const frame = fixtures.point;
    expect(frame.overlay?.kind).toBe("point");
    const s = CANVAS_WIDTH / frame.image_size[0];
    const ops = renderOverlay(frame, CANVAS_WIDTH);
    const circles = ops.filter((o) => o.op === "circle");
    expect(circles.length).toBe(1);
    const c = circles[0] as Extract<(typeof circles)[number], { op: "circle" }>;
    expect(c.x).toBe(frame.overlay!.point![0] * s);
    expect(c.y).toBe(frame.overlay!.point![1] * s);
    expect(c.radius).toBe(MARKER_RADIUS);
    expect(c.color).toBe(COLORS.marker);
  });

  it("anchors the arrow at the canvas center along the unit direction", () => {
    const frame = fixtures.arrow;
    expect(frame.overlay?.kind).toBe("arrow");
    const [w, h] = frame.image_size;
    const s = CANVAS_WIDTH / w;
    const ops = renderOverlay(frame, CANVAS_WIDTH);
    const arrows = ops.filter((o) => o.op === "arrow");
    expect(arrows.length).toBe(1);
    const a = arrows[0] as Extract<(typeof arrows)[number], { op: "arrow" }>;
    expect(a.x1).toBe((w / 2) * s);
    expect(a.y1).toBe((h / 2) * s);
    const [dx, dy] = frame.overlay!.dir!;
    expect(a.x2).toBe((w / 2) * s + dx * ARROW_LENGTH);
    expect(a.y2).toBe((h / 2) * s + dy * ARROW_LENGTH);
    const norm = Math.hypot(dx, dy);
    expect(Math.abs(norm - 1)).toBeLessThan(1e-9);
  });

  it("colors inlier segments green and outliers red", () => {
    const frame = fixtures.lines;
    const s = CANVAS_WIDTH / frame.image_size[0];
    const ops = renderOverlay(frame, CANVAS_WIDTH);
    const segs = ops.filter((o) => o.op === "segment") as Array<
      Extract<ReturnType<typeof renderOverlay>[number], { op: "segment" }>
    >;
    expect(segs.length).toBe(2);
    expect(segs[0].color).toBe(COLORS.inlier);
    expect(segs[1].color).toBe(COLORS.outlier);
    const seg = frame.overlay!.lines[0].seg!;
    expect(segs[0].x1).toBe(seg[0] * s);
    expect(segs[0].y1).toBe(seg[1] * s);
    expect(segs[0].x2).toBe(seg[2] * s);
    expect(segs[0].y2).toBe(seg[3] * s);
  });

  it("always shows the step counter and status", () => {
    for (const frame of Object.values(fixtures)) {
      const ops = renderOverlay(frame, CANVAS_WIDTH);
      const labels = ops.filter((o) => o.op === "label") as Array<
        Extract<ReturnType<typeof renderOverlay>[number], { op: "label" }>
      >;
      expect(labels.length).toBe(1);
      expect(labels[0].text).toContain(`step ${frame.step}`);
      expect(labels[0].text).toContain(frame.status);
    }
  });
});

describe("ViewportModel", () => {
  it("drops stale frames", () => {
    const model = new ViewportModel();
    expect(model.apply(fixtures.point)).toBe(true);
    const stale = { ...fixtures.point, frame: fixtures.point.frame - 1 };
    expect(model.apply(stale)).toBe(false);
    expect(model.apply({ ...fixtures.point, frame: fixtures.point.frame })).toBe(false);
    expect(model.apply({ ...fixtures.point, frame: fixtures.point.frame + 1 })).toBe(true);
  });

  it("flags terminal statuses", () => {
    const model = new ViewportModel();
    model.apply(fixtures.terminal);
    expect(model.terminal).toBe(true);
  });
});
