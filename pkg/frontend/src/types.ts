/** Wire types for the guidance service. The client performs no geometry
 * beyond scaling these values onto the canvas. */

export type OverlayKind = "point" | "arrow" | "lines";

export interface OverlayLine {
  a: number;
  b: number;
  c: number;
  seg: [number, number, number, number] | null;
  inlier: boolean;
}

export interface Overlay {
  kind: OverlayKind;
  point: [number, number] | null;
  dir: [number, number] | null;
  lines: OverlayLine[];
}

export interface Feature {
  bin: number;
  x: number;
  y: number;
}

export interface FrameState {
  frame: number;
  status: string;
  step: number;
  features: Feature[];
  overlay: Overlay | null;
  image_size: [number, number];
}

export function parseFrame(raw: unknown): FrameState {
  const obj = raw as Record<string, unknown>;
  if (
    typeof obj !== "object" ||
    obj === null ||
    typeof obj.frame !== "number" ||
    typeof obj.status !== "string" ||
    !Array.isArray(obj.features) ||
    !Array.isArray(obj.image_size)
  ) {
    throw new Error("malformed frame state");
  }
  return obj as unknown as FrameState;
}

export const TERMINAL_STATUSES = new Set([
  "success",
  "no_overlap_failure",
  "center_failure",
  "step_limit",
]);
