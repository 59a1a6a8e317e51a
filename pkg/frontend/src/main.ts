/** Page wiring: connect to a session, render its stream, steer with the
 * arrow keys or by dragging on the canvas. */

import { applyDrawOps } from "./canvas.js";
import { dragToDelta, keyToDelta, SteerController } from "./steer.js";
import { StreamClient } from "./stream.js";
import { FrameState } from "./types.js";
import { renderOverlay, ViewportModel } from "./viewport.js";

const CANVAS_WIDTH = 960;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function wsBase(httpBase: string): string {
  return httpBase.replace(/^http/, "ws");
}

export function boot(): void {
  const canvas = el<HTMLCanvasElement>("viewport");
  const status = el<HTMLElement>("status");
  const form = el<HTMLFormElement>("connect-form");
  const sessionInput = el<HTMLInputElement>("session-id");
  const baseInput = el<HTMLInputElement>("base-url");
  const ctx = canvas.getContext("2d");
  if (!ctx) throw new Error("no 2d context");

  const model = new ViewportModel();
  let steer: SteerController | null = null;
  let stream: StreamClient | null = null;

  const draw = (frame: FrameState) => {
    if (!model.apply(frame)) return;
    const [w, h] = frame.image_size;
    canvas.width = CANVAS_WIDTH;
    canvas.height = (CANVAS_WIDTH * h) / w;
    applyDrawOps(ctx, renderOverlay(frame, CANVAS_WIDTH));
    status.textContent = `frame ${frame.frame} · step ${frame.step} · ${frame.status}`;
    status.dataset.state = frame.status;
    if (model.terminal && steer) steer.halt();
  };

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const base = baseInput.value.replace(/\/$/, "");
    const id = sessionInput.value.trim();
    if (!id) return;
    stream?.close();

    steer = new SteerController(async (delta) => {
      const resp = await fetch(`${base}/sessions/${id}/steer`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(delta),
      });
      if (resp.status === 409) {
        steer?.halt();
        return;
      }
      if (!resp.ok) throw new Error(`steer failed: ${resp.status}`);
      draw(await resp.json());
    });

    stream = new StreamClient(
      wsBase(base),
      id,
      (url) => new WebSocket(url) as unknown as import("./stream.js").SocketLike,
      draw,
    );
    stream.connect();
    canvas.focus();
  });

  window.addEventListener("keydown", (event) => {
    const delta = keyToDelta(event.key);
    if (delta && steer) {
      event.preventDefault();
      steer.push(delta);
    }
  });

  let dragging: { x: number; y: number } | null = null;
  canvas.addEventListener("mousedown", (e) => {
    dragging = { x: e.clientX, y: e.clientY };
  });
  window.addEventListener("mouseup", () => {
    dragging = null;
  });
  window.addEventListener("mousemove", (e) => {
    if (!dragging || !steer || !model.latest) return;
    const dx = e.clientX - dragging.x;
    const dy = e.clientY - dragging.y;
    dragging = { x: e.clientX, y: e.clientY };
    // map canvas pixels through the session's focal length (60 deg FOV)
    const [w] = model.latest.image_size;
    const focal = (w / 2) / Math.tan(Math.PI / 6);
    const scale = w / CANVAS_WIDTH;
    steer.push(dragToDelta(dx * scale, dy * scale, focal));
  });
}

if (typeof document !== "undefined") {
  window.addEventListener("DOMContentLoaded", boot);
}
