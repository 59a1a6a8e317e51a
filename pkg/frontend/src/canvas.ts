/** Replay draw operations onto a 2D canvas context (DOM glue; all
 * geometry happened upstream in renderOverlay). */

import { DrawOp } from "./viewport.js";

export function applyDrawOps(ctx: CanvasRenderingContext2D, ops: DrawOp[]): void {
  for (const op of ops) {
    switch (op.op) {
      case "clear":
        ctx.fillStyle = "#10141a";
        ctx.fillRect(0, 0, op.width, op.height);
        break;
      case "dot":
        ctx.fillStyle = op.color;
        ctx.beginPath();
        ctx.arc(op.x, op.y, op.radius, 0, Math.PI * 2);
        ctx.fill();
        break;
      case "circle":
        ctx.strokeStyle = op.color;
        ctx.lineWidth = 3;
        ctx.beginPath();
        ctx.arc(op.x, op.y, op.radius, 0, Math.PI * 2);
        ctx.stroke();
        break;
      case "segment":
        ctx.strokeStyle = op.color;
        ctx.lineWidth = op.width;
        ctx.beginPath();
        ctx.moveTo(op.x1, op.y1);
        ctx.lineTo(op.x2, op.y2);
        ctx.stroke();
        break;
      case "arrow": {
        ctx.strokeStyle = op.color;
        ctx.fillStyle = op.color;
        ctx.lineWidth = 3;
        ctx.beginPath();
        ctx.moveTo(op.x1, op.y1);
        ctx.lineTo(op.x2, op.y2);
        ctx.stroke();
        const angle = Math.atan2(op.y2 - op.y1, op.x2 - op.x1);
        const head = 10;
        ctx.beginPath();
        ctx.moveTo(op.x2, op.y2);
        ctx.lineTo(
          op.x2 - head * Math.cos(angle - 0.5),
          op.y2 - head * Math.sin(angle - 0.5),
        );
        ctx.lineTo(
          op.x2 - head * Math.cos(angle + 0.5),
          op.y2 - head * Math.sin(angle + 0.5),
        );
        ctx.fill();
        break;
      }
      case "label":
        ctx.fillStyle = op.color;
        ctx.font = "14px monospace";
        ctx.fillText(op.text, op.x, op.y);
        break;
    }
  }
}
