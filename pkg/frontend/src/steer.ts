/** Keyboard/drag steering with an at-most-one-in-flight request queue.
 *
 * Input events accumulate into pending pan/tilt deltas; when a request
 * is in flight, further input coalesces into the next one.  Every event
 * delta is clamped to +-0.1 rad.
 */

export const KEY_STEP_RAD = 0.01;
export const MAX_EVENT_RAD = 0.1;

export interface SteerDelta {
  pan: number;
  tilt: number;
}

const clamp = (v: number) => Math.max(-MAX_EVENT_RAD, Math.min(MAX_EVENT_RAD, v));

export function keyToDelta(key: string, step: number = KEY_STEP_RAD): SteerDelta | null {
  switch (key) {
    case "ArrowRight":
      return { pan: clamp(step), tilt: 0 };
    case "ArrowLeft":
      return { pan: clamp(-step), tilt: 0 };
    case "ArrowUp":
      return { pan: 0, tilt: clamp(step) };
    case "ArrowDown":
      return { pan: 0, tilt: clamp(-step) };
    default:
      return null;
  }
}

/** Pixel drag mapped through the session focal length. */
export function dragToDelta(dx: number, dy: number, focalPx: number): SteerDelta {
  return { pan: clamp(Math.atan2(dx, focalPx)), tilt: clamp(-Math.atan2(dy, focalPx)) };
}

export type SteerSend = (delta: SteerDelta) => Promise<void>;

export class SteerController {
  private pending: SteerDelta | null = null;
  private inFlight = false;
  private halted = false;

  constructor(private send: SteerSend) {}

  get isHalted(): boolean {
    return this.halted;
  }

  /** Queue an input event; coalesces while a request is in flight. */
  push(delta: SteerDelta): void {
    if (this.halted) return;
    if (this.pending === null) {
      this.pending = { pan: clamp(delta.pan), tilt: clamp(delta.tilt) };
    } else {
      this.pending = {
        pan: clamp(this.pending.pan + delta.pan),
        tilt: clamp(this.pending.tilt + delta.tilt),
      };
    }
    void this.pump();
  }

  /** Stop issuing requests (terminal session). */
  halt(): void {
    this.halted = true;
    this.pending = null;
  }

  private async pump(): Promise<void> {
    if (this.inFlight || this.pending === null || this.halted) return;
    const delta = this.pending;
    this.pending = null;
    this.inFlight = true;
    try {
      await this.send(delta);
    } catch {
      this.halt();
    } finally {
      this.inFlight = false;
    }
    if (this.pending !== null) void this.pump();
  }

  /** Test hook: resolves once nothing is queued or in flight. */
  async drain(): Promise<void> {
    while (this.inFlight || this.pending !== null) {
      await new Promise((r) => setTimeout(r, 0));
    }
  }
}
