import { describe, expect, it, vi } from "vitest";

import { SocketLike, StreamClient } from "../src/stream.js";
import { FrameState } from "../src/types.js";

function frame(i: number, status = "in_progress"): FrameState {
  return {
    frame: i,
    status,
    step: 0,
    features: [],
    overlay: null,
    image_size: [1280, 720],
  };
}

class FakeSocket implements SocketLike {
  onmessage: ((event: { data: string }) => void) | null = null;
  onclose: (() => void) | null = null;
  onerror: (() => void) | null = null;
  closed = false;

  constructor(public url: string) {}

  close(): void {
    this.closed = true;
  }

  emit(state: FrameState): void {
    this.onmessage?.({ data: JSON.stringify(state) });
  }

  drop(): void {
    this.onclose?.();
  }
}

function harness() {
  const sockets: FakeSocket[] = [];
  const frames: FrameState[] = [];
  const client = new StreamClient(
    "ws://test",
    "abc",
    (url) => {
      const s = new FakeSocket(url);
      sockets.push(s);
      return s;
    },
    (f) => frames.push(f),
    { reconnectDelayMs: 1 },
  );
  return { client, sockets, frames };
}

describe("StreamClient", () => {
  it("applies frames in order and drops stale ones", () => {
    const { client, sockets, frames } = harness();
    client.connect();
    const s = sockets[0];
    s.emit(frame(0));
    s.emit(frame(1));
    s.emit(frame(0)); // duplicate: dropped
    s.emit(frame(2));
    expect(frames.map((f) => f.frame)).toEqual([0, 1, 2]);
  });

  it("reconnects with a from= resume after a drop", async () => {
    vi.useFakeTimers();
    try {
      const { client, sockets, frames } = harness();
      client.connect();
      expect(sockets[0].url).toContain("from=0");
      sockets[0].emit(frame(0));
      sockets[0].emit(frame(1));
      sockets[0].drop();
      await vi.advanceTimersByTimeAsync(5);
      expect(sockets.length).toBe(2);
      expect(sockets[1].url).toContain("from=2");
      sockets[1].emit(frame(2));
      expect(frames.map((f) => f.frame)).toEqual([0, 1, 2]);
      expect(client.reconnects).toBe(1);
    } finally {
      vi.useRealTimers();
    }
  });

  it("closes after a terminal frame and never reconnects", async () => {
    vi.useFakeTimers();
    try {
      const { client, sockets, frames } = harness();
      client.connect();
      sockets[0].emit(frame(0));
      sockets[0].emit(frame(1, "success"));
      expect(frames[1].status).toBe("success");
      expect(sockets[0].closed).toBe(true);
      sockets[0].drop();
      await vi.advanceTimersByTimeAsync(50);
      expect(sockets.length).toBe(1);
    } finally {
      vi.useRealTimers();
    }
  });

  it("ignores malformed payloads", () => {
    const { client, sockets, frames } = harness();
    client.connect();
    sockets[0].onmessage?.({ data: "{not json" });
    sockets[0].onmessage?.({ data: JSON.stringify({ nope: 1 }) });
    sockets[0].emit(frame(0));
    expect(frames.length).toBe(1);
  });
});
