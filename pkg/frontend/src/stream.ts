/** Frame stream consumer with reconnect-and-resume.
 *
 * The server pushes FrameState JSON over a WebSocket at
 * /sessions/{id}/stream and honors a `from` query parameter; on a
 * dropped connection the client reconnects from the next unseen index.
 * The socket constructor is injected so tests can drive fakes.
 */

import { FrameState, parseFrame, TERMINAL_STATUSES } from "./types.js";

export interface SocketLike {
  onmessage: ((event: { data: string }) => void) | null;
  onclose: (() => void) | null;
  onerror: (() => void) | null;
  close(): void;
}

export type SocketFactory = (url: string) => SocketLike;

export interface StreamOptions {
  reconnectDelayMs?: number;
  maxReconnects?: number;
}

export class StreamClient {
  nextIndex = 0;
  reconnects = 0;
  private closed = false;
  private socket: SocketLike | null = null;

  constructor(
    private baseUrl: string,
    private sessionId: string,
    private makeSocket: SocketFactory,
    private onFrame: (frame: FrameState) => void,
    private options: StreamOptions = {},
  ) {}

  connect(): void {
    if (this.closed) return;
    const url = `${this.baseUrl}/sessions/${this.sessionId}/stream?from=${this.nextIndex}`;
    const socket = this.makeSocket(url);
    this.socket = socket;
    socket.onmessage = (event) => {
      let frame: FrameState;
      try {
        frame = parseFrame(JSON.parse(event.data));
      } catch {
        return;
      }
      if (frame.frame < this.nextIndex) return; // stale
      this.nextIndex = frame.frame + 1;
      this.onFrame(frame);
      if (TERMINAL_STATUSES.has(frame.status)) {
        this.close();
      }
    };
    socket.onclose = () => this.scheduleReconnect();
    socket.onerror = () => this.scheduleReconnect();
  }

  private scheduleReconnect(): void {
    if (this.closed) return;
    const max = this.options.maxReconnects ?? 20;
    if (this.reconnects >= max) return;
    this.reconnects += 1;
    const delay = this.options.reconnectDelayMs ?? 300;
    setTimeout(() => this.connect(), delay);
  }

  close(): void {
    this.closed = true;
    if (this.socket) {
      this.socket.onclose = null;
      this.socket.onerror = null;
      this.socket.close();
    }
  }
}
