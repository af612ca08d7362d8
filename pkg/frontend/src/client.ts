// Session client: one WebSocket to the service, plus the REST calls.
// The WebSocket constructor is injectable so tests can run under node (ws).

import type { ClientMessage, ServerMessage, SessionDescriptor } from './protocol.js';
import { parseServerMessage } from './protocol.js';

export interface SocketLike {
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  send(data: string): void;
  close(): void;
}

export type SocketFactory = (url: string) => SocketLike;

export interface ClientOptions {
  socketFactory?: SocketFactory;
  fetchImpl?: typeof fetch;
  frameRateHz?: number; // synthetic wrist frame rate while dragging
  reconnectDelayMs?: number;
}

const DEFAULT_FRAME_RATE = 24;

export class SessionClient {
  readonly baseUrl: string;
  sessionId: string | null = null;
  private readonly socketFactory: SocketFactory;
  private readonly fetchImpl: typeof fetch;
  private readonly frameRateHz: number;
  private readonly reconnectDelayMs: number;
  private socket: SocketLike | null = null;
  private messageHandlers: ((m: ServerMessage) => void)[] = [];
  private statusHandlers: ((status: string, detail?: string) => void)[] = [];
  private clientSeq = 0;
  private dragTimer: ReturnType<typeof setInterval> | null = null;
  private closed = false;

  constructor(baseUrl: string, options: ClientOptions = {}) {
    this.baseUrl = baseUrl.replace(/\/$/, '');
    this.socketFactory =
      options.socketFactory ?? ((url) => new WebSocket(url) as unknown as SocketLike);
    this.fetchImpl = options.fetchImpl ?? fetch.bind(globalThis);
    this.frameRateHz = options.frameRateHz ?? DEFAULT_FRAME_RATE;
    this.reconnectDelayMs = options.reconnectDelayMs ?? 1500;
  }

  onMessage(handler: (m: ServerMessage) => void): void {
    this.messageHandlers.push(handler);
  }

  onStatus(handler: (status: string, detail?: string) => void): void {
    this.statusHandlers.push(handler);
  }

  private emitStatus(status: string, detail?: string): void {
    for (const handler of this.statusHandlers) handler(status, detail);
  }

  async createSession(overrides: Record<string, unknown> = {}): Promise<SessionDescriptor> {
    const response = await this.fetchImpl(`${this.baseUrl}/api/sessions`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(overrides),
    });
    if (!response.ok) {
      throw new Error(`session create failed: ${response.status} ${await response.text()}`);
    }
    const descriptor = (await response.json()) as SessionDescriptor;
    this.sessionId = descriptor.session_id;
    return descriptor;
  }

  connect(sessionId?: string): void {
    if (sessionId) this.sessionId = sessionId;
    if (!this.sessionId) throw new Error('no session to connect to');
    this.closed = false;
    this.openSocket();
  }

  private openSocket(): void {
    const wsBase = this.baseUrl.replace(/^http/, 'ws');
    const url = `${wsBase}/api/sessions/${this.sessionId}/stream`;
    this.emitStatus('connecting');
    let socket: SocketLike;
    try {
      socket = this.socketFactory(url);
    } catch (err) {
      this.emitStatus('error', String(err));
      this.scheduleReconnect();
      return;
    }
    this.socket = socket;
    socket.onopen = () => this.emitStatus('connected');
    socket.onmessage = (event) => {
      const message = parseServerMessage(String(event.data));
      if (!message) return;
      if (message.type === 'session_ended') this.closed = true;
      for (const handler of this.messageHandlers) handler(message);
    };
    socket.onerror = () => this.emitStatus('error', 'socket error');
    socket.onclose = () => {
      this.stopWristDrag();
      if (!this.closed) {
        this.emitStatus('reconnecting');
        this.scheduleReconnect();
      }
    };
  }

  private scheduleReconnect(): void {
    if (this.closed) return;
    setTimeout(() => {
      if (!this.closed) this.openSocket();
    }, this.reconnectDelayMs);
  }

  close(): void {
    this.closed = true;
    this.stopWristDrag();
    this.socket?.close();
  }

  private send(message: ClientMessage): void {
    if (!this.socket) throw new Error('not connected');
    this.clientSeq += 1;
    this.socket.send(JSON.stringify({ ...message, client_seq: this.clientSeq }));
  }

  sendPhrase(text: string): void {
    this.send({ type: 'say', text });
  }

  clickObject(x: number, y: number): void {
    this.send({ type: 'point', x, y });
  }

  haltNow(): void {
    this.send({ type: 'halt' });
  }

  resumeNow(): void {
    this.send({ type: 'resume' });
  }

  // Wrist dragging emits synthetic frames at the camera rate while held, so
  // the debounce sees consecutive observations just like live skeletons.
  startWristDrag(side: 'left' | 'right', x: number, y: number): void {
    this.stopWristDrag();
    let position = { x, y };
    this.send({ type: 'wrist', side, x: position.x, y: position.y });
    this.dragTimer = setInterval(() => {
      this.send({ type: 'wrist', side, x: position.x, y: position.y });
    }, 1000 / this.frameRateHz);
    this.moveWrist = (nx: number, ny: number) => {
      position = { x: nx, y: ny };
    };
  }

  moveWrist: (x: number, y: number) => void = () => {};

  stopWristDrag(): void {
    if (this.dragTimer !== null) {
      clearInterval(this.dragTimer);
      this.dragTimer = null;
    }
    this.moveWrist = () => {};
  }

  async downloadTrace(): Promise<string> {
    const response = await this.fetchImpl(
      `${this.baseUrl}/api/sessions/${this.sessionId}/trace`,
    );
    if (!response.ok) throw new Error(`trace download failed: ${response.status}`);
    return await response.text();
  }

  async endSession(): Promise<void> {
    await this.fetchImpl(`${this.baseUrl}/api/sessions/${this.sessionId}/end`, {
      method: 'POST',
    });
  }
}
