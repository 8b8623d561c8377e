/**
 * Websocket client for the playground server.
 *
 * The protocol is strict request-reply: the server answers every message,
 * in order, with exactly one reply (state, config_ack, config, bye_ack, or
 * error). The client keeps a FIFO of pending promises and matches replies
 * by position, so callers can await individual sends while a render loop
 * observes the same replies through callbacks.
 *
 * A dropped connection starts resume attempts against the same session id;
 * the server holds a detached session for a grace period. If the session
 * has expired the client falls back to a fresh hello and reports that, so
 * the UI can tell the user the object was reset.
 */

import {
  byeMessage,
  configPatchMessage,
  frameMessage,
  getConfigMessage,
  helloMessage,
  parseServerMessage,
  ProtocolError,
} from "./protocol.js";
import type {
  ConfigAckMessage,
  ConfigMessage,
  ConfigPatch,
  ConfigRecord,
  ErrorMessage,
  FrameRecord,
  HelloAckMessage,
  ServerMessage,
  StateMessage,
} from "./protocol.js";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((event?: unknown) => void) | null;
  onmessage: ((event: { data: unknown }) => void) | null;
  onclose: ((event?: unknown) => void) | null;
  onerror: ((event?: unknown) => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export type ClientStatus =
  | "connecting"
  | "connected"
  | "reconnecting"
  | "closed";

export interface ClientCallbacks {
  onState?: (message: StateMessage) => void;
  onConfig?: (config: ConfigRecord) => void;
  onServerError?: (code: string, message: string) => void;
  onStatus?: (status: ClientStatus, detail?: string) => void;
}

export interface ClientOptions {
  technique?: string;
  makeSocket?: SocketFactory;
  callbacks?: ClientCallbacks;
  /** How long to keep trying to resume after a drop, in seconds. */
  reconnectGraceS?: number;
  reconnectIntervalMs?: number;
}

interface Pending {
  expect: "state" | "config_ack" | "config" | "bye_ack";
  resolve: (message: ServerMessage) => void;
  reject: (error: Error) => void;
}

const DEFAULT_GRACE_S = 10;
const DEFAULT_RETRY_MS = 500;

function defaultFactory(url: string): SocketLike {
  return new WebSocket(url) as unknown as SocketLike;
}

export class PlaygroundClient {
  readonly url: string;
  private technique: string | undefined;
  private readonly makeSocket: SocketFactory;
  private readonly callbacks: ClientCallbacks;
  private readonly graceMs: number;
  private readonly retryMs: number;

  private socket: SocketLike | null = null;
  private pending: Pending[] = [];
  private pendingHello: {
    resolve: (ack: HelloAckMessage) => void;
    reject: (error: Error) => void;
  } | null = null;
  private sessionId: string | null = null;
  private closedByUser = false;
  private retryTimer: ReturnType<typeof setTimeout> | null = null;
  private reconnectDeadline = 0;
  private statusValue: ClientStatus = "closed";

  constructor(url: string, options: ClientOptions = {}) {
    this.url = url;
    this.technique = options.technique;
    this.makeSocket = options.makeSocket ?? defaultFactory;
    this.callbacks = options.callbacks ?? {};
    this.graceMs = (options.reconnectGraceS ?? DEFAULT_GRACE_S) * 1000;
    this.retryMs = options.reconnectIntervalMs ?? DEFAULT_RETRY_MS;
  }

  get status(): ClientStatus {
    return this.statusValue;
  }

  get session(): string | null {
    return this.sessionId;
  }

  /** Seconds left before resume attempts stop, or null when connected. */
  get reconnectSecondsLeft(): number | null {
    if (this.statusValue !== "reconnecting") return null;
    return Math.max(0, (this.reconnectDeadline - Date.now()) / 1000);
  }

  connect(): Promise<HelloAckMessage> {
    this.closedByUser = false;
    return this.open(this.sessionId ?? undefined);
  }

  private open(resumeSession?: string): Promise<HelloAckMessage> {
    this.setStatus(this.sessionId ? this.statusValue : "connecting");
    return new Promise((resolve, reject) => {
      let socket: SocketLike;
      try {
        socket = this.makeSocket(this.url);
      } catch (exc) {
        reject(exc instanceof Error ? exc : new Error(String(exc)));
        return;
      }
      this.socket = socket;
      this.pendingHello = { resolve, reject };
      socket.onopen = () => {
        socket.send(helloMessage(this.technique, resumeSession));
      };
      socket.onmessage = (event) => this.handleMessage(event.data);
      socket.onerror = () => {
        // the close handler owns recovery; onerror alone is not fatal
      };
      socket.onclose = () => this.handleClose();
    });
  }

  private handleMessage(data: unknown): void {
    let message: ServerMessage;
    try {
      message = parseServerMessage(data);
    } catch (exc) {
      if (exc instanceof ProtocolError && this.callbacks.onServerError) {
        this.callbacks.onServerError("protocol", exc.message);
        return;
      }
      throw exc;
    }

    if (this.pendingHello) {
      const hello = this.pendingHello;
      this.pendingHello = null;
      if (message.type === "hello_ack") {
        this.sessionId = message.session;
        this.technique = message.technique;
        this.setStatus("connected", message.resumed ? "resumed" : undefined);
        this.callbacks.onConfig?.(message.config);
        hello.resolve(message);
      } else if (message.type === "error") {
        hello.reject(new ProtocolError(`hello failed: ${message.message}`));
      } else {
        hello.reject(new ProtocolError(`unexpected ${message.type} to hello`));
      }
      return;
    }

    const pending = this.pending.shift();
    if (pending === undefined) {
      this.callbacks.onServerError?.(
        "protocol",
        `unsolicited ${message.type} message`,
      );
      return;
    }
    if (message.type === "error") {
      this.callbacks.onServerError?.(message.code, message.message);
      pending.resolve(message);
      return;
    }
    if (message.type !== pending.expect) {
      pending.reject(
        new ProtocolError(`expected ${pending.expect}, got ${message.type}`),
      );
      return;
    }
    if (message.type === "state") this.callbacks.onState?.(message);
    if (message.type === "config_ack" || message.type === "config") {
      this.callbacks.onConfig?.(message.config);
    }
    pending.resolve(message);
  }

  private handleClose(): void {
    const hello = this.pendingHello;
    this.pendingHello = null;
    hello?.reject(new ProtocolError("connection closed during hello"));
    for (const pending of this.pending.splice(0)) {
      pending.reject(new ProtocolError("connection closed"));
    }
    this.socket = null;
    if (this.closedByUser) {
      this.setStatus("closed");
      return;
    }
    if (this.statusValue !== "reconnecting") {
      this.reconnectDeadline = Date.now() + this.graceMs;
      this.setStatus("reconnecting");
    }
    this.scheduleResume();
  }

  private scheduleResume(): void {
    if (this.closedByUser) return;
    if (Date.now() >= this.reconnectDeadline) {
      this.setStatus("closed", "reconnect window elapsed");
      return;
    }
    this.retryTimer = setTimeout(() => {
      this.retryTimer = null;
      this.open(this.sessionId ?? undefined)
        .then(() => {
          // resumed (or re-created after expiry); status already updated
        })
        .catch((error: unknown) => {
          const expired =
            error instanceof ProtocolError &&
            error.message.includes("unknown session");
          if (expired) {
            // session reaped server-side: start over with a fresh one
            this.sessionId = null;
          }
          this.scheduleResume();
        });
    }, this.retryMs);
  }

  private send(text: string, expect: Pending["expect"]): Promise<ServerMessage> {
    const socket = this.socket;
    if (socket === null || this.statusValue !== "connected") {
      return Promise.reject(new ProtocolError("not connected"));
    }
    return new Promise((resolve, reject) => {
      this.pending.push({ expect, resolve, reject });
      socket.send(text);
    });
  }

  sendFrame(frame: FrameRecord): Promise<StateMessage | ErrorMessage> {
    return this.send(frameMessage(frame), "state") as Promise<
      StateMessage | ErrorMessage
    >;
  }

  /** Send the exact message text; the caller keeps it for trace writing. */
  sendFrameText(text: string): Promise<StateMessage | ErrorMessage> {
    return this.send(text, "state") as Promise<StateMessage | ErrorMessage>;
  }

  patchConfig(patch: ConfigPatch): Promise<ConfigAckMessage | ErrorMessage> {
    return this.send(configPatchMessage(patch), "config_ack") as Promise<
      ConfigAckMessage | ErrorMessage
    >;
  }

  getConfig(): Promise<ConfigMessage | ErrorMessage> {
    return this.send(getConfigMessage(), "config") as Promise<
      ConfigMessage | ErrorMessage
    >;
  }

  async bye(): Promise<void> {
    this.closedByUser = true;
    if (this.retryTimer !== null) {
      clearTimeout(this.retryTimer);
      this.retryTimer = null;
    }
    const socket = this.socket;
    if (socket === null) {
      this.setStatus("closed");
      return;
    }
    try {
      await this.send(byeMessage(), "bye_ack");
    } finally {
      this.sessionId = null;
      socket.close();
      this.setStatus("closed");
    }
  }

  /** Drop the connection without bye, as a crash would; used by tests. */
  abort(): void {
    this.socket?.close();
  }

  private setStatus(status: ClientStatus, detail?: string): void {
    this.statusValue = status;
    this.callbacks.onStatus?.(status, detail);
  }
}
