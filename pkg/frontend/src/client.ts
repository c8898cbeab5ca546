import { Snapshot, StreamMessage } from "./types";

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<{ ok: boolean; status: number; json(): Promise<unknown> }>;

export interface CommandResult {
  ok: boolean;
  status: number;
  error?: string;
}

/** Thin command client for the mission service's HTTP surface. */
export class ServiceClient {
  constructor(
    private baseUrl: string,
    private fetchImpl: FetchLike = fetch as unknown as FetchLike,
  ) {}

  private async post(path: string, body?: unknown): Promise<CommandResult> {
    const resp = await this.fetchImpl(this.baseUrl + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body ?? {}),
    });
    if (resp.ok) {
      return { ok: true, status: resp.status };
    }
    let error = `HTTP ${resp.status}`;
    try {
      const payload = (await resp.json()) as { error?: string };
      if (payload.error) {
        error = payload.error;
      }
    } catch {
      // non-JSON error body; keep the status text
    }
    return { ok: false, status: resp.status, error };
  }

  submitInstruction(text: string): Promise<CommandResult> {
    return this.post("/instruction", { text });
  }

  placeGoal(x: number, y: number): Promise<CommandResult> {
    return this.post("/goal", { x, y });
  }

  reset(scenario: string, seed?: number): Promise<CommandResult> {
    return this.post("/reset", seed === undefined ? { scenario } : { scenario, seed });
  }

  pause(): Promise<CommandResult> {
    return this.post("/pause");
  }

  resume(): Promise<CommandResult> {
    return this.post("/resume");
  }

  step(): Promise<CommandResult> {
    return this.post("/step");
  }

  async scenarios(): Promise<string[]> {
    const resp = await this.fetchImpl(this.baseUrl + "/scenarios");
    const payload = (await resp.json()) as { scenarios: string[] };
    return payload.scenarios;
  }

  async state(): Promise<Snapshot> {
    const resp = await this.fetchImpl(this.baseUrl + "/state");
    return (await resp.json()) as Snapshot;
  }
}

export interface SocketLike {
  onmessage: ((event: { data: string }) => void) | null;
  onopen: ((event: unknown) => void) | null;
  onclose: ((event: unknown) => void) | null;
  onerror: ((event: unknown) => void) | null;
  close(): void;
}

export type SocketFactory = (url: string) => SocketLike;

export interface StreamHandlers {
  onMessage(msg: StreamMessage): void;
  onOpen?(): void;
  onClose?(): void;
}

/** Subscribe to WS /stream; returns a handle that closes the socket. */
export function openStream(
  wsUrl: string,
  handlers: StreamHandlers,
  factory?: SocketFactory,
): { close(): void } {
  const make: SocketFactory =
    factory ??
    ((url) => new (globalThis as { WebSocket: new (u: string) => SocketLike }).WebSocket(url));
  const socket = make(wsUrl + "/stream");
  socket.onopen = () => handlers.onOpen?.();
  socket.onclose = () => handlers.onClose?.();
  socket.onerror = () => handlers.onClose?.();
  socket.onmessage = (event) => {
    handlers.onMessage(JSON.parse(event.data) as StreamMessage);
  };
  return { close: () => socket.close() };
}
