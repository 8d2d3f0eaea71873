// Thin client for the agnav service. The console never mutates state locally:
// every change round-trips through these calls.

import type {
  Cell,
  GridDocument,
  MapDocument,
  MissionStartResponse,
  PlanResponse,
  RegisterResponse,
  StateResponse,
  TelemetryRecord,
} from "./types.js";

export class ServiceError extends Error {
  readonly status: number;
  readonly path?: string;

  constructor(status: number, message: string, path?: string) {
    super(message);
    this.status = status;
    this.path = path;
  }
}

async function parseOrThrow<T>(resp: Response): Promise<T> {
  const body = await resp.json().catch(() => ({}));
  if (!resp.ok) {
    const message = typeof body?.error === "string" ? body.error : `HTTP ${resp.status}`;
    throw new ServiceError(resp.status, message, body?.path);
  }
  return body as T;
}

export interface TelemetrySocket {
  close(): void;
}

type WebSocketFactory = (url: string) => {
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: (() => void) | null;
  close(): void;
};

export class ServiceClient {
  readonly baseUrl: string;
  private readonly makeSocket: WebSocketFactory;

  constructor(baseUrl: string, makeSocket?: WebSocketFactory) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
    this.makeSocket =
      makeSocket ?? ((url) => new WebSocket(url) as unknown as ReturnType<WebSocketFactory>);
  }

  private async get<T>(path: string): Promise<T> {
    return parseOrThrow<T>(await fetch(`${this.baseUrl}${path}`));
  }

  private async post<T>(path: string, body?: unknown): Promise<T> {
    return parseOrThrow<T>(
      await fetch(`${this.baseUrl}${path}`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: body === undefined ? "{}" : JSON.stringify(body),
      }),
    );
  }

  getMap(): Promise<MapDocument> {
    return this.get("/map");
  }

  getGrid(): Promise<GridDocument> {
    return this.get("/grid");
  }

  getState(): Promise<StateResponse> {
    return this.get("/state");
  }

  capture(prompts: string[]): Promise<MapDocument> {
    return this.post("/capture", { prompts });
  }

  plan(goal: Cell): Promise<PlanResponse> {
    return this.post("/plan", { goal });
  }

  registerPath(): Promise<RegisterResponse> {
    return this.post("/path/register");
  }

  startMission(): Promise<MissionStartResponse> {
    return this.post("/mission/start");
  }

  abortMission(reason?: string): Promise<{ phase: string }> {
    return this.post("/mission/abort", reason ? { reason } : undefined);
  }

  /** Subscribe to telemetry; onRecord fires per message until the end event. */
  telemetry(
    onRecord: (record: TelemetryRecord) => void,
    onClose?: () => void,
  ): TelemetrySocket {
    const wsUrl = this.baseUrl.replace(/^http/, "ws") + "/telemetry";
    const socket = this.makeSocket(wsUrl);
    socket.onmessage = (ev) => {
      try {
        onRecord(JSON.parse(String(ev.data)) as TelemetryRecord);
      } catch {
        // non-JSON frames are ignored
      }
    };
    socket.onclose = () => onClose?.();
    return { close: () => socket.close() };
  }
}
