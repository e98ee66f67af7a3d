import { asRun, asSession, LayoutJson, RunJson, SessionJson } from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** Error body shape is {"error": {"code": ..., "message": ...}}. */
export class ApiError extends Error {
  constructor(
    readonly code: string,
    message: string,
    readonly status: number,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export class ApiClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  async startSession(caption: string, language?: string): Promise<SessionJson> {
    const body: Record<string, string> = { caption };
    if (language) body.language = language;
    return asSession(await this.request("POST", "/v1/sessions", body));
  }

  async sendTurn(sessionId: string, instruction: string): Promise<SessionJson> {
    const path = `/v1/sessions/${encodeURIComponent(sessionId)}/turn`;
    return asSession(await this.request("POST", path, { instruction }));
  }

  async getSession(sessionId: string): Promise<SessionJson> {
    return asSession(await this.request("GET", `/v1/sessions/${encodeURIComponent(sessionId)}`));
  }

  /** Kick off generation without blocking; the returned run starts pending. */
  async startGeneration(
    layout: LayoutJson,
    config?: Record<string, unknown>,
  ): Promise<RunJson> {
    const body: Record<string, unknown> = { layout };
    if (config) body.config = config;
    return asRun(await this.request("POST", "/v1/generate?async=true", body));
  }

  async getRun(runId: string): Promise<RunJson> {
    return asRun(await this.request("GET", `/v1/runs/${encodeURIComponent(runId)}`));
  }

  imageUrl(runId: string): string {
    return `${this.baseUrl}/v1/runs/${encodeURIComponent(runId)}/image.png`;
  }

  private async request(method: string, path: string, body?: unknown): Promise<unknown> {
    const init: RequestInit = { method, headers: { "Content-Type": "application/json" } };
    if (body !== undefined) init.body = JSON.stringify(body);
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    const payload = await response.json().catch(() => null);
    if (!response.ok) {
      const detail = (payload as { error?: { code?: string; message?: string } } | null)?.error;
      throw new ApiError(
        detail?.code ?? "http_error",
        detail?.message ?? `${method} ${path} failed with status ${response.status}`,
        response.status,
      );
    }
    return payload;
  }
}
