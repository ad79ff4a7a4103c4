import type { ClassifyResponse, HealthResponse } from "./types.js";

export class ApiError extends Error {
  readonly status: number;
  readonly code: string;

  constructor(status: number, code: string, message: string) {
    super(message);
    this.name = "ApiError";
    this.status = status;
    this.code = code;
  }
}

// DOMException may come from another realm (jsdom, iframes), where
// instanceof Error is false; the name is the reliable part.
export function isAbort(err: unknown): boolean {
  return (
    typeof err === "object" &&
    err !== null &&
    (err as { name?: unknown }).name === "AbortError"
  );
}

async function errorFrom(response: Response): Promise<ApiError> {
  let code = "http_error";
  let message = `request failed with status ${response.status}`;
  try {
    const body = (await response.json()) as { code?: unknown; message?: unknown };
    if (typeof body.code === "string") code = body.code;
    if (typeof body.message === "string") message = body.message;
  } catch {
    // non-JSON error body, keep the generic message
  }
  return new ApiError(response.status, code, message);
}

export class ClassifyClient {
  private inflight: AbortController | null = null;

  constructor(private readonly base: string = "") {}

  // At most one classify request is in flight: submitting again cancels
  // the previous request, whose promise then rejects with AbortError.
  async classify(description: string, k = 3): Promise<ClassifyResponse> {
    this.inflight?.abort();
    const controller = new AbortController();
    this.inflight = controller;
    try {
      const response = await fetch(`${this.base}/v1/classify`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ description, k }),
        signal: controller.signal,
      });
      if (!response.ok) {
        throw await errorFrom(response);
      }
      return (await response.json()) as ClassifyResponse;
    } finally {
      if (this.inflight === controller) {
        this.inflight = null;
      }
    }
  }

  async health(): Promise<HealthResponse> {
    const response = await fetch(`${this.base}/v1/health`);
    if (!response.ok) {
      throw await errorFrom(response);
    }
    return (await response.json()) as HealthResponse;
  }
}
