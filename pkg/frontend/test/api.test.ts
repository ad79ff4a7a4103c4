import { afterEach, describe, expect, it, vi } from "vitest";

import { ApiError, ClassifyClient, isAbort } from "../src/api.js";

function jsonResponse(body: unknown, status = 200): Response {
  return {
    ok: status >= 200 && status < 300,
    status,
    statusText: String(status),
    json: async () => body,
  } as Response;
}

const OK_BODY = {
  suggestions: [{ class_code: "4120", label: null, probability: 0.58 }],
  model_version: "abc123def456",
  fallback: false,
};

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("ClassifyClient.classify", () => {
  it("posts the description and k as JSON", async () => {
    const fetchMock = vi.fn(async () => jsonResponse(OK_BODY));
    vi.stubGlobal("fetch", fetchMock);

    const result = await new ClassifyClient().classify("cadeira giratória", 5);
    expect(result).toEqual(OK_BODY);
    expect(fetchMock).toHaveBeenCalledOnce();
    const [url, init] = fetchMock.mock.calls[0] as unknown as [string, RequestInit];
    expect(url).toBe("/v1/classify");
    expect(init.method).toBe("POST");
    expect(JSON.parse(init.body as string)).toEqual({
      description: "cadeira giratória",
      k: 5,
    });
  });

  it("turns an error body into an ApiError", async () => {
    vi.stubGlobal(
      "fetch",
      vi.fn(async () =>
        jsonResponse({ code: "empty_description", message: "description must be a non-empty string" }, 422),
      ),
    );

    const err = await new ClassifyClient().classify("   ").catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(422);
    expect(err.code).toBe("empty_description");
    expect(err.message).toMatch(/non-empty/);
  });

  it("falls back to a generic ApiError on a non-JSON error body", async () => {
    vi.stubGlobal(
      "fetch",
      vi.fn(async () => ({
        ok: false,
        status: 502,
        statusText: "Bad Gateway",
        json: async () => {
          throw new SyntaxError("not json");
        },
      }) as unknown as Response),
    );

    const err = await new ClassifyClient().classify("mesa").catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.code).toBe("http_error");
    expect(err.status).toBe(502);
  });

  it("aborts the previous in-flight request", async () => {
    let call = 0;
    const fetchMock = vi.fn((_url: string, init?: RequestInit) => {
      call += 1;
      if (call === 1) {
        // hang until the signal fires, like a slow network request
        return new Promise<Response>((_, reject) => {
          init?.signal?.addEventListener("abort", () =>
            reject(new DOMException("Aborted", "AbortError")),
          );
        });
      }
      return Promise.resolve(jsonResponse(OK_BODY));
    });
    vi.stubGlobal("fetch", fetchMock);

    const client = new ClassifyClient();
    const first = client.classify("primeira descrição");
    const second = client.classify("segunda descrição");

    const firstErr = await first.catch((e) => e);
    expect(isAbort(firstErr)).toBe(true);
    expect(await second).toEqual(OK_BODY);

    const firstInit = fetchMock.mock.calls[0]?.[1] as RequestInit;
    expect(firstInit.signal?.aborted).toBe(true);
  });
});

describe("ClassifyClient.health", () => {
  it("fetches and parses the health body", async () => {
    const body = {
      status: "ok",
      model_version: "abc123def456",
      class_count: 3,
      vocabulary_size: 24,
      uptime_seconds: 1.5,
    };
    const fetchMock = vi.fn(async () => jsonResponse(body));
    vi.stubGlobal("fetch", fetchMock);

    expect(await new ClassifyClient().health()).toEqual(body);
    expect(fetchMock.mock.calls[0]?.[0]).toBe("/v1/health");
  });

  it("raises ApiError when the service is still loading", async () => {
    vi.stubGlobal(
      "fetch",
      vi.fn(async () => jsonResponse({ status: "loading" }, 503)),
    );
    const err = await new ClassifyClient().health().catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(503);
  });
});
