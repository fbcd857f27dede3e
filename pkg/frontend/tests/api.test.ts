import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";

type FetchMock = ReturnType<
  typeof vi.fn<(url: string, init?: RequestInit) => Promise<Response>>
>;

let fetchMock: FetchMock;

beforeEach(() => {
  fetchMock = vi.fn<(url: string, init?: RequestInit) => Promise<Response>>();
  vi.stubGlobal("fetch", fetchMock);
});

afterEach(() => {
  vi.unstubAllGlobals();
});

function ok(body: unknown): Response {
  return new Response(JSON.stringify(body), { status: 200 });
}

describe("ApiClient", () => {
  it("prefixes the configured base URL", async () => {
    fetchMock.mockResolvedValueOnce(ok({ items: [], page: 1, page_size: 20, total: 0 }));
    await new ApiClient("http://api.example:8900").pendingStatements(1, 20);
    expect(fetchMock.mock.calls[0][0]).toMatch(
      /^http:\/\/api\.example:8900\/statements\?/,
    );
  });

  it("sends the token on every request when configured", async () => {
    fetchMock.mockResolvedValueOnce(ok({}));
    await new ApiClient("", "s3cret").report("ep1");
    const headers = fetchMock.mock.calls[0][1]?.headers as Record<string, string>;
    expect(headers["X-API-Token"]).toBe("s3cret");
  });

  it("escapes ids in paths", async () => {
    fetchMock.mockResolvedValueOnce(ok({}));
    await new ApiClient().report("a/b c");
    expect(fetchMock.mock.calls[0][0]).toBe("/media/a%2Fb%20c/report");
  });

  it("unwraps the server's detail message on errors", async () => {
    fetchMock.mockResolvedValueOnce(
      new Response(JSON.stringify({ detail: "no such media" }), { status: 404 }),
    );
    const failure = new ApiClient().report("ghost");
    await expect(failure).rejects.toThrow("no such media");
    await expect(failure).rejects.toMatchObject({ status: 404 });
  });

  it("falls back to the status code when the body is not JSON", async () => {
    fetchMock.mockResolvedValueOnce(new Response("boom", { status: 500 }));
    await expect(new ApiClient().report("ep1")).rejects.toThrow(
      "request failed with status 500",
    );
  });

  it("exposes failures as ApiError", async () => {
    fetchMock.mockResolvedValueOnce(
      new Response(JSON.stringify({ detail: "nope" }), { status: 409 }),
    );
    await expect(
      new ApiClient().review("st-1", { action: "Approve" }),
    ).rejects.toBeInstanceOf(ApiError);
  });
});
