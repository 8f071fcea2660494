/**
 * Version-conflict handling: the client raises a typed conflict error and
 * the sync state turns it into a visible reload banner, never a retry.
 */

import { describe, expect, it } from "vitest";

import { ApiError, VersionConflictError, WorkbenchClient, encodeCell } from "../src/api.js";
import { bannerText, initialSync, syncAdvanced, syncAfterWriteError } from "../src/sync.js";

function fetchReturning(status: number, body: unknown): typeof fetch {
  return async () =>
    new Response(JSON.stringify(body), {
      status,
      headers: { "Content-Type": "application/json" },
    });
}

describe("api client", () => {
  it("sends the expected version header on writes", async () => {
    let captured: Record<string, string> = {};
    const client = new WorkbenchClient("", (async (url: RequestInfo | URL, init?: RequestInit) => {
      captured = Object.fromEntries(Object.entries(init?.headers ?? {}));
      expect(String(url)).toBe("/api/matrices/m1/cells/client-%3Eclient/eliminate");
      return new Response(JSON.stringify({ version: 8 }), { status: 200 });
    }) as typeof fetch);
    const result = await client.eliminate("m1", "client->client", "why", 7);
    expect(result.version).toBe(8);
    expect(captured["X-Expected-Version"]).toBe("7");
  });

  it("raises VersionConflictError on 409 conflicts", async () => {
    const client = new WorkbenchClient(
      "",
      fetchReturning(409, {
        error: {
          code: "version_conflict",
          message: "model is at version 9, write expected 7",
          expected: 7,
          actual: 9,
        },
      }),
    );
    const failure = await client
      .eliminate("m1", "client->client", "why", 7)
      .then(() => null)
      .catch((e) => e);
    expect(failure).toBeInstanceOf(VersionConflictError);
    expect(failure.expected).toBe(7);
    expect(failure.actual).toBe(9);
  });

  it("raises plain ApiError for lifecycle violations", async () => {
    const client = new WorkbenchClient(
      "",
      fetchReturning(409, {
        error: { code: "not_unresolved", message: "cell is already eliminated" },
      }),
    );
    const failure = await client
      .eliminate("m1", "client->client", "why", 7)
      .then(() => null)
      .catch((e) => e);
    expect(failure).toBeInstanceOf(ApiError);
    expect(failure).not.toBeInstanceOf(VersionConflictError);
    expect(failure.code).toBe("not_unresolved");
  });

  it("URL-encodes cell identifiers", () => {
    expect(encodeCell("client+external->server")).toBe("client%2Bexternal-%3Eserver");
  });
});

describe("sync state", () => {
  it("advances with acknowledged writes", () => {
    let state = initialSync(5);
    state = syncAdvanced(state, 6);
    expect(state.heldVersion).toBe(6);
    expect(state.bannerVisible).toBe(false);
  });

  it("shows the reload banner on a conflict and keeps the held version", () => {
    let state = initialSync(5);
    const conflict = new VersionConflictError(409, "stale", 5, 9);
    state = syncAfterWriteError(state, conflict);
    expect(state.bannerVisible).toBe(true);
    expect(state.heldVersion).toBe(5); // nothing applied locally
    expect(state.serverVersion).toBe(9);
    expect(bannerText(state)).toContain("model changed — reload");
    expect(bannerText(state)).toContain("version 5");
  });

  it("does not raise the banner for ordinary engine errors", () => {
    let state = initialSync(5);
    state = syncAfterWriteError(state, new ApiError(409, "not_unresolved", "no"));
    expect(state.bannerVisible).toBe(false);
  });
});
