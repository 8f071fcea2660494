/**
 * Typed client for the local threat-model service.
 *
 * Every write carries the model version the client last saw in an
 * X-Expected-Version header. The service rejects a stale expectation with
 * 409 before applying anything, which surfaces here as VersionConflictError;
 * callers must never retry silently.
 */

import type {
  ErrorBody,
  MatrixListPayload,
  MatrixPayload,
  ModelDocumentPayload,
  ScenarioDraft,
  ScenarioListPayload,
  StatsPayload,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

export class VersionConflictError extends ApiError {
  constructor(
    status: number,
    message: string,
    readonly expected: number,
    readonly actual: number,
  ) {
    super(status, "version_conflict", message);
  }
}

/** Cell ids contain "+" and "->", so they are always URL-encoded in paths. */
export function encodeCell(cellId: string): string {
  return encodeURIComponent(cellId);
}

async function parseError(response: Response): Promise<ApiError> {
  let body: ErrorBody | null = null;
  try {
    body = (await response.json()) as ErrorBody;
  } catch {
    return new ApiError(response.status, "unknown", response.statusText);
  }
  const err = body?.error;
  if (!err) return new ApiError(response.status, "unknown", response.statusText);
  if (err.code === "version_conflict") {
    return new VersionConflictError(
      response.status,
      err.message,
      err.expected ?? -1,
      err.actual ?? -1,
    );
  }
  return new ApiError(response.status, err.code, err.message);
}

export class WorkbenchClient {
  constructor(
    readonly baseUrl: string = "",
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  private async get<T>(path: string): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`);
    if (!response.ok) throw await parseError(response);
    return (await response.json()) as T;
  }

  private async post<T>(path: string, body: unknown, expectedVersion?: number): Promise<T> {
    const headers: Record<string, string> = { "Content-Type": "application/json" };
    if (expectedVersion !== undefined) {
      headers["X-Expected-Version"] = String(expectedVersion);
    }
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method: "POST",
      headers,
      body: JSON.stringify(body),
    });
    if (!response.ok) throw await parseError(response);
    return (await response.json()) as T;
  }

  model(): Promise<ModelDocumentPayload> {
    return this.get("/api/model");
  }

  stats(): Promise<StatsPayload> {
    return this.get("/api/stats");
  }

  report(): Promise<string> {
    return this.fetchImpl(`${this.baseUrl}/api/report`).then((r) => r.text());
  }

  matrices(): Promise<MatrixListPayload> {
    return this.get("/api/matrices");
  }

  matrix(id: string): Promise<MatrixPayload> {
    return this.get(`/api/matrices/${id}`);
  }

  scenarios(): Promise<ScenarioListPayload> {
    return this.get("/api/scenarios");
  }

  generateMatrix(categoryId: string, scope: string[] | null, expectedVersion: number) {
    return this.post<{ version: number; matrix_id: string }>(
      "/api/matrices",
      { category_id: categoryId, scope },
      expectedVersion,
    );
  }

  eliminate(matrixId: string, cellId: string, rationale: string, expectedVersion: number) {
    return this.post<{ version: number }>(
      `/api/matrices/${matrixId}/cells/${encodeCell(cellId)}/eliminate`,
      { rationale },
      expectedVersion,
    );
  }

  merge(
    matrixId: string,
    cellId: string,
    into: string,
    rationale: string,
    expectedVersion: number,
  ) {
    return this.post<{ version: number }>(
      `/api/matrices/${matrixId}/cells/${encodeCell(cellId)}/merge`,
      { into, rationale },
      expectedVersion,
    );
  }

  document(
    matrixId: string,
    cellId: string,
    scenarios: ScenarioDraft[],
    expectedVersion: number,
  ) {
    return this.post<{ version: number; scenario_refs: string[] }>(
      `/api/matrices/${matrixId}/cells/${encodeCell(cellId)}/document`,
      { scenarios },
      expectedVersion,
    );
  }

  reopen(matrixId: string, cellId: string, note: string, expectedVersion: number) {
    return this.post<{ version: number }>(
      `/api/matrices/${matrixId}/cells/${encodeCell(cellId)}/reopen`,
      { note },
      expectedVersion,
    );
  }

  score(scenarioId: string, likelihood: number, severity: number, notes: string, expectedVersion: number) {
    return this.post<{ version: number }>(
      `/api/scenarios/${scenarioId}/score`,
      { likelihood, severity, notes },
      expectedVersion,
    );
  }
}
