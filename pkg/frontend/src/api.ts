/** Thin typed client for the tactics engine service.
 *
 * The console never computes payoffs itself; everything numeric comes back
 * through these calls.  The fetch function is injectable so tests can serve
 * recorded payloads.
 */

import type {
  ActionsPayload,
  EventPayload,
  InmatchApproach,
  ModelsPayload,
  PrematchApproach,
  PrematchPayload,
  SessionPayload,
  SubstitutionRequest,
  WhatIfPayload,
} from "./types.js";

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<{ status: number; json(): Promise<unknown> }>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

/** 409 from an optimistic-version check; the session moved underneath us. */
export class ConflictError extends ApiError {}

function detailOf(body: unknown): string {
  if (body && typeof body === "object" && "detail" in body) {
    return String((body as { detail: unknown }).detail);
  }
  return JSON.stringify(body);
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike,
  ) {}

  private async request<T>(path: string, method = "GET", body?: unknown): Promise<T> {
    const res = await this.fetchFn(this.baseUrl + path, {
      method,
      headers: body === undefined ? undefined : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = await res.json();
    if (res.status === 409) throw new ConflictError(res.status, detailOf(payload));
    if (res.status >= 400) throw new ApiError(res.status, detailOf(payload));
    return payload as T;
  }

  getModels(): Promise<ModelsPayload> {
    return this.request("/models");
  }

  createSession(
    homeTeam: string,
    awayTeam: string,
    homeFormation?: string,
    awayFormation?: string,
  ): Promise<SessionPayload> {
    return this.request("/sessions", "POST", {
      home_team: homeTeam,
      away_team: awayTeam,
      home_formation: homeFormation ?? null,
      away_formation: awayFormation ?? null,
    });
  }

  getSession(id: string): Promise<SessionPayload> {
    return this.request(`/sessions/${id}`);
  }

  postEvent(
    id: string,
    event: EventPayload,
    expectedVersion?: number,
  ): Promise<SessionPayload> {
    return this.request(`/sessions/${id}/events`, "POST", {
      ...event,
      expected_version: expectedVersion ?? null,
    });
  }

  getPrematch(id: string, approach: PrematchApproach): Promise<PrematchPayload> {
    return this.request(`/sessions/${id}/prematch?approach=${approach}`);
  }

  getActions(
    id: string,
    side: "home" | "away",
    approach: InmatchApproach,
  ): Promise<ActionsPayload> {
    return this.request(`/sessions/${id}/actions?approach=${approach}&side=${side}`);
  }

  whatIf(
    id: string,
    side: "home" | "away",
    substitutions: SubstitutionRequest[],
  ): Promise<WhatIfPayload> {
    return this.request(`/sessions/${id}/whatif`, "POST", { side, substitutions });
  }
}
