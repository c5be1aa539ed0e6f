import type {
  ConditionValues,
  ConsultationResult,
  ExplanationNode,
  SessionView,
  SpeciesProfile,
  SuggestionsPayload,
  WhatifPayload,
} from "./types.js";

/** Structured failure from the service (carries code/field for inline UI). */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly field?: string,
  ) {
    super(message);
  }
}

/** The service could not be reached at all (offline, refused, DNS). */
export class NetworkError extends Error {}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** Thin typed client over the /v1 endpoints; fetch is injectable for tests. */
export class Api {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(this.baseUrl + path, {
        method,
        headers: body === undefined ? undefined : { "content-type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch {
      throw new NetworkError("cannot reach the advisor service");
    }
    if (!response.ok) {
      let code = "http-error";
      let message = `HTTP ${response.status}`;
      let field: string | undefined;
      try {
        const parsed = (await response.json()) as { error?: { code: string; message: string; field?: string } };
        if (parsed.error) {
          code = parsed.error.code;
          message = parsed.error.message;
          field = parsed.error.field;
        }
      } catch {
        // non-JSON error body; keep the generic message
      }
      throw new ApiError(response.status, code, message, field);
    }
    return (await response.json()) as T;
  }

  createSession(): Promise<{ id: string }> {
    return this.request("POST", "/v1/sessions");
  }

  getSession(sid: string): Promise<SessionView> {
    return this.request("GET", `/v1/sessions/${sid}`);
  }

  setConditions(sid: string, values: ConditionValues): Promise<ConsultationResult> {
    return this.request("PUT", `/v1/sessions/${sid}/conditions`, values);
  }

  addResident(sid: string, species: string): Promise<SessionView> {
    return this.request("POST", `/v1/sessions/${sid}/residents`, { species });
  }

  removeResident(sid: string, species: string): Promise<SessionView> {
    return this.request("DELETE", `/v1/sessions/${sid}/residents/${encodeURIComponent(species)}`);
  }

  getSuggestions(sid: string, threshold?: number): Promise<SuggestionsPayload> {
    const query = threshold === undefined ? "" : `?threshold=${threshold}`;
    return this.request("GET", `/v1/sessions/${sid}/suggestions${query}`);
  }

  whatif(sid: string, species: string, commit: boolean): Promise<WhatifPayload> {
    return this.request("POST", `/v1/sessions/${sid}/whatif?commit=${commit}`, { species });
  }

  getExplanation(sid: string, target: string): Promise<ExplanationNode> {
    return this.request(
      "GET",
      `/v1/sessions/${sid}/explanations?target=${encodeURIComponent(target)}`,
    );
  }

  listSpecies(): Promise<{ species: SpeciesProfile[] }> {
    return this.request("GET", "/v1/species");
  }
}
