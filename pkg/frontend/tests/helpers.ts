import type {
  ConsultationResult,
  ExplanationNode,
  SessionView,
  SpeciesProfile,
  SuggestionsPayload,
  WhatifPayload,
} from "../src/types.js";

import speciesFixture from "./fixtures/species.json";
import conditionsResultFixture from "./fixtures/conditions_result.json";
import sessionViewFixture from "./fixtures/session_view.json";
import suggestionsFixture from "./fixtures/suggestions.json";
import whatifPreviewFixture from "./fixtures/whatif_preview.json";
import explanationFixture from "./fixtures/explanation.json";
import error404 from "./fixtures/error_404.json";
import error409 from "./fixtures/error_409.json";
import error422 from "./fixtures/error_422.json";
import soloSessionView from "./fixtures/solo_session_view.json";
import soloSuggestions from "./fixtures/solo_suggestions.json";
import soloPreview from "./fixtures/solo_whatif_danio_preview.json";
import soloCommit from "./fixtures/solo_whatif_danio_commit.json";
import soloSuggestionsAfter from "./fixtures/solo_suggestions_after_commit.json";
import soloSessionViewAfter from "./fixtures/solo_session_view_after_commit.json";

export const FIX = {
  species: speciesFixture as { species: SpeciesProfile[] },
  conditionsResult: conditionsResultFixture as unknown as ConsultationResult,
  sessionView: sessionViewFixture as unknown as SessionView,
  suggestions: suggestionsFixture as unknown as SuggestionsPayload,
  whatifPreview: whatifPreviewFixture as unknown as WhatifPayload,
  explanation: explanationFixture as unknown as ExplanationNode,
  error404,
  error409,
  error422,
  solo: {
    sessionView: soloSessionView as unknown as SessionView,
    suggestions: soloSuggestions as unknown as SuggestionsPayload,
    preview: soloPreview as unknown as WhatifPayload,
    commit: soloCommit as unknown as WhatifPayload,
    suggestionsAfter: soloSuggestionsAfter as unknown as SuggestionsPayload,
    sessionViewAfter: soloSessionViewAfter as unknown as SessionView,
  },
};

export interface LoggedRequest {
  method: string;
  url: string;
  body?: unknown;
}

interface Routed {
  status: number;
  json: unknown;
}

/** Scriptable stand-in for the consultation service.

    Serves the recorded payloads and keeps a request log plus a log of
    every response body it returned (the "interception" the fidelity
    test checks rendered numbers against). */
export class ServiceDouble {
  log: LoggedRequest[] = [];
  served: unknown[] = [];
  committed = false;
  failNetwork = false;
  conditionsStatus: Routed | null = null;
  whatifStatus: Routed | null = null;
  explanationStatus: Routed | null = null;
  gate: Promise<void> | null = null;

  constructor(
    private readonly view: SessionView,
    private readonly viewAfter: SessionView,
    private readonly suggestions: SuggestionsPayload,
    private readonly suggestionsAfter: SuggestionsPayload,
    private readonly preview: WhatifPayload,
    private readonly commitPayload: WhatifPayload,
  ) {}

  fetch = async (url: string, init?: RequestInit): Promise<Response> => {
    const method = (init?.method ?? "GET").toUpperCase();
    const body = init?.body ? JSON.parse(init.body as string) : undefined;
    this.log.push({ method, url, body });
    if (this.gate) await this.gate;
    if (this.failNetwork) {
      throw new TypeError("fetch failed");
    }
    const routed = this.route(method, url);
    this.served.push(routed.json);
    return new Response(JSON.stringify(routed.json), {
      status: routed.status,
      headers: { "content-type": "application/json" },
    });
  };

  private route(method: string, url: string): Routed {
    const u = new URL(url, "http://testhost");
    const path = u.pathname;
    if (method === "GET" && path === "/v1/species") {
      return { status: 200, json: FIX.species };
    }
    if (method === "POST" && path === "/v1/sessions") {
      return { status: 201, json: { id: this.view.id } };
    }
    if (method === "GET" && /^\/v1\/sessions\/[^/]+$/.test(path)) {
      return { status: 200, json: this.committed ? this.viewAfter : this.view };
    }
    if (method === "PUT" && path.endsWith("/conditions")) {
      if (this.conditionsStatus) return this.conditionsStatus;
      return { status: 200, json: FIX.conditionsResult };
    }
    if (method === "POST" && path.endsWith("/residents")) {
      return { status: 200, json: this.committed ? this.viewAfter : this.view };
    }
    if (method === "DELETE" && path.includes("/residents/")) {
      return { status: 200, json: this.committed ? this.viewAfter : this.view };
    }
    if (method === "GET" && path.endsWith("/suggestions")) {
      return {
        status: 200,
        json: this.committed ? this.suggestionsAfter : this.suggestions,
      };
    }
    if (method === "POST" && path.endsWith("/whatif")) {
      if (this.whatifStatus) return this.whatifStatus;
      if (u.searchParams.get("commit") === "true") {
        this.committed = true;
        return { status: 200, json: this.commitPayload };
      }
      return { status: 200, json: this.preview };
    }
    if (method === "GET" && path.endsWith("/explanations")) {
      if (this.explanationStatus) return this.explanationStatus;
      const target = u.searchParams.get("target") ?? "";
      if (target.startsWith("elimination:")) {
        return { status: 200, json: FIX.explanation };
      }
      return { status: 404, json: FIX.error404 };
    }
    throw new Error(`unrouted request: ${method} ${url}`);
  }
}

export function discusDouble(): ServiceDouble {
  return new ServiceDouble(
    FIX.sessionView,
    FIX.sessionView,
    FIX.suggestions,
    FIX.suggestions,
    FIX.whatifPreview,
    { ...FIX.whatifPreview, committed: true },
  );
}

export function soloDouble(): ServiceDouble {
  return new ServiceDouble(
    FIX.solo.sessionView,
    FIX.solo.sessionViewAfter,
    FIX.solo.suggestions,
    FIX.solo.suggestionsAfter,
    FIX.solo.preview,
    FIX.solo.commit,
  );
}

/** Every number reachable in a JSON payload, as its verbatim String(). */
export function collectNumberStrings(payload: unknown, into = new Set<string>()): Set<string> {
  if (typeof payload === "number") {
    into.add(String(payload));
  } else if (Array.isArray(payload)) {
    for (const item of payload) collectNumberStrings(item, into);
  } else if (payload !== null && typeof payload === "object") {
    for (const value of Object.values(payload)) collectNumberStrings(value, into);
  }
  return into;
}

export function mountRoot(): HTMLElement {
  document.body.innerHTML = "";
  const root = document.createElement("div");
  document.body.appendChild(root);
  return root;
}

export function renderedGroupMembers(root: HTMLElement): string[][] {
  return [...root.querySelectorAll("[data-testid^='group-']")].map((card) =>
    [...card.querySelectorAll("li.member, li.member.would-drop")].map(
      (li) => li.getAttribute("data-member") ?? "",
    ),
  );
}
