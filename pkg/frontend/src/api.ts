// Thin fetch wrapper around the three service endpoints, plus the
// request-slot guard that keeps slow responses from overwriting fast ones.

import type {
  ExplainResponse,
  ModelInfo,
  RecommendRequest,
  RecommendResponse,
  ServiceErrorBody,
} from "./types.js";

/** Non-2xx service reply, carrying the parsed error body verbatim. */
export class ServiceError extends Error {
  readonly status: number;
  readonly body: ServiceErrorBody;

  constructor(status: number, body: ServiceErrorBody) {
    super(body.error);
    this.status = status;
    this.body = body;
  }
}

export interface ApiClient {
  modelInfo(): Promise<ModelInfo>;
  recommend(request: RecommendRequest): Promise<RecommendResponse>;
  explain(request: RecommendRequest): Promise<ExplainResponse>;
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

async function readJson(response: Response): Promise<unknown> {
  try {
    return await response.json();
  } catch {
    return null;
  }
}

async function call(
  fetchImpl: FetchLike,
  url: string,
  init?: RequestInit,
): Promise<unknown> {
  const response = await fetchImpl(url, init);
  const payload = await readJson(response);
  if (!response.ok) {
    const body =
      payload && typeof payload === "object" && "error" in payload
        ? (payload as ServiceErrorBody)
        : { error: `service replied with status ${response.status}` };
    throw new ServiceError(response.status, body);
  }
  return payload;
}

/**
 * Build a client bound to a base URL.  An empty base means same origin,
 * which is what the bundled static server sets up.
 */
export function createClient(
  baseUrl: string,
  fetchImpl: FetchLike = (url, init) => fetch(url, init),
): ApiClient {
  const base = baseUrl.replace(/\/+$/, "");
  const post = (path: string, request: RecommendRequest) =>
    call(fetchImpl, base + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(request),
    });
  return {
    modelInfo: () => call(fetchImpl, base + "/model/info") as Promise<ModelInfo>,
    recommend: (request) =>
      post("/recommend", request) as Promise<RecommendResponse>,
    explain: (request) => post("/explain", request) as Promise<ExplainResponse>,
  };
}

/**
 * Matches responses to the scenario that asked for them.  Each dispatch
 * takes a fresh id; a response is applied only while its id is still the
 * newest, so an older in-flight request can never clobber a newer answer.
 */
export interface RequestSlot {
  issue(): number;
  isCurrent(id: number): boolean;
}

export function createRequestSlot(): RequestSlot {
  let newest = 0;
  return {
    issue() {
      newest += 1;
      return newest;
    },
    isCurrent(id) {
      return id === newest;
    },
  };
}

/**
 * Service base URL resolution: explicit ?service=... wins, otherwise same
 * origin (the static server proxies the API there).
 */
export function resolveServiceUrl(search: string): string {
  const params = new URLSearchParams(search);
  return params.get("service") ?? "";
}
