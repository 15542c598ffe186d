/** Thin typed client for the three /v1/ endpoints.
 *
 * Every response the console shows comes through here verbatim; nothing
 * reshapes the payloads beyond JSON decoding.
 */

import type {
  Dialect,
  PredictResponse,
  SchemaResponse,
  ServiceQuery,
  TranslateResponse,
} from "./types.js";

export class ServiceError extends Error {
  constructor(
    message: string,
    readonly status: number | null = null,
  ) {
    super(message);
    this.name = "ServiceError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ServiceClient {
  private readonly fetchImpl: FetchLike;

  constructor(
    readonly baseUrl: string,
    fetchImpl?: FetchLike,
  ) {
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
  }

  async getSchema(): Promise<SchemaResponse> {
    return this.request("GET", "/v1/schema");
  }

  async predict(
    question: string,
    k: number,
    signal?: AbortSignal,
  ): Promise<PredictResponse> {
    return this.request("POST", "/v1/predict", { question, k }, signal);
  }

  async translate(
    queryGraph: ServiceQuery,
    dialect: Dialect,
  ): Promise<TranslateResponse> {
    return this.request("POST", "/v1/translate", {
      query_graph: queryGraph,
      dialect,
    });
  }

  private async request(
    method: "GET" | "POST",
    path: string,
    body?: unknown,
    signal?: AbortSignal,
  ): Promise<any> {
    let response: Response;
    try {
      response = await this.fetchImpl(this.baseUrl + path, {
        method,
        signal,
        ...(body === undefined
          ? {}
          : {
              headers: { "content-type": "application/json" },
              body: JSON.stringify(body),
            }),
      });
    } catch (err) {
      if ((err as Error).name === "AbortError") throw err;
      throw new ServiceError(`service unreachable at ${this.baseUrl}`);
    }
    if (!response.ok) {
      let detail = response.statusText || `HTTP ${response.status}`;
      try {
        const parsed = await response.json();
        if (parsed && typeof parsed.detail === "string") detail = parsed.detail;
      } catch {
        // non-JSON error body; keep the status line
      }
      throw new ServiceError(detail, response.status);
    }
    return response.json();
  }
}
