// Thin fetch client for the pipeline service. Every helper either
// resolves with the parsed body or throws ApiError carrying the
// service's structured error code.

import type {
  ApiErrorBody,
  CompositionDoc,
  EvalReportDoc,
  GenerateResponse,
  RenderResponse,
  ScenarioDoc,
} from "./types.js";

export class ApiError extends Error {
  readonly code: string;
  readonly status: number;
  readonly violations: ApiErrorBody["violations"];

  constructor(status: number, body: ApiErrorBody) {
    super(body.message);
    this.code = body.code;
    this.status = status;
    this.violations = body.violations;
  }
}

export interface Api {
  generate(request: Record<string, unknown>): Promise<GenerateResponse>;
  render(composition: CompositionDoc): Promise<RenderResponse>;
  evaluate(scenario: ScenarioDoc, html: string): Promise<EvalReportDoc>;
  scenarios(): Promise<ScenarioDoc[]>;
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class HttpApi implements Api {
  constructor(
    private readonly base: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(this.base + path, {
        method,
        headers: body === undefined ? undefined : { "content-type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch {
      throw new ApiError(0, { code: "NetworkError", message: "service unreachable" });
    }
    if (!response.ok) {
      let parsed: ApiErrorBody = {
        code: "HttpError",
        message: `HTTP ${response.status}`,
      };
      try {
        const doc = (await response.json()) as { error?: ApiErrorBody };
        if (doc.error && doc.error.code) parsed = doc.error;
      } catch {
        // non-JSON error body; keep the generic shape
      }
      throw new ApiError(response.status, parsed);
    }
    return (await response.json()) as T;
  }

  generate(request: Record<string, unknown>): Promise<GenerateResponse> {
    return this.request("POST", "/api/generate", request);
  }

  render(composition: CompositionDoc): Promise<RenderResponse> {
    return this.request("POST", "/api/render", { composition });
  }

  evaluate(scenario: ScenarioDoc, html: string): Promise<EvalReportDoc> {
    return this.request("POST", "/api/evaluate", { scenario, html });
  }

  async scenarios(): Promise<ScenarioDoc[]> {
    const doc = await this.request<{ scenarios: ScenarioDoc[] }>("GET", "/api/scenarios");
    return doc.scenarios;
  }
}
