/** Thin client for the suggestion service's documented endpoints. */

import type { TagSuggestion } from "./state.js";

export interface SuggestRequestBody {
  title: string;
  body: string;
  k: number;
}

export interface SuggestResponseBody {
  tags: TagSuggestion[];
  model_digest: string;
  latency_ms: number;
}

export interface HealthResponseBody {
  status: string;
  model_digest: string;
}

export class ServiceError extends Error {
  constructor(
    message: string,
    readonly status: number,
  ) {
    super(message);
  }
}

export class ServiceClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: typeof fetch = globalThis.fetch,
  ) {}

  async suggest(request: SuggestRequestBody): Promise<SuggestResponseBody> {
    const response = await this.fetchFn(`${this.baseUrl}/v1/suggest`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(request),
    });
    if (!response.ok) {
      throw new ServiceError(`suggest failed with status ${response.status}`, response.status);
    }
    return (await response.json()) as SuggestResponseBody;
  }

  async health(): Promise<HealthResponseBody> {
    const response = await this.fetchFn(`${this.baseUrl}/healthz`);
    if (!response.ok) {
      throw new ServiceError(`health probe failed with status ${response.status}`, response.status);
    }
    return (await response.json()) as HealthResponseBody;
  }
}
