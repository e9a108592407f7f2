/**
 * Thin typed client for the session service. Every call round-trips to the
 * server; responses are returned verbatim. getSession additionally exposes
 * the raw response text so the step-log export can be a byte-exact copy.
 */

import type {
  ApiErrorPayload,
  CreateSessionResponse,
  HealthInfo,
  SessionView,
  SubmitFeatureResponse,
  WhatIfResponse,
} from './types';

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  readonly status: number;
  readonly code: string;
  readonly field?: string;

  constructor(status: number, payload: ApiErrorPayload) {
    super(payload.message);
    this.status = status;
    this.code = payload.code;
    this.field = payload.field;
  }
}

export class SessionApi {
  private readonly base: string;
  private readonly fetchFn: FetchLike;

  constructor(baseUrl: string, fetchFn?: FetchLike) {
    this.base = baseUrl.replace(/\/$/, '');
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const { parsed } = await this.requestRaw(method, path, body);
    return parsed as T;
  }

  private async requestRaw(
    method: string,
    path: string,
    body?: unknown
  ): Promise<{ parsed: unknown; raw: string }> {
    const response = await this.fetchFn(`${this.base}${path}`, {
      method,
      headers: body === undefined ? undefined : { 'Content-Type': 'application/json' },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const raw = await response.text();
    let parsed: unknown;
    try {
      parsed = JSON.parse(raw);
    } catch {
      throw new ApiError(response.status, { code: 'bad_response', message: raw.slice(0, 200) });
    }
    if (!response.ok) {
      throw new ApiError(response.status, parsed as ApiErrorPayload);
    }
    return { parsed, raw };
  }

  health(): Promise<HealthInfo> {
    return this.request('GET', '/health');
  }

  createSession(
    publicValues: Record<string, number>,
    options: { delta?: number; selector?: string } = {}
  ): Promise<CreateSessionResponse> {
    return this.request('POST', '/sessions', { public: publicValues, ...options });
  }

  submitFeature(sessionId: string, value: number): Promise<SubmitFeatureResponse> {
    return this.request('POST', `/sessions/${sessionId}/feature`, { value });
  }

  getSession(sessionId: string): Promise<SessionView> {
    return this.request('GET', `/sessions/${sessionId}`);
  }

  /** Raw body text of GET /sessions/{id}, for byte-exact export. */
  async getSessionRaw(sessionId: string): Promise<{ view: SessionView; raw: string }> {
    const { parsed, raw } = await this.requestRaw('GET', `/sessions/${sessionId}`);
    return { view: parsed as SessionView, raw };
  }

  whatIf(sessionId: string, feature: string, value: number): Promise<WhatIfResponse> {
    return this.request('POST', `/sessions/${sessionId}/whatif`, { feature, value });
  }
}
