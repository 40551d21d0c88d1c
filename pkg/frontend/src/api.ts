// Thin typed client over the HTTP API. The fetch implementation is injected
// so tests can script responses; the browser entrypoint passes window.fetch.

import type { JobState, ResultBundle, SuggestedQuestion } from './types.js';

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    message: string,
    public readonly status: number,
  ) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike,
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers: body === undefined ? {} : { 'content-type': 'application/json' },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      let detail = `HTTP ${response.status}`;
      try {
        const payload = (await response.json()) as { detail?: string };
        if (payload.detail) detail = payload.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(detail, response.status);
    }
    return (await response.json()) as T;
  }

  bindDatasource(target: string, name?: string): Promise<{ job_id: string }> {
    return this.request('POST', '/datasources', { target, name });
  }

  openSession(datasourceId: string): Promise<{ session_id: string }> {
    return this.request('POST', '/sessions', { datasource_id: datasourceId });
  }

  submitQuestion(sessionId: string, question: string): Promise<{ job_id: string }> {
    return this.request('POST', `/sessions/${sessionId}/questions`, { question });
  }

  getJob(jobId: string): Promise<JobState> {
    return this.request('GET', `/jobs/${jobId}`);
  }

  getJobResult(jobId: string): Promise<ResultBundle> {
    return this.request('GET', `/jobs/${jobId}/result`);
  }

  getSuggestions(datasourceId: string): Promise<SuggestedQuestion[]> {
    return this.request('GET', `/datasources/${datasourceId}/suggestions`);
  }

  sendFeedback(datasourceId: string, artifactId: string, satisfied: boolean): Promise<{ ok: boolean }> {
    return this.request('POST', '/feedback', {
      datasource_id: datasourceId,
      artifact_id: artifactId,
      satisfied,
    });
  }
}
