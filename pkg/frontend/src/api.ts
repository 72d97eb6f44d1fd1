/** Typed client for the engine API. All analytics stay on the server; the
 * UI only posts answers and renders responses. */

import type {
  AnswerBody,
  AttributeMeta,
  Classification,
  Dendrogram,
  Health,
  RankingView,
  SessionView,
  WhatIfRequest,
  WhatIfResult,
} from './types.js';

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`API ${status}: ${detail}`);
  }
}

async function decode<T>(res: Response): Promise<T> {
  if (!res.ok) {
    let detail = res.statusText;
    try {
      const body = (await res.json()) as { detail?: unknown };
      if (body.detail !== undefined) detail = JSON.stringify(body.detail);
    } catch {
      /* keep statusText */
    }
    throw new ApiError(res.status, detail);
  }
  return (await res.json()) as T;
}

export class ApiClient {
  private whatifSeq = 0;

  constructor(
    readonly baseUrl: string = '',
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  private get(path: string): Promise<Response> {
    return this.fetchImpl(this.baseUrl + path);
  }

  private post(path: string, body: unknown, signal?: AbortSignal): Promise<Response> {
    return this.fetchImpl(this.baseUrl + path, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(body),
      signal,
    });
  }

  health(): Promise<Health> {
    return this.get('/healthz').then((r) => decode<Health>(r));
  }

  attributes(): Promise<AttributeMeta[]> {
    return this.get('/attributes').then((r) => decode<AttributeMeta[]>(r));
  }

  createSession(stakeholderId: string): Promise<SessionView> {
    return this.post('/sessions', { stakeholder_id: stakeholderId }).then((r) =>
      decode<SessionView>(r),
    );
  }

  getQuestion(sessionId: string): Promise<SessionView> {
    return this.get(`/sessions/${sessionId}/question`).then((r) => decode<SessionView>(r));
  }

  submitAnswer(sessionId: string, answer: AnswerBody): Promise<SessionView> {
    return this.post(`/sessions/${sessionId}/answer`, answer).then((r) =>
      decode<SessionView>(r),
    );
  }

  rankings(stakeholder: string): Promise<RankingView> {
    return this.get(`/rankings/${stakeholder}`).then((r) => decode<RankingView>(r));
  }

  classification(): Promise<Classification> {
    return this.get('/analysis/classification').then((r) => decode<Classification>(r));
  }

  clustering(): Promise<Dendrogram> {
    return this.get('/analysis/clustering').then((r) => decode<Dendrogram>(r));
  }

  /** What-if requests are sequence-numbered so the explorer can apply
   * last-write-wins when responses arrive out of order. */
  whatif(body: WhatIfRequest, signal?: AbortSignal): { seq: number; result: Promise<WhatIfResult> } {
    const seq = ++this.whatifSeq;
    const result = this.post('/whatif', body, signal).then((r) => decode<WhatIfResult>(r));
    return { seq, result };
  }
}
