/** Elicitation wizard protocol logic, kept free of DOM concerns.
 *
 * The server owns the state machine; the wizard only turns user input into
 * the pending question's answer payload (validating locally so obviously
 * bad answers never leave the browser) and tracks the returned views. A
 * scripted driver runs the whole protocol for tests.
 */

import type { ApiClient } from './api.js';
import type { AnswerBody, Question, SessionView } from './types.js';

export class WizardValidationError extends Error {}

/** Build the answer payload for the pending question from raw UI input,
 * enforcing the same bounds the server would. */
export function answerFor(question: Question, input: unknown): AnswerBody {
  switch (question.type) {
    case 'rank-order': {
      const order = input as string[];
      const expected = new Set(question.attributes.map((a) => a.id));
      if (!Array.isArray(order) || order.length !== expected.size) {
        throw new WizardValidationError('rank order must list every attribute exactly once');
      }
      for (const id of order) {
        if (!expected.delete(id)) {
          throw new WizardValidationError(`unexpected or duplicate attribute ${id}`);
        }
      }
      return { type: 'rank-order', order };
    }
    case 'swing-rating': {
      const rating = Number(input);
      if (!Number.isFinite(rating) || rating < 0 || rating > question.ceiling) {
        throw new WizardValidationError(
          `rating must lie between 0 and ${question.ceiling} (0 declines the attribute)`,
        );
      }
      return { type: 'swing-rating', rating };
    }
    case 'bisection': {
      const state = Number(input);
      const [a, b] = question.interval;
      const lo = Math.min(a, b);
      const hi = Math.max(a, b);
      if (!Number.isFinite(state) || state <= lo || state >= hi) {
        throw new WizardValidationError(`state must lie strictly between ${lo} and ${hi}`);
      }
      return { type: 'bisection', state };
    }
    case 'compensation': {
      const response = String(input);
      if (!question.responses.includes(response)) {
        throw new WizardValidationError(`response must be one of ${question.responses.join(', ')}`);
      }
      return { type: 'compensation', response: response as 'accept' | 'reject' | 'strong-reject' };
    }
  }
}

/** Display normalisation for the completion view: ratings as weight shares.
 * This mirrors the server's SWING normalisation purely for rendering; all
 * scoring stays server-side. */
export function weightsFromRatings(ratings: Record<string, number>): Record<string, number> {
  const total = Object.values(ratings).reduce((s, r) => s + r, 0);
  const out: Record<string, number> = {};
  for (const [attr, rating] of Object.entries(ratings)) {
    out[attr] = total > 0 ? rating / total : 0;
  }
  return out;
}

export interface WizardCallbacks {
  onUpdate?: (view: SessionView) => void;
}

/** Drives one elicitation session; answers are only ever submitted for the
 * server's pending question, so out-of-order submission is impossible. */
export class WizardFlow {
  private view: SessionView | null = null;
  readonly submitted: AnswerBody[] = [];

  constructor(
    private readonly api: ApiClient,
    private readonly callbacks: WizardCallbacks = {},
  ) {}

  get current(): SessionView | null {
    return this.view;
  }

  get phase(): string {
    return this.view?.phase ?? 'not-started';
  }

  get pending(): Question | null {
    return this.view?.question ?? null;
  }

  get complete(): boolean {
    return this.view !== null && this.view.question === null;
  }

  private setView(view: SessionView): SessionView {
    this.view = view;
    this.callbacks.onUpdate?.(view);
    return view;
  }

  async start(stakeholderId: string): Promise<SessionView> {
    return this.setView(await this.api.createSession(stakeholderId));
  }

  async resume(sessionId: string): Promise<SessionView> {
    return this.setView(await this.api.getQuestion(sessionId));
  }

  async submit(input: unknown): Promise<SessionView> {
    if (this.view === null || this.view.question === null) {
      throw new WizardValidationError('no pending question');
    }
    const payload = answerFor(this.view.question, input);
    const next = await this.api.submitAnswer(this.view.session_id, payload);
    this.submitted.push(payload);
    return this.setView(next);
  }

  /** Complete the protocol with deterministic scripted inputs; used by the
   * automated tests and handy for demos. */
  async runScripted(
    stakeholderId: string,
    script: ScriptedAnswers,
    maxSteps = 200,
  ): Promise<SessionView> {
    let view = await this.start(stakeholderId);
    let steps = 0;
    while (view.question !== null) {
      if (++steps > maxSteps) throw new Error('scripted protocol did not terminate');
      view = await this.submit(scriptInput(view.question, script));
    }
    return view;
  }
}

export interface ScriptedAnswers {
  /** rank order; defaults to the order the server lists attributes in */
  order?: string[];
  /** rating as a share of the allowed ceiling, in (0, 1] */
  ratingShare: number;
  /** bisection state as a share of the way from interval start to end, in (0, 1) */
  bisectionShare: number;
  compensation: 'accept' | 'reject' | 'strong-reject';
}

export function scriptInput(question: Question, script: ScriptedAnswers): unknown {
  switch (question.type) {
    case 'rank-order':
      return script.order ?? question.attributes.map((a) => a.id);
    case 'swing-rating':
      return roundTo(question.ceiling * script.ratingShare, 6);
    case 'bisection': {
      const [a, b] = question.interval;
      return roundTo(a + (b - a) * script.bisectionShare, 9);
    }
    case 'compensation':
      return script.compensation;
  }
}

function roundTo(x: number, digits: number): number {
  const f = 10 ** digits;
  return Math.round(x * f) / f;
}
