import { describe, expect, it } from 'vitest';

import type { ApiClient } from '../src/api.js';
import type { AnswerBody, Question, SessionView } from '../src/types.js';
import {
  WizardFlow,
  WizardValidationError,
  answerFor,
  scriptInput,
  weightsFromRatings,
} from '../src/wizard.js';

const rankQuestion: Question = {
  type: 'rank-order',
  prompt: 'order them',
  attributes: [
    { id: 'a', name: 'A', unit: 'u', direction: 'lower', objective: 'o1', worst: 10, best: 0 },
    { id: 'b', name: 'B', unit: 'u', direction: 'lower', objective: 'o1', worst: 5, best: 1 },
    { id: 'c', name: 'C', unit: 'u', direction: 'higher', objective: 'o2', worst: 0, best: 9 },
  ],
};

const ratingQuestion: Question = {
  type: 'swing-rating',
  prompt: 'rate it',
  attribute: 'b',
  reference: 'a',
  max: 100,
  ceiling: 80,
};

const bisectionQuestion: Question = {
  type: 'bisection',
  prompt: 'split it',
  attribute: 'a',
  target_value: 0.5,
  interval: [10, 0], // lower-is-better: worst side first
};

const compensationQuestion: Question = {
  type: 'compensation',
  prompt: 'indifferent?',
  probe: 1,
  of_probes: 2,
  alternative_a: { a: 5, b: 3 },
  alternative_b: { a: 0, b: 5 },
  responses: ['accept', 'reject', 'strong-reject'],
};

describe('answerFor', () => {
  it('accepts a full permutation for rank order', () => {
    expect(answerFor(rankQuestion, ['c', 'a', 'b'])).toEqual({
      type: 'rank-order',
      order: ['c', 'a', 'b'],
    });
  });

  it('rejects incomplete or duplicated rank orders', () => {
    expect(() => answerFor(rankQuestion, ['a', 'b'])).toThrow(WizardValidationError);
    expect(() => answerFor(rankQuestion, ['a', 'a', 'b'])).toThrow(WizardValidationError);
    expect(() => answerFor(rankQuestion, ['a', 'b', 'zz'])).toThrow(WizardValidationError);
  });

  it('enforces the rating ceiling client-side', () => {
    expect(answerFor(ratingQuestion, 55)).toEqual({ type: 'swing-rating', rating: 55 });
    expect(answerFor(ratingQuestion, 0)).toEqual({ type: 'swing-rating', rating: 0 });
    expect(() => answerFor(ratingQuestion, 81)).toThrow(WizardValidationError);
    expect(() => answerFor(ratingQuestion, -1)).toThrow(WizardValidationError);
    expect(() => answerFor(ratingQuestion, Number.NaN)).toThrow(WizardValidationError);
  });

  it('keeps bisection states strictly inside the interval', () => {
    expect(answerFor(bisectionQuestion, 4)).toEqual({ type: 'bisection', state: 4 });
    expect(() => answerFor(bisectionQuestion, 10)).toThrow(WizardValidationError);
    expect(() => answerFor(bisectionQuestion, 0)).toThrow(WizardValidationError);
    expect(() => answerFor(bisectionQuestion, -3)).toThrow(WizardValidationError);
  });

  it('only allows the offered compensation responses', () => {
    expect(answerFor(compensationQuestion, 'reject')).toEqual({
      type: 'compensation',
      response: 'reject',
    });
    expect(() => answerFor(compensationQuestion, 'maybe')).toThrow(WizardValidationError);
  });
});

describe('weightsFromRatings', () => {
  it('normalises ratings to shares summing to one', () => {
    const shares = weightsFromRatings({ a: 100, b: 50, c: 50 });
    expect(shares).toEqual({ a: 0.5, b: 0.25, c: 0.25 });
    const total = Object.values(shares).reduce((s, x) => s + x, 0);
    expect(total).toBeCloseTo(1, 12);
  });

  it('handles declined attributes', () => {
    expect(weightsFromRatings({ a: 100, b: 0 })).toEqual({ a: 1, b: 0 });
  });
});

/** Serves a fixed question sequence and records submitted payloads. */
class MockApi {
  received: AnswerBody[] = [];
  private cursor = 0;

  constructor(private readonly questions: Question[]) {}

  private view(): SessionView {
    return {
      session_id: 's-mock-001',
      stakeholder_id: 'sh_mock',
      phase: this.cursor >= this.questions.length ? 'complete' : 'in-progress',
      question: this.questions[this.cursor] ?? null,
    };
  }

  async createSession(): Promise<SessionView> {
    return this.view();
  }

  async getQuestion(): Promise<SessionView> {
    return this.view();
  }

  async submitAnswer(_id: string, answer: AnswerBody): Promise<SessionView> {
    const pending = this.questions[this.cursor];
    if (!pending || pending.type !== answer.type) {
      throw new Error(`out-of-order answer ${answer.type}`);
    }
    this.received.push(answer);
    this.cursor += 1;
    return this.view();
  }
}

describe('WizardFlow', () => {
  const protocol: Question[] = [
    rankQuestion,
    ratingQuestion,
    { ...ratingQuestion, attribute: 'c', ceiling: 60 },
    bisectionQuestion,
    compensationQuestion,
    { ...compensationQuestion, probe: 2 },
  ];

  it('completes a scripted protocol and records every payload', async () => {
    const mock = new MockApi(protocol);
    const flow = new WizardFlow(mock as unknown as ApiClient);
    const finalView = await flow.runScripted('sh_mock', {
      ratingShare: 0.75,
      bisectionShare: 0.5,
      compensation: 'reject',
    });
    expect(finalView.question).toBeNull();
    expect(flow.complete).toBe(true);
    expect(mock.received.map((a) => a.type)).toEqual([
      'rank-order',
      'swing-rating',
      'swing-rating',
      'bisection',
      'compensation',
      'compensation',
    ]);
    const ratings = mock.received.filter((a) => a.type === 'swing-rating');
    expect(ratings[0]).toEqual({ type: 'swing-rating', rating: 60 }); // 0.75 * 80
    expect(ratings[1]).toEqual({ type: 'swing-rating', rating: 45 }); // 0.75 * 60
    const bisect = mock.received.find((a) => a.type === 'bisection');
    expect(bisect).toEqual({ type: 'bisection', state: 5 }); // midpoint of [10, 0]
  });

  it('refuses to submit without a pending question', async () => {
    const mock = new MockApi([]);
    const flow = new WizardFlow(mock as unknown as ApiClient);
    await flow.start('sh_mock');
    await expect(flow.submit('anything')).rejects.toThrow(WizardValidationError);
  });

  it('validates before anything reaches the network', async () => {
    const mock = new MockApi([ratingQuestion]);
    const flow = new WizardFlow(mock as unknown as ApiClient);
    await flow.start('sh_mock');
    await expect(flow.submit(999)).rejects.toThrow(WizardValidationError);
    expect(mock.received).toHaveLength(0); // nothing was posted
  });
});

describe('scriptInput', () => {
  it('derives deterministic inputs from question descriptors', () => {
    const script = { ratingShare: 0.8, bisectionShare: 0.25, compensation: 'accept' as const };
    expect(scriptInput(rankQuestion, script)).toEqual(['a', 'b', 'c']);
    expect(scriptInput(ratingQuestion, script)).toBe(64);
    expect(scriptInput(bisectionQuestion, script)).toBe(7.5); // 10 + (0-10) * 0.25
    expect(scriptInput(compensationQuestion, script)).toBe('accept');
  });
});
