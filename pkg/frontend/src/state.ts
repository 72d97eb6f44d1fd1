/** Explorer view state and the small amount of client-side arithmetic the
 * UI is allowed: display renormalisation, request sequencing, staleness. */

import type { AttributeMeta, RankingEntry, WhatIfResult } from './types.js';

export interface ExplorerState {
  stakeholder: string | null;
  topFraction: number; // q slider, (0, 1]
  weights: Record<string, number>; // what-if weights as entered
  gamma: number;
  selectedTech: string | null;
  runId: string | null; // manifest digest backing the current view
  staleRun: boolean;
  ranking: RankingEntry[] | null;
  whatif: WhatIfResult | null;
  lastAppliedSeq: number;
}

export function initialExplorerState(): ExplorerState {
  return {
    stakeholder: null,
    topFraction: 0.1,
    weights: {},
    gamma: 0.2,
    selectedTech: null,
    runId: null,
    staleRun: false,
    ranking: null,
    whatif: null,
    lastAppliedSeq: 0,
  };
}

/** Weights always renormalise to sum 1 before a what-if request. */
export function renormalise(weights: Record<string, number>): Record<string, number> {
  const entries = Object.entries(weights).filter(([, w]) => w > 0);
  const total = entries.reduce((s, [, w]) => s + w, 0);
  if (total <= 0) return {};
  const out: Record<string, number> = {};
  for (const [attr, w] of Object.entries(weights)) {
    out[attr] = w > 0 ? w / total : 0;
  }
  return out;
}

/** Seed the what-if sliders from attribute metadata (equal weights). */
export function equalWeights(attributes: AttributeMeta[]): Record<string, number> {
  const out: Record<string, number> = {};
  for (const a of attributes) out[a.id] = 1;
  return out;
}

/** Last-write-wins for overlapping what-if responses: a response is applied
 * only when no later request has already been applied. */
export function applyWhatIf(
  state: ExplorerState,
  seq: number,
  result: WhatIfResult,
): ExplorerState {
  if (seq <= state.lastAppliedSeq) return state;
  return { ...state, whatif: result, lastAppliedSeq: seq };
}

/** A run is stale when the server's manifest digest no longer matches the
 * one this view was loaded from. */
export function checkStale(state: ExplorerState, serverRunId: string): ExplorerState {
  if (state.runId === null) return { ...state, runId: serverRunId, staleRun: false };
  return { ...state, staleRun: state.runId !== serverRunId };
}

export function setWeight(
  state: ExplorerState,
  attr: string,
  value: number,
): ExplorerState {
  return { ...state, weights: { ...state.weights, [attr]: Math.max(0, value) } };
}

export function clampTopFraction(q: number): number {
  if (!Number.isFinite(q)) return 0.1;
  return Math.min(1, Math.max(0.01, q));
}
