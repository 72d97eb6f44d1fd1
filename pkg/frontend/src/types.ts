/** Wire types mirroring the engine's HTTP API responses. */

export interface AttributeMeta {
  id: string;
  name: string;
  unit: string;
  direction: 'lower' | 'higher';
  objective: string;
  objective_name: string;
  worst: number;
  best: number;
  low: number;
  high: number;
}

export interface RankOrderQuestion {
  type: 'rank-order';
  prompt: string;
  attributes: Array<{
    id: string;
    name: string;
    unit: string;
    direction: string;
    objective: string;
    worst: number;
    best: number;
  }>;
}

export interface SwingRatingQuestion {
  type: 'swing-rating';
  prompt: string;
  attribute: string;
  reference: string;
  max: number;
  ceiling: number;
}

export interface BisectionQuestion {
  type: 'bisection';
  prompt: string;
  attribute: string;
  target_value: number;
  interval: [number, number];
}

export interface CompensationQuestion {
  type: 'compensation';
  prompt: string;
  probe: number;
  of_probes: number;
  alternative_a: Record<string, number>;
  alternative_b: Record<string, number>;
  responses: string[];
}

export type Question =
  | RankOrderQuestion
  | SwingRatingQuestion
  | BisectionQuestion
  | CompensationQuestion;

export interface SessionView {
  session_id: string;
  stakeholder_id: string;
  phase: string;
  question: Question | null;
}

export type AnswerBody =
  | { type: 'rank-order'; order: string[] }
  | { type: 'swing-rating'; rating: number }
  | { type: 'bisection'; state: number }
  | { type: 'compensation'; response: 'accept' | 'reject' | 'strong-reject' };

export interface RankingEntry {
  alternative_id: string;
  value: number;
  rank: number;
}

export interface RankingView {
  stakeholder: string;
  entries: RankingEntry[];
}

export interface RangeNarrowing {
  full: [number, number];
  top: [number, number] | null;
  reduction: number;
}

export interface Classification {
  top_fraction: number;
  full_set: Record<string, string>;
  value_focused: Record<string, string>;
  pooled_ranges: Record<string, RangeNarrowing>;
  per_stakeholder_ranges: Record<string, Record<string, RangeNarrowing>>;
  occurrence_frequency: Record<string, Record<string, number>>;
}

export interface DendrogramMerge {
  left: number;
  right: number;
  height: number;
  size: number;
}

export interface Dendrogram {
  labels: string[];
  merges: DendrogramMerge[];
}

export interface WhatIfRequest {
  weights: Record<string, number>;
  gamma: number;
  q?: number;
  baseline_stakeholder?: string;
}

export interface WhatIfResult {
  entries: RankingEntry[];
  weights_used: Record<string, number>;
  gamma: number;
  tau_distance_to_baseline: number | null;
  top_ranges: Record<string, { full: [number, number]; top: [number, number]; reduction: number }> | null;
}

export interface Health {
  status: string;
  run_id: string;
}
