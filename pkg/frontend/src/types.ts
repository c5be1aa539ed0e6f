/** Wire types for the /v1 consultation API. Field names mirror the payloads. */

export interface SpeciesProfile {
  id: string;
  name: string;
  family: string;
  life_span_years: number;
  min_tank_gal: number;
  temp_min_f: number;
  temp_max_f: number;
  ph_min: number;
  ph_max: number;
  hardness_min_dgh: number;
  hardness_max_dgh: number;
}

export interface ConditionValues {
  temperature_f: number;
  ph: number;
  hardness_dgh: number;
  tank_size_gal: number;
  has_hiding_places: boolean;
  stocking_ratio: number;
}

export interface EliminationRecord {
  species: string;
  reason: string;
  offending: number;
  bound: number;
}

export interface PairWitness {
  pair: [string, string];
  level: string | null;
  base_cf: number;
  adjusted_cf: number;
  modifiers: string[];
  known: boolean;
}

export interface SuggestionGroup {
  members: string[];
  score: number;
  mean: number;
  witnesses: PairWitness[];
}

export interface ConsultationResult {
  adequate: string[];
  eliminated: EliminationRecord[];
  groups: SuggestionGroup[];
  warnings: string[];
  trace_ref: string;
}

export interface SessionView {
  id: string;
  version: number;
  created: string;
  updated: string;
  conditions: ConditionValues | null;
  residents: string[];
  result: ConsultationResult | null;
}

export interface SuggestionsPayload {
  threshold: number;
  groups: SuggestionGroup[];
}

export interface WhatifPayload {
  species: string;
  committed: boolean;
  groups: SuggestionGroup[];
  removed_candidates: string[];
}

export interface ExplanationNode {
  kind: string;
  label: string;
  rule: string | null;
  fact: unknown;
  children: ExplanationNode[];
}

export interface ApiErrorBody {
  error: { code: string; message: string; field?: string };
}
