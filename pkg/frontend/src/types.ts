/** Payload shapes delivered by the HTTP API. */

export type Role = "scaffold" | "insert";

export type SSClass = "H" | "G" | "E" | "C";

export type TriageState = "candidate" | "preserved" | "unsuitable";

export interface Segment {
  ss_class: SSClass;
  start_index: number;
  end_index: number;
}

export interface LoopEntry {
  id: string;
  ordinal: number;
  custom: boolean;
  start_index: number;
  end_index: number;
  coil: { start_index: number; end_index: number };
  triage?: TriageState;
}

export interface LoopsPayload {
  scaffold: LoopEntry[];
  insert: LoopEntry[];
}

export interface Descriptors {
  D: number;
  delta: number;
  theta: number;
  rho: number;
}

export interface PairSuggestion {
  scaffold_loop_id: string;
  insert_loop_id: string;
  score: number;
  is_default: boolean;
  components: { dD: number; dDelta: number; dTheta: number; dRho: number };
}

export interface GeometryPayload {
  scaffold: Record<string, Descriptors>;
  insert: Record<string, Descriptors>;
  suggestions: PairSuggestion[];
}

export interface FlexibilityProfile {
  values: number[];
  normalized: number[];
  flags: string[];
}

export interface MethodCorrelation {
  methods: string[];
  r: number[][];
  p: number[][];
  low_significance: boolean[][];
}

export type FlexibilityPayload = Record<string, FlexibilityProfile> & {
  correlation?: MethodCorrelation;
};

export interface PairCorrelation {
  ss_corr: number;
  loop_corr: number;
  ss_to_coil: number;
}

export interface XcorrPayload {
  rows: string[];
  columns: string[];
  pairs: Record<string, PairCorrelation>; // keyed "rowId|colId"
}

export interface JobModel {
  id: string;
  scores: Record<string, number>;
}

export interface JobPayload {
  id: string;
  kind: string;
  state: "queued" | "running" | "done" | "failed";
  progress: number;
  model_ids: string[];
  error: string;
  models?: JobModel[];
}

export interface SessionSummary {
  id: string;
  scaffold: { pdb_id: string; chain: string };
  insert: { pdb_id: string; chain: string };
  phase: number;
  phase_completion: Record<string, boolean>;
  pairings: PairingEntry[];
  jobs: JobPayload[];
  model_ids: string[];
  staleness?: Record<string, boolean>;
  segments?: Record<Role, Segment[]>;
}

export interface PairingEntry {
  scaffold_loop_id: string;
  insert_loop_id: string;
  scaffold_start?: number;
  scaffold_end?: number;
  insert_start?: number;
  insert_end?: number;
}
