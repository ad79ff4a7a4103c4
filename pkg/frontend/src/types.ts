// Wire types mirror the API JSON field names exactly.

export interface Suggestion {
  class_code: string;
  label: string | null;
  probability: number;
}

export interface ClassifyResponse {
  suggestions: Suggestion[];
  model_version: string;
  fallback: boolean;
}

export interface HealthResponse {
  status: string;
  model_version: string;
  class_count: number;
  vocabulary_size: number;
  uptime_seconds: number;
}

// What one rendered suggestion card shows. Order always follows the
// response; at most one view is selected at a time.
export interface SuggestionView {
  classCode: string;
  label: string | null;
  probabilityPercent: number;
  selected: boolean;
}

// One line of the exported decision log. accepted is true exactly when
// chosen appears in suggested.
export interface DecisionRecord {
  description: string;
  suggested: string[];
  chosen: string;
  accepted: boolean;
  timestamp: string;
}

export interface ClassEntry {
  code: string;
  label: string;
}
