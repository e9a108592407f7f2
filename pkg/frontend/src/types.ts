/**
 * Wire types for the disclosure session API. Field names mirror the server
 * JSON exactly; the UI never derives protocol values itself.
 */

export type SessionStatus = 'awaiting_feature' | 'decided';

export interface Decision {
  label: number;
  confidence: number;
  features_revealed: string[];
  leakage: number;
}

export interface HealthInfo {
  status: string;
  model_family: string;
  num_features: number;
  num_classes: number;
  public_features: string[];
  sensitive_features: string[];
  delta: number;
  selector: string;
}

export interface CreateSessionResponse {
  session_id: string;
  delta: number;
  selector: string;
  normalized_public: Record<string, number>;
  status: SessionStatus;
  confidence: number;
  requested_feature?: string;
  revealed_features?: string[];
  decision?: Decision;
}

export interface SubmitFeatureResponse {
  session_id: string;
  feature: string;
  normalized_value: number;
  clipped: boolean;
  warning?: string;
  status: SessionStatus;
  confidence: number;
  requested_feature?: string;
  revealed_features?: string[];
  decision?: Decision;
}

export interface StepLogEntry {
  feature: string;
  chosen: number;
  value: number;
  scores: Record<string, number>;
  entropy_after: number;
  confidence_after: number;
}

export interface SessionView {
  session_id: string;
  delta: number;
  selector: string;
  feature_names: string[];
  pending_feature: string | null;
  public_idx: number[];
  sensitive_idx: number[];
  public_values: number[];
  revealed: { feature: number; value: number }[];
  unrevealed: number[];
  pending: number | null;
  log: StepLogEntry[];
  terminal: { is_core: boolean; label: number; confidence: number } | null;
  confidence: number;
  status: SessionStatus;
  requested_feature?: string;
  decision?: Decision;
}

export interface WhatIfResponse {
  feature: string;
  normalized_value: number;
  clipped: boolean;
  confidence_after: number;
  would_decide: boolean;
  label_if_decided: number | null;
}

export interface ApiErrorPayload {
  code: string;
  message: string;
  field?: string;
}
