/**
 * Decision summary view-model: label, confidence, revealed vs withheld
 * features, leakage fraction, and a step-log export that is byte-for-byte
 * the body of GET /sessions/{id}.
 */

import { SessionApi } from './api';
import type { SessionView } from './types';

export interface SummaryModel {
  label: number;
  confidence: number;
  revealed: string[];
  withheld: string[];
  leakage: number;
  leakagePercent: string;
  zeroDisclosure: boolean;
  stepLog: { feature: string; value: number; confidenceAfter: number }[];
}

export function buildSummary(view: SessionView): SummaryModel {
  if (view.status !== 'decided' || !view.decision || !view.terminal) {
    throw new Error('summary needs a decided session');
  }
  const names = view.feature_names;
  const revealed = view.revealed.map((r) => names[r.feature]);
  const withheld = view.unrevealed.map((i) => names[i]);
  return {
    label: view.decision.label,
    confidence: view.decision.confidence,
    revealed,
    withheld,
    leakage: view.decision.leakage,
    leakagePercent: `${(view.decision.leakage * 100).toFixed(0)}%`,
    zeroDisclosure: revealed.length === 0,
    stepLog: view.log.map((entry) => ({
      feature: entry.feature,
      value: entry.value,
      confidenceAfter: entry.confidence_after,
    })),
  };
}

/** The export is a passthrough of the server body, never re-serialized. */
export async function exportStepLog(api: SessionApi, sessionId: string): Promise<string> {
  const { raw } = await api.getSessionRaw(sessionId);
  return raw;
}
