/**
 * Session wizard state machine.
 *
 * collect_public -> (create) -> prompting -> ... -> decided
 *                                   \-> ended (user declines to answer)
 *
 * Optimistic updates are deliberately absent: every state transition is the
 * verbatim result of one API round-trip, so what the user sees is exactly
 * what the server decided. Declining to answer ends the session; there is
 * no skip.
 */

import { ApiError, SessionApi } from './api';
import type { Decision, SessionStatus } from './types';

export type WizardPhase = 'collect_public' | 'prompting' | 'decided' | 'ended';

export interface ValueEcho {
  feature: string;
  normalizedValue: number;
  clipped: boolean;
  warning?: string;
}

export interface WizardState {
  phase: WizardPhase;
  sessionId: string | null;
  delta: number | null;
  selector: string | null;
  requestedFeature: string | null;
  confidence: number | null;
  revealedFeatures: string[];
  normalizedPublic: Record<string, number> | null;
  lastEcho: ValueEcho | null;
  decision: Decision | null;
  validationError: string | null;
  apiError: { code: string; message: string; field?: string } | null;
}

const INITIAL: WizardState = {
  phase: 'collect_public',
  sessionId: null,
  delta: null,
  selector: null,
  requestedFeature: null,
  confidence: null,
  revealedFeatures: [],
  normalizedPublic: null,
  lastEcho: null,
  decision: null,
  validationError: null,
  apiError: null,
};

/** Strict numeric parse: plain decimal or scientific notation only. */
export function parseNumericInput(text: string): number | null {
  const trimmed = text.trim();
  if (trimmed === '' || !/^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$/.test(trimmed)) {
    return null;
  }
  const value = Number(trimmed);
  return Number.isFinite(value) ? value : null;
}

export class WizardController {
  private state: WizardState = { ...INITIAL };
  private listeners: Array<(s: WizardState) => void> = [];

  constructor(private readonly api: SessionApi) {}

  getState(): WizardState {
    return this.state;
  }

  subscribe(listener: (s: WizardState) => void): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private update(patch: Partial<WizardState>): void {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) listener(this.state);
  }

  /**
   * Validate the public form locally (inline validation, no API call on bad
   * input) and create the session. The session may be decided at birth, in
   * which case the wizard skips straight to the decision screen.
   */
  async start(
    publicInputs: Record<string, string>,
    options: { delta?: number; selector?: string } = {}
  ): Promise<WizardState> {
    if (this.state.phase !== 'collect_public') {
      throw new Error(`cannot start from phase ${this.state.phase}`);
    }
    const values: Record<string, number> = {};
    for (const [name, text] of Object.entries(publicInputs)) {
      const value = parseNumericInput(text);
      if (value === null) {
        this.update({ validationError: `"${text}" is not a number (field ${name})` });
        return this.state;
      }
      values[name] = value;
    }
    this.update({ validationError: null, apiError: null });
    try {
      const doc = await this.api.createSession(values, options);
      this.update({
        sessionId: doc.session_id,
        delta: doc.delta,
        selector: doc.selector,
        normalizedPublic: doc.normalized_public,
        ...this.fromStatus(doc.status, doc.confidence, doc.requested_feature, doc.revealed_features, doc.decision),
      });
    } catch (err) {
      this.captureApiError(err);
    }
    return this.state;
  }

  /** Submit the requested feature's value (raw units; the server normalizes). */
  async submit(text: string): Promise<WizardState> {
    if (this.state.phase !== 'prompting' || this.state.sessionId === null) {
      throw new Error('no feature request is pending');
    }
    const value = parseNumericInput(text);
    if (value === null) {
      this.update({ validationError: `"${text}" is not a number` });
      return this.state;
    }
    this.update({ validationError: null, apiError: null });
    try {
      const doc = await this.api.submitFeature(this.state.sessionId, value);
      this.update({
        lastEcho: {
          feature: doc.feature,
          normalizedValue: doc.normalized_value,
          clipped: doc.clipped,
          warning: doc.warning,
        },
        ...this.fromStatus(doc.status, doc.confidence, doc.requested_feature, doc.revealed_features, doc.decision),
      });
    } catch (err) {
      this.captureApiError(err);
    }
    return this.state;
  }

  /** Declining to answer ends the session: no skip semantics exist. */
  decline(): WizardState {
    if (this.state.phase !== 'prompting') {
      throw new Error('nothing to decline');
    }
    this.update({ phase: 'ended', requestedFeature: null });
    return this.state;
  }

  private fromStatus(
    status: SessionStatus,
    confidence: number,
    requested?: string,
    revealed?: string[],
    decision?: Decision
  ): Partial<WizardState> {
    if (status === 'decided') {
      return {
        phase: 'decided',
        confidence,
        requestedFeature: null,
        decision: decision ?? null,
        revealedFeatures: decision?.features_revealed ?? this.state.revealedFeatures,
      };
    }
    return {
      phase: 'prompting',
      confidence,
      requestedFeature: requested ?? null,
      revealedFeatures: revealed ?? this.state.revealedFeatures,
      decision: null,
    };
  }

  private captureApiError(err: unknown): void {
    if (err instanceof ApiError) {
      this.update({ apiError: { code: err.code, message: err.message, field: err.field } });
    } else {
      this.update({ apiError: { code: 'network', message: String(err) } });
    }
  }
}
