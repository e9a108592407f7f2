/**
 * What-if panel: before committing a value, the user can ask the server
 * whether answering v would settle the outcome. Strictly read-only; the
 * session's step log must be unchanged afterwards (the e2e test checks the
 * full session body for equality around a preview).
 */

import { SessionApi } from './api';
import { parseNumericInput } from './wizard';
import type { WhatIfResponse } from './types';

export interface PreviewResult {
  feature: string;
  normalizedValue: number;
  clipped: boolean;
  wouldDecide: boolean;
  labelIfDecided: number | null;
  confidenceAfter: number;
}

export class WhatIfPanel {
  private lastPreview: PreviewResult | null = null;

  constructor(
    private readonly api: SessionApi,
    private readonly sessionId: string,
    private revealed: ReadonlySet<string>,
    private readonly sensitive: ReadonlySet<string>
  ) {}

  /** Previews are offered only for sensitive features not yet revealed. */
  canPreview(feature: string): boolean {
    return this.sensitive.has(feature) && !this.revealed.has(feature);
  }

  noteRevealed(feature: string): void {
    this.revealed = new Set([...this.revealed, feature]);
  }

  getLastPreview(): PreviewResult | null {
    return this.lastPreview;
  }

  async preview(feature: string, text: string): Promise<PreviewResult> {
    if (!this.canPreview(feature)) {
      throw new Error(`feature ${feature} cannot be previewed`);
    }
    const value = parseNumericInput(text);
    if (value === null) {
      throw new Error(`"${text}" is not a number`);
    }
    const doc: WhatIfResponse = await this.api.whatIf(this.sessionId, feature, value);
    this.lastPreview = {
      feature: doc.feature,
      normalizedValue: doc.normalized_value,
      clipped: doc.clipped,
      wouldDecide: doc.would_decide,
      labelIfDecided: doc.label_if_decided,
      confidenceAfter: doc.confidence_after,
    };
    return this.lastPreview;
  }
}
