/**
 * DOM bindings: renders the wizard screens into a root element and wires
 * user events to the controllers. All displayed numbers come straight from
 * server responses held in the wizard state.
 */

import { SessionApi } from './api';
import { gaugeModel } from './gauge';
import { buildSummary, exportStepLog } from './summary';
import { WhatIfPanel } from './whatif';
import { WizardController, WizardState } from './wizard';
import type { HealthInfo } from './types';

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  children: (Node | string)[] = []
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (key === 'class') node.className = value;
    else node.setAttribute(key, value);
  }
  node.append(...children);
  return node;
}

export class App {
  private wizard: WizardController;
  private whatif: WhatIfPanel | null = null;
  private health: HealthInfo | null = null;

  constructor(private readonly api: SessionApi, private readonly root: HTMLElement) {
    this.wizard = new WizardController(api);
    this.wizard.subscribe(() => this.render());
  }

  async boot(): Promise<void> {
    this.health = await this.api.health();
    this.render();
  }

  private render(): void {
    const state = this.wizard.getState();
    this.root.replaceChildren();
    if (!this.health) {
      this.root.append(el('p', {}, ['connecting to the disclosure service...']));
      return;
    }
    switch (state.phase) {
      case 'collect_public':
        this.root.append(this.publicForm(state));
        break;
      case 'prompting':
        this.root.append(this.promptScreen(state));
        break;
      case 'decided':
        this.root.append(this.decisionScreen(state));
        break;
      case 'ended':
        this.root.append(
          el('section', { class: 'ended' }, [
            el('h2', {}, ['Session ended']),
            el('p', {}, ['You declined to answer; no decision was made.']),
          ])
        );
        break;
    }
  }

  private publicForm(state: WizardState): HTMLElement {
    const health = this.health!;
    const form = el('form', { class: 'public-form' });
    form.append(el('h2', {}, ['Public features']));
    const inputs = new Map<string, HTMLInputElement>();
    for (const name of health.public_features) {
      const input = el('input', { name, placeholder: 'raw value' });
      inputs.set(name, input);
      form.append(el('label', {}, [`${name}: `, input]));
    }
    const deltaInput = el('input', { name: 'delta', value: String(health.delta) });
    form.append(el('label', {}, ['failure probability (delta): ', deltaInput]));
    if (state.validationError) {
      form.append(el('p', { class: 'error', role: 'alert' }, [state.validationError]));
    }
    if (state.apiError) {
      form.append(el('p', { class: 'error', role: 'alert' }, [state.apiError.message]));
    }
    form.append(el('button', { type: 'submit' }, ['Start session']));
    form.addEventListener('submit', (event) => {
      event.preventDefault();
      const values: Record<string, string> = {};
      for (const [name, input] of inputs) values[name] = input.value;
      void this.wizard.start(values, { delta: Number(deltaInput.value) }).then((next) => {
        if (next.sessionId && this.health) {
          this.whatif = new WhatIfPanel(
            this.api,
            next.sessionId,
            new Set(next.revealedFeatures),
            new Set(this.health.sensitive_features)
          );
        }
      });
    });
    return form;
  }

  private promptScreen(state: WizardState): HTMLElement {
    const gauge = gaugeModel(state.confidence ?? 0, state.delta ?? 0);
    const section = el('section', { class: 'prompt' });
    section.append(
      el('h2', {}, [`Please provide: ${state.requestedFeature}`]),
      this.gaugeBar(gauge.valuePercent, gauge.thresholdPercent, gauge.label),
      el('p', { class: 'revealed-list' }, [
        state.revealedFeatures.length
          ? `Revealed so far: ${state.revealedFeatures.join(', ')}`
          : 'Nothing revealed yet.',
      ])
    );
    if (state.lastEcho) {
      const echo = state.lastEcho;
      section.append(
        el('p', { class: 'echo' }, [
          `Server used ${echo.normalizedValue.toFixed(6)} for ${echo.feature}` +
            (echo.clipped ? ' (clipped to the training range)' : ''),
        ])
      );
    }
    const input = el('input', { placeholder: `raw value for ${state.requestedFeature}` });
    const preview = el('button', { type: 'button' }, ['Preview (what if?)']);
    const submit = el('button', { type: 'button' }, ['Disclose value']);
    const declineButton = el('button', { type: 'button', class: 'secondary' }, ['Decline and end']);
    const previewOutput = el('p', { class: 'preview-output' });

    preview.addEventListener('click', () => {
      const feature = state.requestedFeature;
      if (!this.whatif || !feature || !this.whatif.canPreview(feature)) return;
      this.whatif
        .preview(feature, input.value)
        .then((result) => {
          previewOutput.textContent = result.wouldDecide
            ? `Would decide: label ${result.labelIfDecided} at ${(result.confidenceAfter * 100).toFixed(1)}%`
            : `Would not decide yet (confidence ${(result.confidenceAfter * 100).toFixed(1)}%)`;
        })
        .catch((err) => {
          previewOutput.textContent = String(err instanceof Error ? err.message : err);
        });
    });
    submit.addEventListener('click', () => {
      const feature = state.requestedFeature;
      void this.wizard.submit(input.value).then(() => {
        if (feature && this.whatif) this.whatif.noteRevealed(feature);
      });
    });
    declineButton.addEventListener('click', () => this.wizard.decline());

    if (state.validationError) {
      section.append(el('p', { class: 'error', role: 'alert' }, [state.validationError]));
    }
    if (state.apiError) {
      section.append(el('p', { class: 'error', role: 'alert' }, [state.apiError.message]));
    }
    section.append(el('div', { class: 'controls' }, [input, preview, submit, declineButton]), previewOutput);
    return section;
  }

  private decisionScreen(state: WizardState): HTMLElement {
    const section = el('section', { class: 'decision' });
    const decision = state.decision!;
    section.append(
      el('h2', {}, [`Decision: label ${decision.label}`]),
      el('p', {}, [`Confidence ${(decision.confidence * 100).toFixed(1)}%`]),
      el('p', {}, [
        decision.features_revealed.length
          ? `Revealed: ${decision.features_revealed.join(', ')}`
          : '0% disclosed: the public features alone were enough.',
      ]),
      el('p', {}, [`Leakage: ${(decision.leakage * 100).toFixed(0)}% of sensitive features`])
    );
    const exportButton = el('button', { type: 'button' }, ['Download step log (JSON)']);
    exportButton.addEventListener('click', () => {
      if (!state.sessionId) return;
      void exportStepLog(this.api, state.sessionId).then((raw) => {
        const blob = new Blob([raw], { type: 'application/json' });
        const link = el('a', { href: URL.createObjectURL(blob), download: `session-${state.sessionId}.json` });
        link.click();
        URL.revokeObjectURL(link.href);
      });
    });
    const detail = el('div', { class: 'steps' });
    if (state.sessionId) {
      void this.api.getSession(state.sessionId).then((view) => {
        const summary = buildSummary(view);
        detail.replaceChildren(
          el('h3', {}, ['Step log']),
          ...summary.stepLog.map((step) =>
            el('p', {}, [
              `${step.feature} = ${step.value.toFixed(4)} (confidence after: ${(step.confidenceAfter * 100).toFixed(1)}%)`,
            ])
          ),
          el('p', {}, [`Withheld: ${summary.withheld.join(', ') || '(none)'}`])
        );
      });
    }
    section.append(exportButton, detail);
    return section;
  }

  private gaugeBar(valuePercent: number, thresholdPercent: number, label: string): HTMLElement {
    const fill = el('div', { class: 'gauge-fill', style: `width: ${valuePercent}%` });
    const marker = el('div', { class: 'gauge-threshold', style: `left: ${thresholdPercent}%` });
    return el('div', { class: 'gauge', title: label }, [
      el('div', { class: 'gauge-track' }, [fill, marker]),
      el('span', { class: 'gauge-label' }, [label]),
    ]);
  }
}
