/**
 * Confidence gauge view-model: current top-class probability against the
 * acceptance threshold 1 - delta from the session config. Pure presentation,
 * the decision itself always comes from the server.
 */

export interface GaugeModel {
  valuePercent: number;
  thresholdPercent: number;
  reached: boolean;
  label: string;
}

export function gaugeModel(confidence: number, delta: number): GaugeModel {
  if (!(confidence >= 0 && confidence <= 1)) {
    throw new RangeError(`confidence ${confidence} outside [0, 1]`);
  }
  if (!(delta >= 0 && delta < 0.5)) {
    throw new RangeError(`delta ${delta} outside [0, 0.5)`);
  }
  const threshold = 1 - delta;
  return {
    valuePercent: Math.round(confidence * 1000) / 10,
    thresholdPercent: Math.round(threshold * 1000) / 10,
    reached: confidence >= threshold,
    label: `${(confidence * 100).toFixed(1)}% of ${(threshold * 100).toFixed(1)}% needed`,
  };
}
