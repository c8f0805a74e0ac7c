/**
 * Verdict view derivation. The dot color comes from the service's
 * in_range field and from nothing else: this module never compares the
 * observed heart rate against the quantile values, so the verdict shown
 * can never disagree with the model that produced it.
 */

import type { PredictResponse } from "./api.js";

export type DotColor = "green" | "red" | "none";

export interface Marker {
  level: number;
  bpm: number;
}

export interface VerdictView {
  dot: DotColor;
  /** Percentile markers in ascending level order (empty unless Ok). */
  markers: Marker[];
  /** Observed heart rate, echoed for dot placement on the band chart. */
  observedHr: number | null;
  /** Human-readable refusal or validation notice; null when Ok. */
  notice: string | null;
}

export const OUT_OF_DOMAIN_NOTICE =
  "No prediction: inputs fall outside the ranges covered by the model's training data.";

export function toVerdictView(
  response: PredictResponse,
  observedHr: number,
): VerdictView {
  if (response.status === "OutOfDomain") {
    return { dot: "none", markers: [], observedHr: null, notice: OUT_OF_DOMAIN_NOTICE };
  }
  if (response.status === "InvalidInput") {
    const why = response.reason ? `: ${response.reason}` : "";
    return {
      dot: "none",
      markers: [],
      observedHr: null,
      notice: `Inputs rejected by the service${why}.`,
    };
  }
  const markers = Object.entries(response.quantiles)
    .map(([level, bpm]) => ({ level: Number(level), bpm }))
    .sort((a, b) => a.level - b.level);
  return {
    dot: response.in_range ? "green" : "red",
    markers,
    observedHr,
    notice: null,
  };
}
