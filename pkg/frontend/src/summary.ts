/** Sweep summary schema as written by the solver harness (summary.json). */

import { readFileSync } from "node:fs";

export interface FitEntry {
  metric: string;
  slope: number;
  intercept: number;
  r2: number;
  eps_used: number[];
  values: number[];
}

export interface PerEpsEntry {
  eps: number;
  status: string;
  aggregates: Record<string, number>;
}

export interface SweepSummary {
  eps_list: number[];
  eps_compared: number[];
  per_eps: PerEpsEntry[];
  fits: FitEntry[];
  assertions: unknown[];
  config: unknown;
}

export class SummaryError extends Error {}

export function loadSummary(path: string): SweepSummary {
  let raw: string;
  try {
    raw = readFileSync(path, "utf8");
  } catch (err) {
    throw new SummaryError(`cannot read summary ${path}: ${(err as Error).message}`);
  }
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch (err) {
    throw new SummaryError(`malformed JSON in ${path}: ${(err as Error).message}`);
  }
  const summary = data as Partial<SweepSummary>;
  for (const key of ["eps_compared", "per_eps", "fits"] as const) {
    if (!Array.isArray(summary[key])) {
      throw new SummaryError(`summary ${path} is missing the '${key}' array`);
    }
  }
  return summary as SweepSummary;
}

/** Metric names that have a usable fit in the summary. */
export function availableMetrics(summary: SweepSummary): string[] {
  return summary.fits.map((f) => f.metric);
}

export function fitFor(summary: SweepSummary, metric: string): FitEntry | undefined {
  return summary.fits.find((f) => f.metric === metric);
}
