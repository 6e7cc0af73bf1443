#!/usr/bin/env node
/** machlab-plots: render log-log decay figures from a sweep summary.
 *
 * Usage:
 *   machlab-plots --summary PATH [--out DIR] [--metrics a,b,c]
 *
 * Exit codes: 0 ok, 1 usage, 2 unreadable/malformed summary,
 * 3 empty sweep (nothing to plot), 4 some requested metrics missing
 * (the rest are still rendered).
 */

import { mkdirSync, writeFileSync } from "node:fs";
import { dirname, join } from "node:path";

import { renderFitSvg, slopeTableRow } from "./plot.js";
import { availableMetrics, fitFor, loadSummary, SummaryError } from "./summary.js";

interface Args {
  summary: string;
  out: string | null;
  metrics: string[] | null;
}

function parseArgs(argv: string[]): Args {
  let summary: string | null = null;
  let out: string | null = null;
  let metrics: string[] | null = null;
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    const next = () => {
      i += 1;
      if (i >= argv.length) throw new Error(`flag ${arg} needs a value`);
      return argv[i];
    };
    switch (arg) {
      case "--summary":
        summary = next();
        break;
      case "--out":
        out = next();
        break;
      case "--metrics":
        metrics = next().split(",").map((m) => m.trim()).filter(Boolean);
        break;
      case "--help":
      case "-h":
        console.log("usage: machlab-plots --summary PATH [--out DIR] [--metrics a,b,c]");
        process.exit(0);
        break;
      default:
        throw new Error(`unknown flag ${arg}`);
    }
  }
  if (summary === null) throw new Error("--summary is required");
  return { summary, out, metrics };
}

export function main(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error(`usage error: ${(err as Error).message}`);
    return 1;
  }

  let summary;
  try {
    summary = loadSummary(args.summary);
  } catch (err) {
    if (err instanceof SummaryError) {
      console.error(err.message);
      return 2;
    }
    throw err;
  }

  if (summary.eps_compared.length === 0 || summary.fits.length === 0) {
    console.error("empty sweep: no compared eps values / no fits to plot");
    return 3;
  }

  const wanted = args.metrics ?? availableMetrics(summary);
  const outDir = args.out ?? dirname(args.summary);
  mkdirSync(outDir, { recursive: true });

  const missing: string[] = [];
  let rendered = 0;
  for (const metric of wanted) {
    const fit = fitFor(summary, metric);
    if (fit === undefined) {
      missing.push(metric);
      continue;
    }
    const path = join(outDir, `${metric}.svg`);
    writeFileSync(path, renderFitSvg(fit));
    console.log(slopeTableRow(fit) + `\tfigure=${path}`);
    rendered += 1;
  }

  if (missing.length > 0) {
    console.error(`skipped metrics with no fit in the summary: ${missing.join(", ")}`);
    return 4;
  }
  if (rendered === 0) {
    console.error("no figures rendered");
    return 3;
  }
  return 0;
}

const invokedDirectly =
  process.argv[1] !== undefined && import.meta.url.endsWith(process.argv[1].split("/").pop()!);
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
