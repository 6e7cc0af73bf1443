/** Minimal dependency-free SVG rendering of log-log decay plots.
 *
 * Slopes and intercepts are read from the harness summary and drawn as-is;
 * this module never re-fits (one source of truth for every echoed number).
 */

import type { FitEntry } from "./summary.js";

const WIDTH = 640;
const HEIGHT = 440;
const MARGIN = { left: 70, right: 24, top: 36, bottom: 56 };

const log2 = (x: number) => Math.log2(x);

function niceTicks(lo: number, hi: number, count = 6): number[] {
  if (!(hi > lo)) return [lo];
  const step = (hi - lo) / (count - 1);
  const ticks: number[] = [];
  for (let i = 0; i < count; i++) ticks.push(lo + i * step);
  return ticks;
}

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function renderFitSvg(fit: FitEntry): string {
  const xs = fit.eps_used.map(log2);
  const ys = fit.values.map(log2);
  const xLo = Math.min(...xs) - 0.4;
  const xHi = Math.max(...xs) + 0.4;
  const lineY = (x: number) => fit.slope * x + fit.intercept;
  const yAll = ys.concat([lineY(xLo), lineY(xHi)]);
  const yLo = Math.min(...yAll) - 0.4;
  const yHi = Math.max(...yAll) + 0.4;

  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const px = (x: number) => MARGIN.left + ((x - xLo) / (xHi - xLo)) * plotW;
  const py = (y: number) => MARGIN.top + (1 - (y - yLo) / (yHi - yLo)) * plotH;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
      `viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="monospace" font-size="12">`
  );
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);

  for (const t of niceTicks(xLo, xHi)) {
    const x = px(t);
    parts.push(
      `<line x1="${x.toFixed(1)}" y1="${MARGIN.top}" x2="${x.toFixed(1)}" ` +
        `y2="${HEIGHT - MARGIN.bottom}" stroke="#e0e0e0"/>`
    );
    parts.push(
      `<text x="${x.toFixed(1)}" y="${HEIGHT - MARGIN.bottom + 18}" ` +
        `text-anchor="middle">${t.toFixed(1)}</text>`
    );
  }
  for (const t of niceTicks(yLo, yHi)) {
    const y = py(t);
    parts.push(
      `<line x1="${MARGIN.left}" y1="${y.toFixed(1)}" x2="${WIDTH - MARGIN.right}" ` +
        `y2="${y.toFixed(1)}" stroke="#e0e0e0"/>`
    );
    parts.push(
      `<text x="${MARGIN.left - 8}" y="${(y + 4).toFixed(1)}" text-anchor="end">${t.toFixed(1)}</text>`
    );
  }
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" height="${plotH}" ` +
      `fill="none" stroke="#333"/>`
  );

  // fitted line straight through the log-log plane
  parts.push(
    `<line x1="${px(xLo).toFixed(1)}" y1="${py(lineY(xLo)).toFixed(1)}" ` +
      `x2="${px(xHi).toFixed(1)}" y2="${py(lineY(xHi)).toFixed(1)}" ` +
      `stroke="#c0392b" stroke-width="1.5"/>`
  );
  for (let i = 0; i < xs.length; i++) {
    parts.push(
      `<circle cx="${px(xs[i]).toFixed(1)}" cy="${py(ys[i]).toFixed(1)}" r="4" ` +
        `fill="#2c3e50"/>`
    );
  }

  parts.push(
    `<text x="${MARGIN.left}" y="20" font-size="14">${esc(fit.metric)}   ` +
      `slope=${fit.slope.toPrecision(8)}  r2=${fit.r2.toPrecision(6)}</text>`
  );
  parts.push(
    `<text x="${(MARGIN.left + plotW / 2).toFixed(1)}" y="${HEIGHT - 12}" ` +
      `text-anchor="middle">log2(eps)</text>`
  );
  parts.push(
    `<text x="16" y="${(MARGIN.top + plotH / 2).toFixed(1)}" ` +
      `transform="rotate(-90 16 ${(MARGIN.top + plotH / 2).toFixed(1)})" ` +
      `text-anchor="middle">log2(${esc(fit.metric)})</text>`
  );
  parts.push("</svg>");
  return parts.join("\n") + "\n";
}

/** One echoed slope-table row; numbers are copied verbatim from the summary. */
export function slopeTableRow(fit: FitEntry): string {
  return `${fit.metric}\tslope=${fit.slope.toPrecision(12)}\tintercept=${fit.intercept.toPrecision(
    12
  )}\tr2=${fit.r2.toPrecision(12)}`;
}
