// Contribution walk rendering.  The service sends waterfall rows with the
// running cumulative already computed, base first and features by rising
// |phi|; this module turns those numbers into bar geometry and nothing else.

import { escapeHtml } from "./cards.js";
import type { LabelAttribution } from "./types.js";

export interface WaterfallBarView {
  label: string;
  kind: "base" | "positive" | "negative";
  /** Segment endpoints on the value axis, straight from the row cumulatives. */
  start: number;
  end: number;
  cumulative: number;
  phi?: number;
}

export interface WaterfallView {
  category: string;
  displayName: string;
  probability: number;
  baseValue: number;
  finalCumulative: number;
  bars: WaterfallBarView[];
  /** Sum check, shown as the chart tooltip. */
  tooltip: string;
}

export function buildWaterfall(entry: LabelAttribution): WaterfallView {
  const rows = entry.waterfall;
  const bars: WaterfallBarView[] = [];
  let previous = 0;
  for (const row of rows) {
    if (row.kind === "base") {
      bars.push({
        label: "Base value",
        kind: "base",
        start: 0,
        end: row.cumulative,
        cumulative: row.cumulative,
      });
    } else {
      bars.push({
        label: row.feature,
        kind: row.sign,
        start: previous,
        end: row.cumulative,
        cumulative: row.cumulative,
        phi: row.phi,
      });
    }
    previous = row.cumulative;
  }
  const finalCumulative = bars.length
    ? bars[bars.length - 1]!.cumulative
    : entry.base_value;
  const tooltip =
    `base ${entry.base_value.toFixed(2)} plus contributions ends at ` +
    `${finalCumulative.toFixed(2)}, probability ${entry.probability.toFixed(2)}`;
  return {
    category: entry.label_name,
    displayName: entry.display_name,
    probability: entry.probability,
    baseValue: entry.base_value,
    finalCumulative,
    bars,
    tooltip,
  };
}

const BAR_FILL = {
  base: "#8a8f98",
  positive: "#c43d3d",
  negative: "#3d6ec4",
} as const;

function formatPhi(phi: number): string {
  return (phi >= 0 ? "+" : "") + phi.toFixed(3);
}

/**
 * Static SVG, bottom-up: base bar at the bottom, one bar per feature above
 * it in the order the service sent, and a dashed marker at the final value.
 */
export function renderWaterfallSvg(view: WaterfallView, width = 560): string {
  const rowHeight = 26;
  const barHeight = 16;
  const labelWidth = 170;
  const topPad = 24;
  const bottomPad = 8;
  const height = topPad + view.bars.length * rowHeight + bottomPad;

  const values = view.bars.flatMap((bar) => [bar.start, bar.end]);
  const lo = Math.min(0, ...values);
  const hi = Math.max(...values, lo + 1e-9);
  const plotLeft = labelWidth;
  const plotRight = width - 60;
  const x = (v: number) =>
    plotLeft + ((v - lo) / (hi - lo)) * (plotRight - plotLeft);

  const parts: string[] = [];
  parts.push(
    `<svg class="waterfall" viewBox="0 0 ${width} ${height}" ` +
      `xmlns="http://www.w3.org/2000/svg" role="img">`,
  );
  parts.push(`<title>${escapeHtml(view.tooltip)}</title>`);

  // bottom-up: bar index 0 sits on the lowest row
  view.bars.forEach((bar, i) => {
    const y = topPad + (view.bars.length - 1 - i) * rowHeight;
    const x0 = Math.min(x(bar.start), x(bar.end));
    const w = Math.max(Math.abs(x(bar.end) - x(bar.start)), 1);
    const text =
      bar.phi === undefined
        ? `${bar.label}: ${bar.cumulative.toFixed(3)}`
        : `${bar.label}: ${formatPhi(bar.phi)} to ${bar.cumulative.toFixed(3)}`;
    parts.push(`<g class="wf-row wf-${bar.kind}">`);
    parts.push(`<title>${escapeHtml(text)}</title>`);
    parts.push(
      `<text x="${labelWidth - 8}" y="${y + barHeight - 3}" ` +
        `text-anchor="end" class="wf-label">${escapeHtml(bar.label)}</text>`,
    );
    parts.push(
      `<rect x="${x0.toFixed(1)}" y="${y}" width="${w.toFixed(1)}" ` +
        `height="${barHeight}" fill="${BAR_FILL[bar.kind]}"></rect>`,
    );
    if (bar.phi !== undefined) {
      parts.push(
        `<text x="${(x0 + w + 6).toFixed(1)}" y="${y + barHeight - 3}" ` +
          `class="wf-phi">${formatPhi(bar.phi)}</text>`,
      );
    }
    parts.push(`</g>`);
  });

  // final value marker, which the acceptance check ties to the card probability
  const fx = x(view.finalCumulative);
  parts.push(
    `<line x1="${fx.toFixed(1)}" y1="${topPad - 12}" x2="${fx.toFixed(1)}" ` +
      `y2="${height - bottomPad}" class="wf-final" stroke="#444" ` +
      `stroke-dasharray="4 3"></line>`,
  );
  parts.push(
    `<text x="${fx.toFixed(1)}" y="${topPad - 14}" text-anchor="middle" ` +
      `class="wf-final-label">f(x) = ${view.finalCumulative.toFixed(2)}</text>`,
  );
  parts.push(`</svg>`);
  return parts.join("\n");
}
