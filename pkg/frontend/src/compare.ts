// Two-target what-if comparison.  Both columns come from independent
// /recommend calls on requests that differ only in the target class; the
// highlight set is exactly the labels whose recommended flags disagree.

import { buildCards, type CardView } from "./cards.js";
import type { ModelInfo, RecommendResponse, ServiceErrorBody } from "./types.js";

export interface ScenarioColumn {
  target: string;
  response?: RecommendResponse;
  error?: { status: number; body: ServiceErrorBody };
}

export interface ComparisonColumnView {
  target: string;
  cards?: CardView[];
  errorMessage?: string;
}

export interface ComparisonView {
  columns: [ComparisonColumnView, ComparisonColumnView];
  /** Categories whose booleans differ; empty unless both columns answered. */
  highlights: Set<string>;
}

export function differingLabels(
  a: RecommendResponse,
  b: RecommendResponse,
): string[] {
  const flags = new Map(
    b.recommendations.map((item) => [item.category, item.recommended]),
  );
  return a.recommendations
    .filter((item) => {
      const other = flags.get(item.category);
      return other !== undefined && other !== item.recommended;
    })
    .map((item) => item.category);
}

export function buildComparison(
  info: ModelInfo,
  left: ScenarioColumn,
  right: ScenarioColumn,
): ComparisonView {
  const highlights =
    left.response && right.response
      ? new Set(differingLabels(left.response, right.response))
      : new Set<string>();
  const toView = (column: ScenarioColumn): ComparisonColumnView => {
    if (column.response) {
      return {
        target: column.target,
        cards: buildCards(info, column.response, highlights),
      };
    }
    return {
      target: column.target,
      errorMessage: column.error
        ? column.error.body.error
        : "request did not complete",
    };
  };
  return {
    columns: [toView(left), toView(right)],
    highlights,
  };
}
