// Category cards: one per output label, badge decided by the service's own
// recommended flag, never recomputed from probability and threshold here.

import type { ModelInfo, RecommendResponse } from "./types.js";

export interface CardView {
  category: string;
  displayName: string;
  description: string;
  probability: number;
  recommended: boolean;
  highlighted: boolean;
}

export function buildCards(
  info: ModelInfo,
  response: RecommendResponse,
  highlightCategories: ReadonlySet<string> = new Set(),
): CardView[] {
  const descriptions = new Map(
    info.labels.map((label) => [label.category, label.description]),
  );
  return response.recommendations.map((item) => ({
    category: item.category,
    displayName: item.display_name,
    description: descriptions.get(item.category) ?? "",
    probability: item.probability,
    recommended: item.recommended,
    highlighted: highlightCategories.has(item.category),
  }));
}

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function formatProbability(probability: number): string {
  return `${(probability * 100).toFixed(0)}%`;
}

export function renderCardHtml(card: CardView): string {
  const badgeClass = card.recommended ? "badge badge-on" : "badge badge-off";
  const badgeText = card.recommended ? "Recommended" : "Not recommended";
  const classes = ["card", card.highlighted ? "card-highlight" : ""]
    .filter(Boolean)
    .join(" ");
  return [
    `<article class="${classes}" data-category="${escapeHtml(card.category)}">`,
    `  <header>`,
    `    <h3>${escapeHtml(card.displayName)}</h3>`,
    `    <span class="${badgeClass}">${badgeText}</span>`,
    `  </header>`,
    `  <p class="card-probability">${formatProbability(card.probability)}</p>`,
    `  <p class="card-description">${escapeHtml(card.description)}</p>`,
    `</article>`,
  ].join("\n");
}

export function renderCardsHtml(cards: CardView[]): string {
  return cards.map(renderCardHtml).join("\n");
}
