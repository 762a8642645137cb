// Page wiring.  All model knowledge lives in the service responses; this
// file only moves them between fetch calls and the DOM.

import {
  createClient,
  createRequestSlot,
  resolveServiceUrl,
  ServiceError,
} from "./api.js";
import { buildCards, escapeHtml, renderCardsHtml } from "./cards.js";
import { buildComparison, type ScenarioColumn } from "./compare.js";
import {
  buildFormModel,
  collectRequest,
  withTarget,
  type FieldSpec,
  type FormModel,
  type RawValues,
} from "./form.js";
import type { ModelInfo, RecommendRequest } from "./types.js";
import { buildWaterfall, renderWaterfallSvg } from "./waterfall.js";

const client = createClient(resolveServiceUrl(window.location.search));
const recommendSlot = createRequestSlot();
const compareSlot = createRequestSlot();

let info: ModelInfo | null = null;
let formModel: FormModel | null = null;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function showBanner(message: string, retry: boolean): void {
  const banner = el<HTMLDivElement>("banner");
  banner.hidden = false;
  banner.innerHTML =
    `<span>${escapeHtml(message)}</span>` +
    (retry ? ` <button id="banner-retry" type="button">Retry</button>` : "");
  if (retry) {
    el<HTMLButtonElement>("banner-retry").addEventListener("click", () => {
      banner.hidden = true;
      void boot();
    });
  }
}

function hideBanner(): void {
  el<HTMLDivElement>("banner").hidden = true;
}

function controlHtml(field: FieldSpec): string {
  const name = escapeHtml(field.name);
  if (field.kind === "boolean") {
    return `<input type="checkbox" name="${name}">`;
  }
  if (field.kind === "categorical") {
    const options = (field.options ?? [])
      .map((opt) => `<option value="${escapeHtml(opt)}">${escapeHtml(opt)}</option>`)
      .join("");
    return `<select name="${name}">${options}</select>`;
  }
  const hint = field.range
    ? ` placeholder="${field.range[0].toFixed(0)} to ${field.range[1].toFixed(0)}"`
    : "";
  return `<input type="number" step="any" name="${name}"${hint}>`;
}

function renderForm(model: FormModel): void {
  const rows = model.fields.map((field) => {
    const targetClass = field.isTarget ? " field-target" : "";
    const tag = field.isTarget
      ? `<span class="target-tag">target energy class</span>`
      : "";
    return (
      `<label class="field${targetClass}" data-field="${escapeHtml(field.name)}">` +
      `<span class="field-label">${escapeHtml(field.label)}${tag}</span>` +
      controlHtml(field) +
      `<span class="field-message"></span></label>`
    );
  });
  el<HTMLFormElement>("building-form").innerHTML =
    rows.join("\n") +
    `<button type="submit" id="submit">Get recommendations</button>`;
}

function renderCompareControls(model: FormModel): void {
  if (!model.targetColumn) {
    el<HTMLElement>("compare").hidden = true;
    return;
  }
  const options = model.targetClasses
    .map((cls) => `<option value="${escapeHtml(cls)}">${escapeHtml(cls)}</option>`)
    .join("");
  el<HTMLDivElement>("compare-controls").innerHTML =
    `<label>Target A <select id="target-a">${options}</select></label>` +
    `<label>Target B <select id="target-b">${options}</select></label>` +
    `<button type="button" id="run-compare">Compare</button>`;
  el<HTMLButtonElement>("run-compare").addEventListener("click", () => {
    void runCompare();
  });
}

function readRaw(model: FormModel): RawValues {
  const form = el<HTMLFormElement>("building-form");
  const raw: RawValues = {};
  for (const field of model.fields) {
    const control = form.elements.namedItem(field.name);
    if (control instanceof HTMLInputElement && field.kind === "boolean") {
      raw[field.name] = control.checked;
    } else if (
      control instanceof HTMLInputElement ||
      control instanceof HTMLSelectElement
    ) {
      raw[field.name] = control.value;
    }
  }
  return raw;
}

function clearFieldMessages(): void {
  document.querySelectorAll(".field").forEach((node) => {
    node.classList.remove("field-invalid");
    const message = node.querySelector(".field-message");
    if (message) message.textContent = "";
  });
}

function markField(name: string, message: string): void {
  const node = document.querySelector(`.field[data-field="${CSS.escape(name)}"]`);
  if (!node) return;
  node.classList.add("field-invalid");
  const slot = node.querySelector(".field-message");
  if (slot) slot.textContent = message;
}

function surfaceError(error: unknown): void {
  if (error instanceof ServiceError) {
    if (error.status === 422 && error.body.column) {
      // the service names the offending column; put its words on that field
      markField(error.body.column, error.body.error);
      return;
    }
    if (error.status === 503) {
      showBanner(error.body.error, true);
      return;
    }
    showBanner(error.body.error, false);
    return;
  }
  showBanner("service unreachable", true);
}

async function runRecommend(request: RecommendRequest): Promise<void> {
  if (!info) return;
  const id = recommendSlot.issue();
  try {
    const [rec, exp] = await Promise.all([
      client.recommend(request),
      client.explain(request),
    ]);
    if (!recommendSlot.isCurrent(id)) return;
    el<HTMLElement>("results").hidden = false;
    el<HTMLDivElement>("cards").innerHTML = renderCardsHtml(
      buildCards(info, rec),
    );
    const probabilities = new Map(
      rec.recommendations.map((item) => [item.category, item.probability]),
    );
    el<HTMLDivElement>("waterfalls").innerHTML = exp.labels
      .map((entry) => {
        const view = buildWaterfall(entry);
        const probability =
          probabilities.get(entry.label_name) ?? entry.probability;
        return (
          `<figure class="waterfall-block">` +
          `<figcaption>${escapeHtml(entry.display_name)}: ` +
          `${(probability * 100).toFixed(0)}%</figcaption>` +
          renderWaterfallSvg(view) +
          `</figure>`
        );
      })
      .join("\n");
  } catch (error) {
    if (!recommendSlot.isCurrent(id)) return;
    surfaceError(error);
  }
}

async function runCompare(): Promise<void> {
  if (!info || !formModel || !formModel.targetColumn) return;
  const { request, errors } = collectRequest(formModel, readRaw(formModel));
  clearFieldMessages();
  if (!request) {
    for (const err of errors) markField(err.field, err.message);
    return;
  }
  const targetA = el<HTMLSelectElement>("target-a").value;
  const targetB = el<HTMLSelectElement>("target-b").value;
  const column = formModel.targetColumn;
  const id = compareSlot.issue();
  const settle = async (target: string): Promise<ScenarioColumn> => {
    try {
      return { target, response: await client.recommend(withTarget(request, column, target)) };
    } catch (error) {
      if (error instanceof ServiceError) {
        return { target, error: { status: error.status, body: error.body } };
      }
      return { target, error: { status: 0, body: { error: "service unreachable" } } };
    }
  };
  const [left, right] = await Promise.all([settle(targetA), settle(targetB)]);
  if (!compareSlot.isCurrent(id) || !info) return;

  const view = buildComparison(info, left, right);
  const columnsHtml = view.columns
    .map((column) => {
      const body = column.cards
        ? renderCardsHtml(column.cards)
        : `<p class="column-error">${escapeHtml(column.errorMessage ?? "")}</p>`;
      return (
        `<div class="compare-column"><h3>Target ${escapeHtml(column.target)}</h3>` +
        body +
        `</div>`
      );
    })
    .join("\n");
  el<HTMLDivElement>("compare-columns").innerHTML = columnsHtml;
  el<HTMLParagraphElement>("compare-note").textContent =
    view.highlights.size === 0
      ? "No recommendation differences between these targets."
      : `${view.highlights.size} recommendation(s) differ between the targets.`;
}

async function boot(): Promise<void> {
  try {
    info = await client.modelInfo();
  } catch (error) {
    surfaceError(error);
    return;
  }
  hideBanner();
  formModel = buildFormModel(info);
  renderForm(formModel);
  renderCompareControls(formModel);
  el<HTMLElement>("meta").textContent =
    `model ${info.artifact_id}, threshold ${info.threshold}, ` +
    `explanations ${info.explanation_method}`;
  el<HTMLFormElement>("building-form").addEventListener("submit", (event) => {
    event.preventDefault();
    if (!formModel) return;
    clearFieldMessages();
    const { request, errors } = collectRequest(formModel, readRaw(formModel));
    if (!request) {
      for (const err of errors) markField(err.field, err.message);
      return;
    }
    void runRecommend(request);
  });
}

void boot();
