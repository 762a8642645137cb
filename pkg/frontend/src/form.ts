// Schema-driven form: the service's /model/info feature list is the only
// source of controls, so a model with extra columns needs no client change.

import type {
  FeatureDescriptor,
  FeatureValue,
  ModelInfo,
  RecommendRequest,
} from "./types.js";

export interface FieldSpec {
  name: string;
  kind: FeatureDescriptor["kind"];
  label: string;
  unit?: string;
  options?: string[];
  range?: [number, number];
  /** True for the column the what-if target picker drives. */
  isTarget: boolean;
}

export interface FormModel {
  fields: FieldSpec[];
  targetColumn: string | null;
  targetClasses: string[];
}

export interface FieldError {
  field: string;
  message: string;
}

/** Raw control state: text for inputs and selects, boolean for toggles. */
export type RawValues = Record<string, string | boolean | undefined>;

function titleCase(name: string): string {
  const words = name.split("_").join(" ");
  return words.charAt(0).toUpperCase() + words.slice(1);
}

export function fieldLabel(feature: FeatureDescriptor): string {
  const base = titleCase(feature.name);
  return feature.unit ? `${base} (${feature.unit})` : base;
}

export function buildFormModel(info: ModelInfo): FormModel {
  const targetColumn = info.target?.column ?? null;
  return {
    fields: info.features.map((feature) => ({
      name: feature.name,
      kind: feature.kind,
      label: fieldLabel(feature),
      unit: feature.unit,
      options: feature.categories,
      range: feature.range,
      isTarget: feature.name === targetColumn,
    })),
    targetColumn,
    targetClasses: info.target?.classes ?? [],
  };
}

/**
 * Check raw control values against the form model and, when everything is
 * present and parseable, assemble the request body.  Every field is
 * required: the encoder rejects missing features anyway, so the form says
 * so before the round trip.
 */
export function collectRequest(
  model: FormModel,
  raw: RawValues,
): { request?: RecommendRequest; errors: FieldError[] } {
  const errors: FieldError[] = [];
  const features: Record<string, FeatureValue> = {};

  for (const field of model.fields) {
    const value = raw[field.name];
    if (field.kind === "boolean") {
      features[field.name] = value === true || value === "true";
      continue;
    }
    if (value === undefined || value === "") {
      errors.push({ field: field.name, message: `${field.label} is required` });
      continue;
    }
    if (field.kind === "numerical") {
      const parsed = Number(value);
      if (!Number.isFinite(parsed)) {
        errors.push({
          field: field.name,
          message: `${field.label} must be a number`,
        });
        continue;
      }
      features[field.name] = parsed;
      continue;
    }
    // categorical: the dropdown only offers known options, but a stale or
    // hand-edited value still gets caught here
    if (field.options && !field.options.includes(String(value))) {
      errors.push({
        field: field.name,
        message: `${field.label} must be one of the listed options`,
      });
      continue;
    }
    features[field.name] = String(value);
  }

  if (errors.length > 0) {
    return { errors };
  }
  return { request: { features }, errors };
}

/** Same form, different target class: the what-if request builder. */
export function withTarget(
  request: RecommendRequest,
  targetColumn: string,
  targetClass: string,
): RecommendRequest {
  return { features: { ...request.features, [targetColumn]: targetClass } };
}
