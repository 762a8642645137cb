// Shapes of the service's JSON payloads, mirrored field for field.
// Every number shown in the UI comes out of one of these; the client adds
// no arithmetic of its own beyond chart geometry.

export type FeatureKind = "numerical" | "categorical" | "boolean";

export interface FeatureDescriptor {
  name: string;
  kind: FeatureKind;
  unit?: string;
  /** Known categories in encoder order; anything else is rejected server-side. */
  categories?: string[];
  /** Observed raw [min, max] of the training data, a hint for plausible values. */
  range?: [number, number];
}

export interface LabelDescriptor {
  category: string;
  display_name: string;
  description: string;
}

export interface TargetInfo {
  column: string;
  initial_column: string;
  classes: string[];
}

export interface ModelInfo {
  artifact_id: string;
  threshold: number;
  provenance: Record<string, unknown>;
  schema: { id: string; version: number; fingerprint: string };
  features: FeatureDescriptor[];
  labels: LabelDescriptor[];
  target: TargetInfo | null;
  explanation_method: "exact" | "sampled";
}

export type FeatureValue = number | string | boolean;

export interface RecommendRequest {
  features: Record<string, FeatureValue>;
}

export interface Recommendation {
  category: string;
  display_name: string;
  probability: number;
  recommended: boolean;
}

export interface RecommendResponse {
  artifact_id: string;
  threshold: number;
  recommendations: Recommendation[];
}

export interface AttributionFeature {
  name: string;
  value: number;
  phi: number;
  standard_error?: number;
}

export interface WaterfallBaseRow {
  kind: "base";
  cumulative: number;
}

export interface WaterfallFeatureRow {
  kind: "feature";
  feature: string;
  value: number;
  phi: number;
  sign: "positive" | "negative";
  cumulative: number;
}

export type WaterfallRow = WaterfallBaseRow | WaterfallFeatureRow;

export interface LabelAttribution {
  label: number;
  label_name: string;
  scale: string;
  base_value: number;
  fx: number;
  features: AttributionFeature[];
  n_permutations?: number;
  display_name: string;
  probability: number;
  recommended: boolean;
  waterfall: WaterfallRow[];
}

export interface ExplainResponse {
  artifact_id: string;
  threshold: number;
  method: "exact" | "sampled";
  labels: LabelAttribution[];
}

export interface ServiceErrorBody {
  error: string;
  /** Present when the problem is a single feature; names the form field. */
  column?: string;
}
