"""Additive feature attributions for the classifier's four outputs.

For one sample x and one output label, the attribution assigns each feature a
value phi_i such that ``base_value + sum(phi) = f(x)``: the prediction is
decomposed into per-feature pushes away from the background average.  The
coalition value of a feature subset S is the interventional expectation: x's
values on S are spliced into every background row, everything else keeps the
background's values, and the model outputs are averaged.

Two estimators:

* exact enumeration of all 2^|F| subsets, weighted s!(|F|-1-s)!/|F|!, used
  up to 16 features;
* permutation sampling for wider models, with per-feature standard errors;
  the leftover efficiency residual is folded back proportionally to |phi_i|
  so the additive identity survives sampling noise.

Attributions default to probability scale (post-sigmoid); ``scale="score"``
switches to the pre-sigmoid logit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .mlp import MLPModel, forward, forward_logits

#: Exhaustive enumeration ceiling: 2^16 subset evaluations.
EXACT_MAX_FEATURES = 16

SCALES = ("probability", "score")

#: Row budget per forward pass when batching subset compositions.
_CHUNK_ROWS = 200_000


class ExplainError(ValueError):
    """Attribution request outside the estimator's domain."""


@dataclass
class Attribution:
    """Per-feature contributions for one sample and one output label."""

    label: int
    base_value: float
    phi: np.ndarray
    fx: float
    feature_names: list[str]
    feature_values: np.ndarray
    scale: str = "probability"
    label_name: str | None = None
    standard_errors: np.ndarray | None = None
    n_permutations: int | None = None

    def to_dict(self) -> dict:
        d = {
            "label": self.label,
            "label_name": self.label_name,
            "scale": self.scale,
            "base_value": self.base_value,
            "fx": self.fx,
            "features": [
                {"name": n, "value": float(v), "phi": float(p)}
                for n, v, p in zip(self.feature_names, self.feature_values, self.phi)
            ],
        }
        if self.standard_errors is not None:
            for item, se in zip(d["features"], self.standard_errors):
                item["standard_error"] = float(se)
            d["n_permutations"] = self.n_permutations
        return d


def _output_fn(model: MLPModel, scale: str):
    if scale == "probability":
        return lambda X: forward(model, X)
    if scale == "score":
        return lambda X: forward_logits(model, X)
    raise ExplainError(f"unknown scale {scale!r}, expected one of {list(SCALES)}")


def _check_inputs(model: MLPModel, x: np.ndarray, background: np.ndarray, label: int):
    x = np.asarray(x, dtype=np.float64)
    background = np.asarray(background, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != model.input_dim:
        raise ExplainError(f"x must be a vector of width {model.input_dim}")
    if background.ndim != 2 or background.shape[0] == 0:
        raise ExplainError("background must be a non-empty matrix")
    if background.shape[1] != model.input_dim:
        raise ExplainError("background width must match the model input")
    if not 0 <= label < model.output_dim:
        raise ExplainError(f"label must be in [0, {model.output_dim})")
    return x, background


def value_function(
    model: MLPModel,
    x: np.ndarray,
    subset,
    background: np.ndarray,
    label: int,
    scale: str = "probability",
) -> float:
    """Coalition value of a feature subset: interventional expectation.

    Splices x's values at the subset's indices into every background row and
    averages the model output at the label.
    """
    x, background = _check_inputs(model, x, background, label)
    fn = _output_fn(model, scale)
    cols = np.asarray(sorted(set(int(i) for i in subset)), dtype=np.intp)
    if cols.size and (cols[0] < 0 or cols[-1] >= x.shape[0]):
        raise ExplainError("subset indices out of range")
    composed = background.copy()
    composed[:, cols] = x[cols]
    return float(fn(composed)[:, label].mean())


def _subset_values(
    model: MLPModel,
    x: np.ndarray,
    background: np.ndarray,
    label: int,
    scale: str,
) -> np.ndarray:
    """Coalition values for every bitmask 0 .. 2^F - 1, batched."""
    fn = _output_fn(model, scale)
    n_features = x.shape[0]
    n_background = background.shape[0]
    n_masks = 1 << n_features
    values = np.empty(n_masks, dtype=np.float64)

    masks_per_chunk = max(1, _CHUNK_ROWS // n_background)
    for start in range(0, n_masks, masks_per_chunk):
        masks = range(start, min(start + masks_per_chunk, n_masks))
        composed = np.repeat(background[None, :, :], len(masks), axis=0)
        for j, mask in enumerate(masks):
            cols = [i for i in range(n_features) if mask >> i & 1]
            composed[j][:, cols] = x[cols]
        outputs = fn(composed.reshape(-1, n_features))[:, label]
        values[start : start + len(masks)] = outputs.reshape(len(masks), n_background).mean(axis=1)
    return values


def shapley_exact(
    model: MLPModel,
    x: np.ndarray,
    background: np.ndarray,
    label: int,
    scale: str = "probability",
    feature_names: list[str] | None = None,
    label_name: str | None = None,
) -> Attribution:
    """Exact attribution by full subset enumeration (up to 16 features)."""
    x, background = _check_inputs(model, x, background, label)
    n_features = x.shape[0]
    if n_features > EXACT_MAX_FEATURES:
        raise ExplainError(
            f"{n_features} features exceeds the exact ceiling of {EXACT_MAX_FEATURES};"
            " use shapley_sampled"
        )

    values = _subset_values(model, x, background, label, scale)
    masks = np.arange(1 << n_features, dtype=np.uint32)
    popcount = np.array([bin(m).count("1") for m in range(1 << n_features)])
    fact = [math.factorial(k) for k in range(n_features + 1)]
    # weight of adding a feature to a subset of size s
    weights = np.array(
        [fact[s] * fact[n_features - 1 - s] / fact[n_features] for s in range(n_features)]
    )

    phi = np.empty(n_features, dtype=np.float64)
    for i in range(n_features):
        without = masks[(masks >> i) & 1 == 0]
        with_i = without | np.uint32(1 << i)
        w = weights[popcount[without]]
        phi[i] = float(np.sum(w * (values[with_i] - values[without])))

    return Attribution(
        label=label,
        label_name=label_name,
        base_value=float(values[0]),
        phi=phi,
        fx=float(values[-1]),
        feature_names=list(feature_names) if feature_names else _default_names(n_features),
        feature_values=x.copy(),
        scale=scale,
    )


def shapley_sampled(
    model: MLPModel,
    x: np.ndarray,
    background: np.ndarray,
    label: int,
    n_permutations: int = 200,
    seed: int = 0,
    scale: str = "probability",
    feature_names: list[str] | None = None,
    label_name: str | None = None,
) -> Attribution:
    """Permutation-sampled attribution with per-feature standard errors.

    Each permutation walks features into the coalition in order and credits
    each feature its marginal value change; phi_i is the mean credit.  The
    efficiency residual left by sampling noise is redistributed across
    features proportionally to |phi_i| so base + sum(phi) = f(x) exactly.
    """
    x, background = _check_inputs(model, x, background, label)
    if n_permutations < 50:
        raise ExplainError("need at least 50 permutations for a usable estimate")
    fn = _output_fn(model, scale)
    n_features = x.shape[0]
    n_background = background.shape[0]
    rng = np.random.default_rng(seed)

    base_value = float(fn(background)[:, label].mean())
    fx_row = np.asarray(fn(x[None, :]))[0, label]

    contributions = np.empty((n_permutations, n_features), dtype=np.float64)
    for p in range(n_permutations):
        order = rng.permutation(n_features)
        # compositions for prefixes of length 1..F; prefix 0 is the background
        composed = np.repeat(background[None, :, :], n_features, axis=0)
        cols: list[int] = []
        for k, feat in enumerate(order):
            cols.append(int(feat))
            composed[k][:, cols] = x[cols]
        outputs = fn(composed.reshape(-1, n_features))[:, label]
        prefix_values = outputs.reshape(n_features, n_background).mean(axis=1)
        previous = base_value
        for k, feat in enumerate(order):
            contributions[p, feat] = prefix_values[k] - previous
            previous = prefix_values[k]

    phi = contributions.mean(axis=0)
    stderr = contributions.std(axis=0, ddof=1) / math.sqrt(n_permutations)

    fx = float(fx_row)
    residual = fx - base_value - float(phi.sum())
    total_abs = float(np.abs(phi).sum())
    if total_abs > 0.0:
        phi = phi + residual * np.abs(phi) / total_abs
    else:
        phi = phi + residual / n_features

    return Attribution(
        label=label,
        label_name=label_name,
        base_value=base_value,
        phi=phi,
        fx=fx,
        feature_names=list(feature_names) if feature_names else _default_names(n_features),
        feature_values=x.copy(),
        scale=scale,
        standard_errors=stderr,
        n_permutations=n_permutations,
    )


def _default_names(n: int) -> list[str]:
    return [f"feature_{i}" for i in range(n)]


@dataclass
class SummaryStats:
    """Global ranking data over a set of attributions (one label)."""

    feature_order: list[str]
    mean_abs_phi: dict[str, float]
    scatter: dict[str, list[tuple[float, float]]]

    def to_dict(self) -> dict:
        return {
            "feature_order": list(self.feature_order),
            "mean_abs_phi": dict(self.mean_abs_phi),
            "scatter": {
                name: [{"phi": p, "normalized_value": v} for p, v in pairs]
                for name, pairs in self.scatter.items()
            },
        }


def summarize(attributions: list[Attribution]) -> SummaryStats:
    """Rank features by mean |phi| (descending, ties by name ascending) and
    collect per-sample (phi, normalized feature value) scatter pairs.

    Feature values are min-max normalized per feature across the summarized
    samples; a constant feature maps to 0.5.
    """
    if not attributions:
        raise ExplainError("summarize needs at least one attribution")
    names = attributions[0].feature_names
    for a in attributions[1:]:
        if a.feature_names != names:
            raise ExplainError("attributions have inconsistent feature sets")

    phis = np.stack([a.phi for a in attributions])  # (samples, features)
    values = np.stack([a.feature_values for a in attributions])
    mean_abs = np.abs(phis).mean(axis=0)

    order = sorted(range(len(names)), key=lambda i: (-mean_abs[i], names[i]))
    lows = values.min(axis=0)
    spans = values.max(axis=0) - lows
    normalized = np.where(spans > 0, (values - lows) / np.where(spans > 0, spans, 1.0), 0.5)

    scatter = {
        names[i]: [(float(phis[s, i]), float(normalized[s, i])) for s in range(len(attributions))]
        for i in range(len(names))
    }
    return SummaryStats(
        feature_order=[names[i] for i in order],
        mean_abs_phi={names[i]: float(mean_abs[i]) for i in range(len(names))},
        scatter=scatter,
    )


def waterfall(attribution: Attribution) -> list[dict]:
    """Bottom-up contribution walk: base row first, then features by |phi|
    ascending with a running cumulative that ends at f(x).

    Features with phi exactly 0 are omitted (they would render as empty bars).
    """
    rows: list[dict] = [
        {"kind": "base", "cumulative": float(attribution.base_value)}
    ]
    order = np.argsort(np.abs(attribution.phi), kind="stable")
    cumulative = float(attribution.base_value)
    for i in order:
        phi = float(attribution.phi[i])
        if phi == 0.0:
            continue
        cumulative += phi
        rows.append(
            {
                "kind": "feature",
                "feature": attribution.feature_names[i],
                "value": float(attribution.feature_values[i]),
                "phi": phi,
                "sign": "positive" if phi > 0 else "negative",
                "cumulative": cumulative,
            }
        )
    return rows
