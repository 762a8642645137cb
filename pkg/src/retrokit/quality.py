"""Scores for how faithfully a synthetic table mimics a real one.

Two layers, each in [0, 1] where 1 is indistinguishable-by-the-metric:

* column shapes: per-column marginal fidelity.  Numerical columns score
  ``1 - KS`` (one minus the two-sample Kolmogorov-Smirnov statistic);
  categorical and boolean columns score ``1 - TV`` (one minus total
  variation distance between category frequencies).
* column pair trends: per-pair dependence fidelity.  Numerical pairs compare
  Pearson correlations; pairs with a categorical or boolean side compare
  joint frequency tables, with numerical sides discretized into 10
  equal-frequency bins whose edges come from the real column.

The report averages each layer, and the overall score is the mean of the two
layer scores.  A separate diagnostic report runs hard structural checks
(column presence, value kinds, category coverage, numerical ranges).
"""

from __future__ import annotations

from collections import Counter
from itertools import combinations

import numpy as np

from .schema import BuildingRecord, DatasetSchema


class QualityError(ValueError):
    """Tables unusable for scoring (empty columns, shape problems)."""


def ks_complement(real, synth) -> float:
    """1 minus the two-sample KS statistic (sup distance between ECDFs)."""
    real = np.asarray(real, dtype=np.float64)
    synth = np.asarray(synth, dtype=np.float64)
    if real.size == 0 or synth.size == 0:
        raise QualityError("ks_complement needs non-empty samples")
    real = np.sort(real)
    synth = np.sort(synth)
    pooled = np.concatenate([real, synth])
    cdf_real = np.searchsorted(real, pooled, side="right") / real.size
    cdf_synth = np.searchsorted(synth, pooled, side="right") / synth.size
    return float(1.0 - np.abs(cdf_real - cdf_synth).max())


def tv_complement(real, synth) -> float:
    """1 minus the total variation distance between category frequencies."""
    real = list(real)
    synth = list(synth)
    if not real or not synth:
        raise QualityError("tv_complement needs non-empty samples")
    freq_real = Counter(real)
    freq_synth = Counter(synth)
    categories = set(freq_real) | set(freq_synth)
    tv = 0.5 * sum(
        abs(freq_real[c] / len(real) - freq_synth[c] / len(synth)) for c in categories
    )
    return float(1.0 - tv)


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    # A constant column has no linear trend; score its correlation as 0.
    if x.size < 2 or np.ptp(x) == 0.0 or np.ptp(y) == 0.0:
        return 0.0
    return float(np.corrcoef(x, y)[0, 1])


def correlation_similarity(real_x, real_y, synth_x, synth_y) -> float:
    """1 - |pearson_real - pearson_synth| / 2, in [0, 1]."""
    rho_real = _pearson(np.asarray(real_x, dtype=np.float64), np.asarray(real_y, dtype=np.float64))
    rho_synth = _pearson(np.asarray(synth_x, dtype=np.float64), np.asarray(synth_y, dtype=np.float64))
    return float(1.0 - abs(rho_real - rho_synth) / 2.0)


def equal_frequency_bins(real_values, n_bins: int = 10) -> np.ndarray:
    """Interior bin edges (quantiles of the real sample) for discretization."""
    real_values = np.asarray(real_values, dtype=np.float64)
    if real_values.size == 0:
        raise QualityError("cannot bin an empty column")
    qs = np.arange(1, n_bins) / n_bins
    return np.quantile(real_values, qs)


def _discretize(values, edges: np.ndarray) -> np.ndarray:
    return np.searchsorted(edges, np.asarray(values, dtype=np.float64), side="right")


def contingency_similarity(real_a, real_b, synth_a, synth_b, n_bins: int = 10) -> float:
    """1 minus half the L1 distance between joint category frequencies.

    Numerical sides are discretized with equal-frequency bins fitted on the
    real column, the same edges applied to both tables.
    """
    columns = []
    for real_col, synth_col in ((real_a, synth_a), (real_b, synth_b)):
        real_col = list(real_col)
        synth_col = list(synth_col)
        if not real_col or not synth_col:
            raise QualityError("contingency_similarity needs non-empty columns")
        if isinstance(real_col[0], (int, float)) and not isinstance(real_col[0], bool):
            edges = equal_frequency_bins(real_col, n_bins)
            columns.append((_discretize(real_col, edges), _discretize(synth_col, edges)))
        else:
            columns.append((real_col, synth_col))

    (ra, sa), (rb, sb) = columns
    if len(ra) != len(rb) or len(sa) != len(sb):
        raise QualityError("paired columns must have equal lengths")
    freq_real = Counter(zip(ra, rb))
    freq_synth = Counter(zip(sa, sb))
    cells = set(freq_real) | set(freq_synth)
    tv = 0.5 * sum(
        abs(freq_real[c] / len(ra) - freq_synth[c] / len(sa)) for c in cells
    )
    return float(1.0 - tv)


def overall_score(column_shapes: float, column_pair_trends: float) -> float:
    """Overall report score: plain mean of the two layer scores."""
    return (column_shapes + column_pair_trends) / 2.0


def _column(records: list[BuildingRecord], name: str) -> list:
    return [r.get(name) for r in records]


def _non_null(values: list) -> list:
    return [v for v in values if v is not None]


def _pair_complete(a: list, b: list) -> tuple[list, list]:
    kept = [(x, y) for x, y in zip(a, b) if x is not None and y is not None]
    if not kept:
        return [], []
    xs, ys = zip(*kept)
    return list(xs), list(ys)


def quality_report(
    real: list[BuildingRecord],
    synth: list[BuildingRecord],
    schema: DatasetSchema,
    exclude_labels: bool = False,
) -> dict:
    """Full fidelity report over the schema's modeled columns.

    Label columns are scored by default since the generator must reproduce
    them too; pass ``exclude_labels=True`` to score features only.  Nulls are
    dropped per column for shapes and pairwise for trends.
    """
    if len(real) < 2 or len(synth) < 2:
        raise QualityError("need at least 2 records per table")
    columns = schema.feature_columns() if exclude_labels else schema.modeled_columns()
    if len(columns) < 2:
        raise QualityError("need at least 2 columns to score pair trends")

    per_column = []
    for col in columns:
        real_vals = _non_null(_column(real, col.name))
        synth_vals = _non_null(_column(synth, col.name))
        if not real_vals or not synth_vals:
            raise QualityError(f"column {col.name!r} is empty after dropping nulls")
        if col.kind == "numerical":
            score = ks_complement(real_vals, synth_vals)
            metric = "ks_complement"
        else:
            score = tv_complement(real_vals, synth_vals)
            metric = "tv_complement"
        per_column.append({"column": col.name, "metric": metric, "score": score})

    per_pair = []
    for a, b in combinations(columns, 2):
        real_a, real_b = _pair_complete(_column(real, a.name), _column(real, b.name))
        synth_a, synth_b = _pair_complete(_column(synth, a.name), _column(synth, b.name))
        if not real_a or not synth_a:
            raise QualityError(f"pair ({a.name!r}, {b.name!r}) has no complete rows")
        if a.kind == "numerical" and b.kind == "numerical":
            score = correlation_similarity(real_a, real_b, synth_a, synth_b)
            metric = "correlation_similarity"
        else:
            score = contingency_similarity(real_a, real_b, synth_a, synth_b)
            metric = "contingency_similarity"
        per_pair.append({"columns": [a.name, b.name], "metric": metric, "score": score})

    shapes = float(np.mean([c["score"] for c in per_column]))
    trends = float(np.mean([p["score"] for p in per_pair]))
    return {
        "overall": overall_score(shapes, trends),
        "column_shapes": {"score": shapes, "per_column": per_column},
        "column_pair_trends": {"score": trends, "per_pair": per_pair},
    }


def diagnostic_report(
    real: list[BuildingRecord],
    synth: list[BuildingRecord],
    schema: DatasetSchema,
) -> dict:
    """Hard structural checks a usable synthetic table must pass."""
    columns = schema.modeled_columns()

    missing = sorted(
        {c.name for c in columns for r in synth if c.name not in r.values}
    )
    presence = {"check": "column_presence", "passed": not missing, "details": {"missing": missing}}

    kind_violations: dict[str, int] = {}
    for col in columns:
        bad = 0
        for r in synth:
            v = r.get(col.name)
            if v is None:
                bad += 1
            elif col.kind == "numerical" and (isinstance(v, bool) or not isinstance(v, (int, float))):
                bad += 1
            elif col.kind == "boolean" and not isinstance(v, bool):
                bad += 1
            elif col.kind == "categorical" and not isinstance(v, str):
                bad += 1
        if bad:
            kind_violations[col.name] = bad
    kinds = {
        "check": "value_kinds",
        "passed": not kind_violations,
        "details": {"violations": kind_violations},
    }

    novel: dict[str, list] = {}
    for col in columns:
        if col.kind != "categorical":
            continue
        seen = set(_non_null(_column(real, col.name)))
        extras = sorted(set(_non_null(_column(synth, col.name))) - seen)
        if extras:
            novel[col.name] = extras
    coverage = {
        "check": "category_coverage",
        "passed": not novel,
        "details": {"novel_categories": novel},
    }

    out_of_range: dict[str, dict] = {}
    for col in columns:
        if col.kind != "numerical":
            continue
        real_vals = _non_null(_column(real, col.name))
        synth_vals = [
            v for v in _non_null(_column(synth, col.name))
            if isinstance(v, (int, float)) and not isinstance(v, bool)
        ]
        if not real_vals or not synth_vals:
            continue
        lo, hi = min(real_vals), max(real_vals)
        n_bad = sum(1 for v in synth_vals if v < lo or v > hi)
        if n_bad:
            out_of_range[col.name] = {"count": n_bad, "real_min": lo, "real_max": hi}
    ranges = {
        "check": "numerical_ranges",
        "passed": not out_of_range,
        "details": {"out_of_range": out_of_range},
    }

    checks = [presence, kinds, coverage, ranges]
    return {"passed": all(c["passed"] for c in checks), "checks": checks}
