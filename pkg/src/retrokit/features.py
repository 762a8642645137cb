"""Feature encoding for the classifier: records in, scaled float matrix out.

Encoding rules, fitted on training data only:

* numerical columns pass through;
* boolean columns map to 0/1;
* categorical columns whose observed values are all energy classes use the
  fixed ordinal scale A+ < A < ... < F (codes 0..6), so "better class" is
  monotone in the code;
* other categorical columns get integer codes in first-appearance order;
* every column is then min-max scaled to [0, 1] using training min/max, and
  a column that was constant in training encodes to 0.0.

Optionally a derived column is appended: the energy consumption headroom
between two class columns at the building's area (see :mod:`retrokit.energy`).
At inference, values outside the training range are clamped into [0, 1] with
a warning, and categories never seen in training are a hard error.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .energy import ENERGY_CLASS_CODES, EnergyClassTable, default_energy_table
from .schema import BuildingRecord, DatasetSchema, SchemaError


class EncodingError(ValueError):
    """Record or request payload cannot be encoded."""


class MissingFeatureError(EncodingError):
    def __init__(self, column: str):
        self.column = column
        super().__init__(f"missing required feature {column!r}")


class UnknownFeatureError(EncodingError):
    def __init__(self, column: str):
        self.column = column
        super().__init__(f"unknown feature {column!r}")


class UnseenCategoryError(EncodingError):
    def __init__(self, column: str, value: str):
        self.column = column
        self.value = value
        super().__init__(f"unseen category {value!r} in feature {column!r}")


@dataclass(frozen=True)
class DeltaSpec:
    """Derived feature: class-limit delta between two energy class columns."""

    initial_col: str
    final_col: str
    area_col: str
    name: str = "energy_class_delta"


def _is_energy_class_values(observed: set) -> bool:
    return bool(observed) and observed <= set(ENERGY_CLASS_CODES)


class FeatureEncoder:
    """Fitted, serializable mapping from records to the model's input space."""

    def __init__(
        self,
        schema: DatasetSchema,
        delta: DeltaSpec | None = None,
        energy_table: EnergyClassTable | None = None,
    ):
        self.schema = schema
        self.delta = delta
        self.energy_table = energy_table or default_energy_table()
        self._columns = [c for c in schema.feature_columns()]
        if delta is not None:
            self._validate_delta(delta)
        # fitted state
        self._mappings: dict[str, dict[str, int]] = {}
        self._mins: np.ndarray | None = None
        self._maxs: np.ndarray | None = None

    def _validate_delta(self, delta: DeltaSpec) -> None:
        for col, kind in (
            (delta.initial_col, "categorical"),
            (delta.final_col, "categorical"),
            (delta.area_col, "numerical"),
        ):
            spec = self.schema.column(col)
            if spec.kind != kind:
                raise SchemaError(f"delta column {col!r} must be {kind}, is {spec.kind}")
        if delta.name in {c.name for c in self.schema.columns}:
            raise SchemaError(f"delta feature name {delta.name!r} collides with a schema column")

    @property
    def fitted(self) -> bool:
        return self._mins is not None

    @property
    def feature_names(self) -> list[str]:
        names = [c.name for c in self._columns]
        if self.delta is not None:
            names.append(self.delta.name)
        return names

    @property
    def n_features(self) -> int:
        return len(self._columns) + (1 if self.delta is not None else 0)

    def fit(self, records: list[BuildingRecord]) -> "FeatureEncoder":
        if not records:
            raise EncodingError("cannot fit an encoder on zero records")
        self._mappings = {}
        for col in self._columns:
            if col.kind != "categorical":
                continue
            observed = {r.get(col.name) for r in records} - {None}
            if _is_energy_class_values(observed):
                self._mappings[col.name] = dict(ENERGY_CLASS_CODES)
            else:
                mapping: dict[str, int] = {}
                for r in records:
                    v = r.get(col.name)
                    if v is not None and v not in mapping:
                        mapping[v] = len(mapping)
                self._mappings[col.name] = mapping
        raw = self._encode_raw(records)
        self._mins = raw.min(axis=0)
        self._maxs = raw.max(axis=0)
        return self

    def _encode_cell(self, col_name: str, kind: str, value, where: str) -> float:
        if value is None:
            raise EncodingError(f"null value in feature {col_name!r} ({where})")
        if kind == "numerical":
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise EncodingError(f"feature {col_name!r} expects a number ({where})")
            if not math.isfinite(value):
                raise EncodingError(f"feature {col_name!r} is not finite ({where})")
            return float(value)
        if kind == "boolean":
            if not isinstance(value, bool):
                raise EncodingError(f"feature {col_name!r} expects a boolean ({where})")
            return 1.0 if value else 0.0
        # categorical
        if not isinstance(value, str):
            raise EncodingError(f"feature {col_name!r} expects a string category ({where})")
        mapping = self._mappings[col_name]
        if value not in mapping:
            raise UnseenCategoryError(col_name, value)
        return float(mapping[value])

    def _delta_value(self, initial, final, area, where: str) -> float:
        spec = self.delta
        assert spec is not None
        for col, v in ((spec.initial_col, initial), (spec.final_col, final), (spec.area_col, area)):
            if v is None:
                raise EncodingError(f"null value in feature {col!r} ({where})")
        if not isinstance(initial, str) or not isinstance(final, str):
            raise EncodingError(f"delta class columns expect strings ({where})")
        if initial not in ENERGY_CLASS_CODES:
            raise UnseenCategoryError(spec.initial_col, initial)
        if final not in ENERGY_CLASS_CODES:
            raise UnseenCategoryError(spec.final_col, final)
        return self.energy_table.class_delta(initial, final, float(area))

    def _encode_raw(self, records: list[BuildingRecord]) -> np.ndarray:
        out = np.empty((len(records), self.n_features), dtype=np.float64)
        for i, rec in enumerate(records):
            where = f"record {i}"
            for j, col in enumerate(self._columns):
                out[i, j] = self._encode_cell(col.name, col.kind, rec.get(col.name), where)
            if self.delta is not None:
                out[i, -1] = self._delta_value(
                    rec.get(self.delta.initial_col),
                    rec.get(self.delta.final_col),
                    rec.get(self.delta.area_col),
                    where,
                )
        return out

    def _scale(self, raw: np.ndarray, warn_clamp: bool) -> np.ndarray:
        if not self.fitted:
            raise EncodingError("encoder is not fitted")
        mins, maxs = self._mins, self._maxs
        span = maxs - mins
        constant = span == 0.0
        safe_span = np.where(constant, 1.0, span)
        scaled = (raw - mins) / safe_span
        scaled[:, constant] = 0.0
        out_of_range = (scaled < 0.0) | (scaled > 1.0)
        if out_of_range.any():
            if warn_clamp:
                cols = [self.feature_names[j] for j in np.where(out_of_range.any(axis=0))[0]]
                warnings.warn(
                    f"values outside the training range clamped to [0, 1] in: {cols}",
                    RuntimeWarning,
                    stacklevel=3,
                )
            scaled = np.clip(scaled, 0.0, 1.0)
        return scaled

    def transform(self, records: list[BuildingRecord], warn_clamp: bool = True) -> np.ndarray:
        """Encode and scale a batch of records into an (N, n_features) matrix."""
        return self._scale(self._encode_raw(records), warn_clamp)

    def transform_dict(self, features: dict) -> np.ndarray:
        """Encode one request payload (feature name -> value) into a vector.

        Strict about its keys: every feature is required (the derived delta
        column, if any, is computed, never supplied) and unknown names are
        rejected so typos do not silently become defaults.
        """
        expected = {c.name for c in self._columns}
        for name in features:
            if name not in expected:
                raise UnknownFeatureError(name)
        for name in sorted(expected):
            if name not in features:
                raise MissingFeatureError(name)

        raw = np.empty((1, self.n_features), dtype=np.float64)
        for j, col in enumerate(self._columns):
            raw[0, j] = self._encode_cell(col.name, col.kind, features[col.name], "request")
        if self.delta is not None:
            area = features[self.delta.area_col]
            if isinstance(area, bool) or not isinstance(area, (int, float)):
                raise EncodingError(f"feature {self.delta.area_col!r} expects a number (request)")
            raw[0, -1] = self._delta_value(
                features[self.delta.initial_col],
                features[self.delta.final_col],
                area,
                "request",
            )
        return self._scale(raw, warn_clamp=True)[0]

    def labels(self, records: list[BuildingRecord]) -> np.ndarray:
        """Extract the four retrofit flags as an (N, 4) float 0/1 matrix."""
        cols = self.schema.label_columns()
        out = np.empty((len(records), len(cols)), dtype=np.float64)
        for i, rec in enumerate(records):
            for j, col in enumerate(cols):
                v = rec.get(col.name)
                if isinstance(v, bool):
                    out[i, j] = 1.0 if v else 0.0
                elif isinstance(v, (int, float)) and float(v) in (0.0, 1.0):
                    out[i, j] = float(v)
                else:
                    raise EncodingError(
                        f"label {col.name!r} must be boolean or 0/1, got {v!r} (record {i})"
                    )
        return out

    @property
    def label_names(self) -> list[str]:
        return [c.name for c in self.schema.label_columns()]

    def describe(self) -> list[dict]:
        """Input-control metadata per request feature.

        Categoricals list their known categories in code order (requests with
        anything else are rejected); numericals carry the observed raw range
        so a client can hint plausible values.  The derived delta column is
        omitted: it is computed, never supplied.
        """
        if not self.fitted:
            raise EncodingError("encoder is not fitted")
        out = []
        for j, col in enumerate(self._columns):
            info: dict = {"name": col.name, "kind": col.kind}
            if col.unit is not None:
                info["unit"] = col.unit
            if col.kind == "categorical":
                mapping = self._mappings[col.name]
                info["categories"] = sorted(mapping, key=mapping.get)
            elif col.kind == "numerical":
                info["range"] = [float(self._mins[j]), float(self._maxs[j])]
            out.append(info)
        return out

    def to_dict(self) -> dict:
        if not self.fitted:
            raise EncodingError("cannot serialize an unfitted encoder")
        return {
            "columns": [
                {"name": c.name, "kind": c.kind, "mapping": self._mappings.get(c.name)}
                for c in self._columns
            ],
            "delta": None
            if self.delta is None
            else {
                "initial_col": self.delta.initial_col,
                "final_col": self.delta.final_col,
                "area_col": self.delta.area_col,
                "name": self.delta.name,
            },
            "mins": [float(v) for v in self._mins],
            "maxs": [float(v) for v in self._maxs],
        }

    @classmethod
    def from_dict(
        cls,
        schema: DatasetSchema,
        d: dict,
        energy_table: EnergyClassTable | None = None,
    ) -> "FeatureEncoder":
        delta = None if d.get("delta") is None else DeltaSpec(**d["delta"])
        enc = cls(schema, delta=delta, energy_table=energy_table)
        stored = [c["name"] for c in d["columns"]]
        expected = [c.name for c in enc._columns]
        if stored != expected:
            raise EncodingError(
                f"encoder state does not match schema: stored {stored}, expected {expected}"
            )
        enc._mappings = {
            c["name"]: {k: int(v) for k, v in c["mapping"].items()}
            for c in d["columns"]
            if c["mapping"] is not None
        }
        enc._mins = np.asarray(d["mins"], dtype=np.float64)
        enc._maxs = np.asarray(d["maxs"], dtype=np.float64)
        if enc._mins.shape != (enc.n_features,) or enc._maxs.shape != (enc.n_features,):
            raise EncodingError("encoder scaler state has the wrong width")
        return enc
