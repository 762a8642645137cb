"""Dataset schemas, CSV ingestion, null/outlier handling, and reproducible splits.

A :class:`DatasetSchema` is the single source of truth for column names, kinds,
and roles.  Everything downstream (encoders, the classifier, the tabular
generator, the quality reports) is keyed by it.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

COLUMN_KINDS = ("numerical", "categorical", "boolean")
COLUMN_ROLES = ("feature", "label", "ignored")

#: The model always predicts this many retrofit categories.
N_LABELS = 4

#: A parsed cell: numbers for numerical columns, strings for categorical,
#: bools for boolean, None for missing.
Cell = float | str | bool | None


class SchemaError(ValueError):
    """Schema definition or schema/data mismatch."""


class DataError(ValueError):
    """Unrecoverable problem with an input data file."""


@dataclass(frozen=True)
class ColumnSpec:
    """One column: its name, value kind, and pipeline role."""

    name: str
    kind: str
    role: str = "feature"
    unit: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in COLUMN_KINDS:
            raise SchemaError(f"unknown column kind {self.kind!r} for {self.name!r}")
        if self.role not in COLUMN_ROLES:
            raise SchemaError(f"unknown column role {self.role!r} for {self.name!r}")


@dataclass(frozen=True)
class DatasetSchema:
    """Ordered column specification with an identity and a version counter.

    Invariants: column names are unique and exactly four columns carry the
    ``label`` role (the four retrofit categories).  Bump ``version`` on any
    change so artifacts can detect drift.
    """

    id: str
    version: int
    columns: tuple[ColumnSpec, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "columns", tuple(self.columns))
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise SchemaError(f"duplicate column names: {dupes}")
        n_labels = len(self.label_columns())
        if n_labels != N_LABELS:
            raise SchemaError(f"schema must define exactly {N_LABELS} label columns, got {n_labels}")
        if self.version < 0:
            raise SchemaError("schema version must be non-negative")

    def column(self, name: str) -> ColumnSpec:
        for c in self.columns:
            if c.name == name:
                return c
        raise SchemaError(f"no column named {name!r} in schema {self.id!r}")

    def feature_columns(self) -> list[ColumnSpec]:
        return [c for c in self.columns if c.role == "feature"]

    def label_columns(self) -> list[ColumnSpec]:
        return [c for c in self.columns if c.role == "label"]

    def modeled_columns(self) -> list[ColumnSpec]:
        """Feature and label columns, in schema order (ignored columns excluded)."""
        return [c for c in self.columns if c.role != "ignored"]

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "version": self.version,
            "columns": [
                {"name": c.name, "kind": c.kind, "role": c.role, "unit": c.unit}
                for c in self.columns
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DatasetSchema":
        cols = tuple(
            ColumnSpec(
                name=c["name"],
                kind=c["kind"],
                role=c.get("role", "feature"),
                unit=c.get("unit"),
            )
            for c in d["columns"]
        )
        return cls(id=d["id"], version=int(d["version"]), columns=cols)

    def fingerprint(self) -> str:
        """Stable content hash; artifacts store it and check it on load."""
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def load_schema(path: str | Path) -> DatasetSchema:
    with open(path, encoding="utf-8") as fh:
        return DatasetSchema.from_dict(json.load(fh))


def save_schema(schema: DatasetSchema, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(schema.to_dict(), fh, indent=2)
        fh.write("\n")


@dataclass
class BuildingRecord:
    """One dwelling's cell values, keyed by schema column name."""

    values: dict[str, Cell]

    def __getitem__(self, name: str) -> Cell:
        return self.values[name]

    def get(self, name: str, default: Cell = None) -> Cell:
        return self.values.get(name, default)


@dataclass(frozen=True)
class RowError:
    row_index: int
    column: str
    message: str


@dataclass
class LoadResult:
    """Parsed records plus a row-level rejection report."""

    records: list[BuildingRecord]
    rejected: list[RowError] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def report(self) -> dict:
        return {
            "n_loaded": len(self.records),
            "n_rejected": len(self.rejected),
            "rejected": [
                {"row_index": e.row_index, "column": e.column, "message": e.message}
                for e in self.rejected
            ],
            "warnings": list(self.warnings),
        }


_TRUE_TOKENS = {"true", "t", "yes", "y", "1"}
_FALSE_TOKENS = {"false", "f", "no", "n", "0"}


def parse_cell(text: str, kind: str) -> Cell:
    """Parse one CSV cell for a column kind; raises ValueError on mismatch.

    Empty text is a null regardless of kind.
    """
    text = text.strip()
    if text == "":
        return None
    if kind == "numerical":
        value = float(text)  # ValueError propagates
        if not np.isfinite(value):
            raise ValueError(f"non-finite numerical value {text!r}")
        return value
    if kind == "boolean":
        lowered = text.lower()
        if lowered in _TRUE_TOKENS:
            return True
        if lowered in _FALSE_TOKENS:
            return False
        raise ValueError(f"cannot parse {text!r} as boolean")
    return text


def load_dataset(
    path: str | Path,
    schema: DatasetSchema,
    value_map: dict[str, dict[str, str]] | None = None,
) -> LoadResult:
    """Load a CSV file against a schema.

    The header must contain exactly the schema's column names (any order).
    Rows with unparseable cells are rejected, not fixed; each rejection names
    the 0-based data row index and offending column.  A header-only file
    yields zero records and a warning.

    ``value_map`` harmonizes raw cell text before parsing: per column, a
    mapping from source text to replacement text (e.g. a floor label to its
    integer).  Cells not in the mapping pass through untouched.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"dataset file not found: {path}")
    if value_map:
        known = {c.name for c in schema.columns}
        bad = sorted(set(value_map) - known)
        if bad:
            raise SchemaError(f"value map names unknown columns: {bad}")

    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file, expected a header row") from None

        header = [h.strip() for h in header]
        expected = {c.name for c in schema.columns}
        got = set(header)
        if got != expected:
            missing = sorted(expected - got)
            extra = sorted(got - expected)
            raise SchemaError(
                f"{path}: header does not match schema {schema.id!r}"
                f" (missing {missing}, unexpected {extra})"
            )
        if len(header) != len(set(header)):
            raise SchemaError(f"{path}: duplicate header columns")

        kind_by_name = {c.name: c.kind for c in schema.columns}
        result = LoadResult(records=[])
        for row_index, raw in enumerate(reader):
            if len(raw) != len(header):
                result.rejected.append(
                    RowError(row_index, "", f"expected {len(header)} cells, got {len(raw)}")
                )
                continue
            values: dict[str, Cell] = {}
            error: RowError | None = None
            for name, text in zip(header, raw):
                if value_map and name in value_map:
                    text = value_map[name].get(text.strip(), text)
                try:
                    values[name] = parse_cell(text, kind_by_name[name])
                except ValueError as exc:
                    error = RowError(row_index, name, str(exc))
                    break
            if error is not None:
                result.rejected.append(error)
            else:
                result.records.append(BuildingRecord(values))

    if not result.records and not result.rejected:
        result.warnings.append(f"{path}: no data rows (header only)")
    return result


def _format_cell(value: Cell) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):  # bool is an int subclass; test it first
        return "true" if value else "false"
    if isinstance(value, (int, float, np.floating, np.integer)):
        return repr(float(value))
    return str(value)


def save_dataset(
    records: list[BuildingRecord], schema: DatasetSchema, path: str | Path
) -> Path:
    """Write records as CSV in schema column order; inverse of load_dataset.

    Floats are written with repr so numerical cells round-trip exactly;
    nulls become empty cells.
    """
    path = Path(path)
    names = [c.name for c in schema.columns]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        for rec in records:
            writer.writerow([_format_cell(rec.get(name)) for name in names])
    return path


def drop_nulls(
    records: list[BuildingRecord],
    required_columns: list[str],
    schema: DatasetSchema,
) -> tuple[list[BuildingRecord], dict[str, int]]:
    """Drop records with a null in any required column.

    Returns the kept records and a per-column count of drops; columns that
    caused no drops are omitted from the report.
    """
    allowed = {c.name for c in schema.modeled_columns()}
    bad = [c for c in required_columns if c not in allowed]
    if bad:
        raise SchemaError(f"required columns not feature/label columns: {bad}")

    kept: list[BuildingRecord] = []
    report: dict[str, int] = {}
    for rec in records:
        null_cols = [c for c in required_columns if rec.get(c) is None]
        if null_cols:
            for c in null_cols:
                report[c] = report.get(c, 0) + 1
        else:
            kept.append(rec)
    return kept, report


def zscore_flags(
    records: list[BuildingRecord],
    column: str,
    schema: DatasetSchema,
    threshold: float = 4.0,
) -> list[int]:
    """Flag record indices whose |z| exceeds the threshold in one column.

    Uses the population standard deviation and a strict comparison.  Flags are
    advisory: nothing is removed here, a human decides (outlier removal is a
    CLI option).  A constant column yields no flags.
    """
    if schema.column(column).kind != "numerical":
        raise SchemaError(f"z-score requires a numerical column, {column!r} is not")
    if len(records) < 2:
        raise DataError("z-score needs at least 2 records")

    values = np.array([np.nan if rec.get(column) is None else float(rec[column]) for rec in records])
    present = np.isfinite(values)
    if present.sum() < 2:
        return []
    mean = values[present].mean()
    std = values[present].std()  # population std (ddof=0)
    if std == 0.0:
        return []
    z = np.abs(values - mean) / std
    return [i for i in range(len(records)) if present[i] and z[i] > threshold]


@dataclass(frozen=True)
class SplitSpec:
    """Seeded three-way split: test first, then train/val from the remainder."""

    seed: int
    test_fraction: float = 0.25
    val_fraction_of_rest: float = 0.25

    def __post_init__(self) -> None:
        for name, frac in (
            ("test_fraction", self.test_fraction),
            ("val_fraction_of_rest", self.val_fraction_of_rest),
        ):
            if not 0.0 < frac < 1.0:
                raise ValueError(f"{name} must be in (0, 1), got {frac}")


@dataclass
class Split:
    """Record partition plus the index sets that produced it."""

    train: list[BuildingRecord]
    val: list[BuildingRecord]
    test: list[BuildingRecord]
    train_indices: list[int]
    val_indices: list[int]
    test_indices: list[int]


def split(records: list[BuildingRecord], spec: SplitSpec) -> Split:
    """Partition records into train/val/test, deterministically per seed.

    Sizes: ``|test| = round(test_fraction * N)`` and
    ``|val| = round(val_fraction_of_rest * (N - |test|))``; the remainder
    trains.  The three index sets are disjoint and exhaustive.
    """
    n = len(records)
    if n < 8:
        raise DataError(f"need at least 8 records to split, got {n}")

    rng = np.random.default_rng(spec.seed)
    perm = rng.permutation(n)
    n_test = round(spec.test_fraction * n)
    n_val = round(spec.val_fraction_of_rest * (n - n_test))

    test_idx = sorted(int(i) for i in perm[:n_test])
    val_idx = sorted(int(i) for i in perm[n_test : n_test + n_val])
    train_idx = sorted(int(i) for i in perm[n_test + n_val :])

    return Split(
        train=[records[i] for i in train_idx],
        val=[records[i] for i in val_idx],
        test=[records[i] for i in test_idx],
        train_indices=train_idx,
        val_indices=val_idx,
        test_indices=test_idx,
    )
