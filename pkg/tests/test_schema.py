"""Schema, CSV ingestion, null handling, z-score flags, and splits."""

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from retrokit.schema import (
    BuildingRecord,
    ColumnSpec,
    DataError,
    DatasetSchema,
    SchemaError,
    SplitSpec,
    drop_nulls,
    load_dataset,
    load_schema,
    parse_cell,
    save_schema,
    split,
    zscore_flags,
)

LABEL_COLS = [
    ColumnSpec("windows", "boolean", "label"),
    ColumnSpec("facade", "boolean", "label"),
    ColumnSpec("roof", "boolean", "label"),
    ColumnSpec("heating", "boolean", "label"),
]


def small_schema() -> DatasetSchema:
    return DatasetSchema(
        id="toy",
        version=1,
        columns=(
            ColumnSpec("area", "numerical", "feature", unit="m2"),
            ColumnSpec("region", "categorical", "feature"),
            ColumnSpec("mansard", "boolean", "feature"),
            ColumnSpec("note", "categorical", "ignored"),
            *LABEL_COLS,
        ),
    )


def numeric_records(values) -> list[BuildingRecord]:
    return [
        BuildingRecord(
            {
                "area": v,
                "region": "r",
                "mansard": False,
                "note": None,
                "windows": True,
                "facade": False,
                "roof": False,
                "heating": False,
            }
        )
        for v in values
    ]


class TestSchema:
    def test_roundtrip_json(self, tmp_path):
        schema = small_schema()
        path = tmp_path / "schema.json"
        save_schema(schema, path)
        assert load_schema(path) == schema

    def test_fingerprint_stable_and_sensitive(self):
        a = small_schema()
        b = small_schema()
        assert a.fingerprint() == b.fingerprint()
        c = DatasetSchema(id="toy", version=2, columns=a.columns)
        assert c.fingerprint() != a.fingerprint()

    def test_duplicate_names_rejected(self):
        with pytest.raises(SchemaError, match="duplicate"):
            DatasetSchema(
                id="bad",
                version=1,
                columns=(
                    ColumnSpec("x", "numerical"),
                    ColumnSpec("x", "categorical"),
                    *LABEL_COLS,
                ),
            )

    def test_exactly_four_labels_required(self):
        with pytest.raises(SchemaError, match="label"):
            DatasetSchema(
                id="bad",
                version=1,
                columns=(ColumnSpec("x", "numerical"), *LABEL_COLS[:3]),
            )

    def test_unknown_kind_and_role(self):
        with pytest.raises(SchemaError):
            ColumnSpec("x", "text")
        with pytest.raises(SchemaError):
            ColumnSpec("x", "numerical", role="target")

    def test_column_lookup(self):
        schema = small_schema()
        assert schema.column("area").unit == "m2"
        with pytest.raises(SchemaError):
            schema.column("nope")
        assert [c.name for c in schema.label_columns()] == [
            "windows",
            "facade",
            "roof",
            "heating",
        ]
        assert "note" not in [c.name for c in schema.modeled_columns()]


class TestParseCell:
    def test_empty_is_null(self):
        assert parse_cell("", "numerical") is None
        assert parse_cell("  ", "categorical") is None

    def test_numerical(self):
        assert parse_cell("3.5", "numerical") == 3.5
        assert parse_cell(" 120 ", "numerical") == 120.0
        with pytest.raises(ValueError):
            parse_cell("abc", "numerical")
        with pytest.raises(ValueError):
            parse_cell("nan", "numerical")

    def test_boolean(self):
        assert parse_cell("TRUE", "boolean") is True
        assert parse_cell("no", "boolean") is False
        assert parse_cell("1", "boolean") is True
        with pytest.raises(ValueError):
            parse_cell("maybe", "boolean")

    def test_categorical_keeps_text(self):
        assert parse_cell(" Riga ", "categorical") == "Riga"


class TestLoadDataset:
    HEADER = "area,region,mansard,note,windows,facade,roof,heating"

    def write(self, tmp_path, body: str):
        path = tmp_path / "data.csv"
        path.write_text(self.HEADER + "\n" + body)
        return path

    def test_good_file(self, tmp_path):
        path = self.write(tmp_path, "100,Riga,true,x,1,0,0,1\n200,Ogre,false,,0,1,1,0\n")
        result = load_dataset(path, small_schema())
        assert len(result.records) == 2
        assert not result.rejected
        rec = result.records[0]
        assert rec["area"] == 100.0
        assert rec["mansard"] is True
        assert rec["windows"] is True
        assert result.records[1]["note"] is None

    def test_bad_numeric_rejects_row_with_index(self, tmp_path):
        path = self.write(tmp_path, "100,Riga,true,x,1,0,0,1\noops,Ogre,false,,0,1,1,0\n")
        result = load_dataset(path, small_schema())
        assert len(result.records) == 1
        assert len(result.rejected) == 1
        err = result.rejected[0]
        assert err.row_index == 1
        assert err.column == "area"
        report = result.report()
        assert report["n_rejected"] == 1
        assert report["rejected"][0]["row_index"] == 1

    def test_short_row_rejected(self, tmp_path):
        path = self.write(tmp_path, "100,Riga,true\n")
        result = load_dataset(path, small_schema())
        assert not result.records
        assert result.rejected[0].row_index == 0

    def test_header_mismatch(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("area,region\n1,Riga\n")
        with pytest.raises(SchemaError, match="missing"):
            load_dataset(path, small_schema())

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_dataset(tmp_path / "absent.csv", small_schema())

    def test_header_only_warns(self, tmp_path):
        path = self.write(tmp_path, "")
        result = load_dataset(path, small_schema())
        assert not result.records
        assert result.warnings

    def test_header_order_free(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("region,area,mansard,note,heating,roof,facade,windows\nRiga,100,true,x,1,0,0,1\n")
        result = load_dataset(path, small_schema())
        assert result.records[0]["area"] == 100.0
        assert result.records[0]["windows"] is True


class TestDropNulls:
    def test_counts_per_column(self):
        recs = numeric_records([1, 2, 3])
        recs[0].values["area"] = None
        recs[2].values["region"] = None
        recs[2].values["area"] = None
        kept, report = drop_nulls(recs, ["area", "region"], small_schema())
        assert len(kept) == 1
        assert report == {"area": 2, "region": 1}

    def test_no_nulls_empty_report(self):
        recs = numeric_records([1, 2])
        kept, report = drop_nulls(recs, ["area"], small_schema())
        assert len(kept) == 2
        assert report == {}

    def test_rejects_unknown_or_ignored_columns(self):
        recs = numeric_records([1])
        with pytest.raises(SchemaError):
            drop_nulls(recs, ["nope"], small_schema())
        with pytest.raises(SchemaError):
            drop_nulls(recs, ["note"], small_schema())


class TestZScoreFlags:
    def test_oracle_values(self):
        # mean 2.8, population std 3.6; |z| of the 10 is exactly 2.0
        recs = numeric_records([1, 1, 1, 1, 10])
        assert zscore_flags(recs, "area", small_schema(), threshold=1.5) == [4]
        assert zscore_flags(recs, "area", small_schema(), threshold=2.5) == []
        # strict comparison: z == threshold is not flagged
        assert zscore_flags(recs, "area", small_schema(), threshold=2.0) == []

    def test_constant_column_no_flags(self):
        recs = numeric_records([5, 5, 5, 5])
        assert zscore_flags(recs, "area", small_schema()) == []

    def test_non_numerical_rejected(self):
        recs = numeric_records([1, 2])
        with pytest.raises(SchemaError):
            zscore_flags(recs, "region", small_schema())

    def test_nulls_ignored_not_flagged(self):
        recs = numeric_records([1, 1, 1, 1, 10, None])
        recs[5].values["area"] = None
        flags = zscore_flags(recs, "area", small_schema(), threshold=1.5)
        assert flags == [4]

    def test_too_few_records(self):
        with pytest.raises(DataError):
            zscore_flags(numeric_records([1]), "area", small_schema())


class TestSplit:
    def test_sizes_oracle(self):
        # N=160: test=round(40)=40, val=round(0.25*120)=30, train=90
        recs = numeric_records(range(160))
        sp = split(recs, SplitSpec(seed=7))
        assert (len(sp.test), len(sp.val), len(sp.train)) == (40, 30, 90)

    def test_deterministic_per_seed(self):
        recs = numeric_records(range(40))
        a = split(recs, SplitSpec(seed=3))
        b = split(recs, SplitSpec(seed=3))
        c = split(recs, SplitSpec(seed=4))
        assert a.test_indices == b.test_indices
        assert a.val_indices == b.val_indices
        assert a.test_indices != c.test_indices

    def test_records_match_indices(self):
        recs = numeric_records(range(20))
        sp = split(recs, SplitSpec(seed=0))
        assert [r["area"] for r in sp.test] == [float(i) for i in sp.test_indices]

    def test_too_small(self):
        with pytest.raises(DataError):
            split(numeric_records(range(7)), SplitSpec(seed=0))

    def test_bad_fractions(self):
        with pytest.raises(ValueError):
            SplitSpec(seed=0, test_fraction=0.0)
        with pytest.raises(ValueError):
            SplitSpec(seed=0, val_fraction_of_rest=1.0)

    @settings(max_examples=60, deadline=None)
    @given(n=st.integers(min_value=8, max_value=300), seed=st.integers(0, 2**31 - 1))
    def test_partition_property(self, n, seed):
        recs = numeric_records(range(n))
        sp = split(recs, SplitSpec(seed=seed))
        all_idx = sorted(sp.train_indices + sp.val_indices + sp.test_indices)
        assert all_idx == list(range(n))
        assert not (set(sp.train_indices) & set(sp.val_indices))
        assert not (set(sp.train_indices) & set(sp.test_indices))
        assert not (set(sp.val_indices) & set(sp.test_indices))
        assert len(sp.test_indices) == round(0.25 * n)
        assert len(sp.val_indices) == round(0.25 * (n - len(sp.test_indices)))


class TestValueMap:
    HEADER = TestLoadDataset.HEADER

    def write(self, tmp_path, body):
        path = tmp_path / "data.csv"
        path.write_text(self.HEADER + "\n" + body)
        return path

    def test_harmonizes_before_parsing(self, tmp_path):
        path = self.write(tmp_path, "Ground,Riga,true,x,1,0,0,1\n2nd,Ogre,false,,0,1,1,0\n")
        result = load_dataset(
            path, small_schema(), value_map={"area": {"Ground": "0", "2nd": "2"}}
        )
        assert not result.rejected
        assert [r["area"] for r in result.records] == [0.0, 2.0]

    def test_unmapped_text_still_rejected(self, tmp_path):
        path = self.write(tmp_path, "Basement,Riga,true,x,1,0,0,1\n")
        result = load_dataset(path, small_schema(), value_map={"area": {"Ground": "0"}})
        assert result.rejected[0].column == "area"

    def test_categorical_relabeling(self, tmp_path):
        path = self.write(tmp_path, "1,RIX,true,x,1,0,0,1\n")
        result = load_dataset(path, small_schema(), value_map={"region": {"RIX": "Riga"}})
        assert result.records[0]["region"] == "Riga"

    def test_unknown_column_in_map_rejected(self, tmp_path):
        path = self.write(tmp_path, "1,Riga,true,x,1,0,0,1\n")
        with pytest.raises(SchemaError, match="unknown columns"):
            load_dataset(path, small_schema(), value_map={"flor": {"a": "b"}})


class TestSaveDataset:
    def test_round_trip_is_exact(self, tmp_path):
        from retrokit.schema import save_dataset

        schema = small_schema()
        records = [
            BuildingRecord(
                {
                    "area": 0.1 + 0.2,
                    "region": "Riga, centre",
                    "mansard": True,
                    "note": None,
                    "windows": True,
                    "facade": False,
                    "roof": False,
                    "heating": True,
                }
            ),
            BuildingRecord(
                {
                    "area": 1e-17,
                    "region": "x\"y",
                    "mansard": False,
                    "note": "kept",
                    "windows": False,
                    "facade": True,
                    "roof": True,
                    "heating": False,
                }
            ),
        ]
        path = save_dataset(records, schema, tmp_path / "out.csv")
        reloaded = load_dataset(path, schema).records
        assert len(reloaded) == 2
        for original, back in zip(records, reloaded):
            assert back.values == original.values
