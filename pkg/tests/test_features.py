"""Feature encoder: category codes, scaling, the derived delta column."""

import numpy as np
import pytest

from retrokit.features import (
    DeltaSpec,
    EncodingError,
    FeatureEncoder,
    MissingFeatureError,
    UnknownFeatureError,
    UnseenCategoryError,
)
from retrokit.schema import BuildingRecord, ColumnSpec, DatasetSchema, SchemaError

LABELS = [
    ColumnSpec("windows", "boolean", "label"),
    ColumnSpec("facade", "boolean", "label"),
    ColumnSpec("roof", "boolean", "label"),
    ColumnSpec("heating", "boolean", "label"),
]

SCHEMA = DatasetSchema(
    id="enc-toy",
    version=1,
    columns=(
        ColumnSpec("area", "numerical"),
        ColumnSpec("region", "categorical"),
        ColumnSpec("class_before", "categorical"),
        ColumnSpec("class_after", "categorical"),
        ColumnSpec("mansard", "boolean"),
        *LABELS,
    ),
)


def rec(area, region, before, after, mansard, labels=(True, False, False, True)):
    return BuildingRecord(
        {
            "area": area,
            "region": region,
            "class_before": before,
            "class_after": after,
            "mansard": mansard,
            "windows": labels[0],
            "facade": labels[1],
            "roof": labels[2],
            "heating": labels[3],
        }
    )


TRAIN = [
    rec(100.0, "Riga", "E", "C", False),
    rec(200.0, "Ogre", "D", "B", True),
    rec(300.0, "Riga", "F", "A", False),
]


class TestFit:
    def test_energy_class_columns_use_fixed_ordinal_scale(self):
        enc = FeatureEncoder(SCHEMA).fit(TRAIN)
        assert enc._mappings["class_before"] == {
            "A+": 0, "A": 1, "B": 2, "C": 3, "D": 4, "E": 5, "F": 6,
        }
        # classes absent from training data still encode (clamped into range)
        with pytest.warns(RuntimeWarning, match="clamped"):
            x = enc.transform([rec(100.0, "Riga", "A+", "A+", False)])
        assert x.shape == (1, 5)

    def test_plain_categorical_first_appearance_order(self):
        enc = FeatureEncoder(SCHEMA).fit(TRAIN)
        assert enc._mappings["region"] == {"Riga": 0, "Ogre": 1}

    def test_empty_fit_rejected(self):
        with pytest.raises(EncodingError):
            FeatureEncoder(SCHEMA).fit([])


class TestTransform:
    def test_scaling_to_unit_interval(self):
        enc = FeatureEncoder(SCHEMA).fit(TRAIN)
        X = enc.transform(TRAIN)
        assert X.shape == (3, 5)
        assert X.min() >= 0.0 and X.max() <= 1.0
        area = X[:, enc.feature_names.index("area")]
        np.testing.assert_allclose(area, [0.0, 0.5, 1.0])
        # class_before trained on {E(5), D(4), F(6)}: min 4, max 6
        cb = X[:, enc.feature_names.index("class_before")]
        np.testing.assert_allclose(cb, [0.5, 0.0, 1.0])

    def test_constant_column_encodes_to_zero(self):
        train = [rec(100.0, "Riga", "E", "C", False), rec(200.0, "Riga", "E", "C", False)]
        enc = FeatureEncoder(SCHEMA).fit(train)
        X = enc.transform(train)
        j = enc.feature_names.index("region")
        assert (X[:, j] == 0.0).all()

    def test_out_of_range_clamps_with_warning(self):
        enc = FeatureEncoder(SCHEMA).fit(TRAIN)
        with pytest.warns(RuntimeWarning, match="clamped"):
            X = enc.transform([rec(999.0, "Riga", "E", "C", False)])
        assert X[0, enc.feature_names.index("area")] == 1.0

    def test_unseen_category_is_an_error(self):
        enc = FeatureEncoder(SCHEMA).fit(TRAIN)
        with pytest.raises(UnseenCategoryError, match="region"):
            enc.transform([rec(100.0, "Valmiera", "E", "C", False)])

    def test_null_feature_is_an_error(self):
        enc = FeatureEncoder(SCHEMA).fit(TRAIN)
        with pytest.raises(EncodingError, match="null"):
            enc.transform([rec(None, "Riga", "E", "C", False)])

    def test_booleans(self):
        enc = FeatureEncoder(SCHEMA).fit(TRAIN)
        X = enc.transform(TRAIN)
        j = enc.feature_names.index("mansard")
        np.testing.assert_allclose(X[:, j], [0.0, 1.0, 0.0])


class TestDeltaFeature:
    def delta_encoder(self):
        spec = DeltaSpec("class_before", "class_after", "area")
        return FeatureEncoder(SCHEMA, delta=spec).fit(TRAIN)

    def test_delta_column_appended_and_scaled(self):
        enc = self.delta_encoder()
        assert enc.feature_names[-1] == "energy_class_delta"
        # raw deltas: E->C @100 = 85, D->B @200 = 65, F->A @300 = 116.25
        raw = enc._encode_raw(TRAIN)[:, -1]
        np.testing.assert_allclose(raw, [85.0, 65.0, 116.25])
        X = enc.transform(TRAIN)
        np.testing.assert_allclose(
            X[:, -1], (raw - raw.min()) / (raw.max() - raw.min())
        )

    def test_delta_validates_column_kinds(self):
        with pytest.raises(SchemaError):
            FeatureEncoder(SCHEMA, delta=DeltaSpec("area", "class_after", "area"))
        with pytest.raises(SchemaError):
            FeatureEncoder(SCHEMA, delta=DeltaSpec("class_before", "class_after", "region"))

    def test_delta_name_collision(self):
        with pytest.raises(SchemaError):
            FeatureEncoder(
                SCHEMA, delta=DeltaSpec("class_before", "class_after", "area", name="area")
            )

    def test_delta_requires_real_energy_classes(self):
        enc = self.delta_encoder()
        with pytest.raises(UnseenCategoryError):
            enc.transform([rec(100.0, "Riga", "X", "C", False)])


class TestTransformDict:
    # chosen so the derived delta (E->B at 150 m2 = 85) sits inside the
    # training range and no clamp warning fires
    PAYLOAD = {
        "area": 150.0,
        "region": "Riga",
        "class_before": "E",
        "class_after": "B",
        "mansard": True,
    }

    def test_roundtrip_matches_batch(self):
        enc = FeatureEncoder(SCHEMA).fit(TRAIN)
        x = enc.transform_dict(self.PAYLOAD)
        batch = enc.transform([rec(150.0, "Riga", "E", "B", True)])
        np.testing.assert_allclose(x, batch[0])

    def test_missing_feature_named(self):
        enc = FeatureEncoder(SCHEMA).fit(TRAIN)
        payload = dict(self.PAYLOAD)
        del payload["region"]
        with pytest.raises(MissingFeatureError, match="region"):
            enc.transform_dict(payload)

    def test_unknown_feature_named(self):
        enc = FeatureEncoder(SCHEMA).fit(TRAIN)
        with pytest.raises(UnknownFeatureError, match="floor_count"):
            enc.transform_dict(dict(self.PAYLOAD, floor_count=3))

    def test_type_errors(self):
        enc = FeatureEncoder(SCHEMA).fit(TRAIN)
        with pytest.raises(EncodingError, match="number"):
            enc.transform_dict(dict(self.PAYLOAD, area="big"))
        with pytest.raises(EncodingError, match="boolean"):
            enc.transform_dict(dict(self.PAYLOAD, mansard="yes"))
        with pytest.raises(EncodingError, match="category"):
            enc.transform_dict(dict(self.PAYLOAD, region=7))

    def test_delta_is_computed_not_supplied(self):
        enc = FeatureEncoder(SCHEMA, delta=DeltaSpec("class_before", "class_after", "area"))
        enc.fit(TRAIN)
        with pytest.raises(UnknownFeatureError):
            enc.transform_dict(dict(self.PAYLOAD, energy_class_delta=85.0))
        x = enc.transform_dict(self.PAYLOAD)
        assert x.shape == (6,)


class TestLabels:
    def test_label_matrix(self):
        enc = FeatureEncoder(SCHEMA)
        Y = enc.labels(TRAIN)
        assert Y.shape == (3, 4)
        np.testing.assert_allclose(Y[0], [1.0, 0.0, 0.0, 1.0])
        assert enc.label_names == ["windows", "facade", "roof", "heating"]

    def test_null_label_rejected(self):
        enc = FeatureEncoder(SCHEMA)
        bad = rec(1.0, "Riga", "E", "C", False, labels=(True, None, False, True))
        with pytest.raises(EncodingError, match="facade"):
            enc.labels([bad])


class TestSerialization:
    def test_roundtrip_preserves_transform(self):
        spec = DeltaSpec("class_before", "class_after", "area")
        enc = FeatureEncoder(SCHEMA, delta=spec).fit(TRAIN)
        restored = FeatureEncoder.from_dict(SCHEMA, enc.to_dict())
        np.testing.assert_array_equal(
            enc.transform(TRAIN), restored.transform(TRAIN)
        )
        np.testing.assert_array_equal(
            enc.transform_dict(TestTransformDict.PAYLOAD),
            restored.transform_dict(TestTransformDict.PAYLOAD),
        )

    def test_unfitted_cannot_serialize(self):
        with pytest.raises(EncodingError):
            FeatureEncoder(SCHEMA).to_dict()

    def test_schema_mismatch_detected(self):
        enc = FeatureEncoder(SCHEMA).fit(TRAIN)
        other = DatasetSchema(
            id="other",
            version=1,
            columns=(ColumnSpec("volume", "numerical"), *LABELS),
        )
        with pytest.raises(EncodingError, match="does not match"):
            FeatureEncoder.from_dict(other, enc.to_dict())


class TestDescribe:
    def test_control_metadata(self):
        enc = FeatureEncoder(SCHEMA).fit(TRAIN)
        info = {d["name"]: d for d in enc.describe()}
        assert list(info) == ["area", "region", "class_before", "class_after", "mansard"]
        assert info["area"]["kind"] == "numerical"
        assert info["area"]["range"] == [100.0, 300.0]
        assert "categories" not in info["area"]
        assert info["region"]["categories"] == ["Riga", "Ogre"]
        # energy-class columns always expose the full ordinal ladder
        assert info["class_before"]["categories"] == ["A+", "A", "B", "C", "D", "E", "F"]
        assert info["mansard"]["kind"] == "boolean"
        assert "range" not in info["mansard"]

    def test_unit_carried_through(self):
        schema = DatasetSchema(
            id="unit-toy",
            version=1,
            columns=(ColumnSpec("area", "numerical", unit="m2"), *LABELS),
        )
        enc = FeatureEncoder(schema).fit(
            [BuildingRecord({"area": 10.0}), BuildingRecord({"area": 20.0})]
        )
        (entry,) = enc.describe()
        assert entry["unit"] == "m2"

    def test_derived_delta_omitted(self):
        enc = FeatureEncoder(
            SCHEMA, delta=DeltaSpec("class_before", "class_after", "area")
        ).fit(TRAIN)
        assert all(d["name"] != enc.delta.name for d in enc.describe())

    def test_unfitted_rejected(self):
        with pytest.raises(EncodingError, match="not fitted"):
            FeatureEncoder(SCHEMA).describe()
