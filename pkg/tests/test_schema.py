import pytest

from riskforest import FeatureSchema, FeatureSpec, SentinelRule, fixture_path, hart_schema
from riskforest.errors import SchemaError


def test_bundled_schema_shape(schema):
    assert schema.n_features == 34
    assert schema.label_set == ("High", "Moderate", "Low")
    kinds = [s.kind for s in schema.specs]
    assert kinds.count("years-since") == 8
    assert kinds.count("categorical") == 2
    assert kinds.count("binary") == 3


def test_bundled_years_since_sentinels(schema):
    for spec in schema.specs:
        if spec.kind == "years-since":
            assert spec.sentinel.code == 100.0
            assert spec.sentinel.null_allowed


def test_postcode_and_mosaic_buckets(schema):
    postcode = schema.specs[schema.spec_index("CustodyPostcodeOutwardTop24")]
    mosaic = schema.specs[schema.spec_index("CustodyMosaicCodeTop28")]
    assert len(postcode.categories) == 25 and postcode.categories[-1] == "OTHER"
    assert len(mosaic.categories) == 29 and mosaic.categories[-1] == "OTHER"


def test_text_round_trip(schema):
    again = FeatureSchema.from_text(schema.to_text())
    assert again == schema
    assert again.fingerprint() == schema.fingerprint()


def test_fixture_matches_builder(schema):
    assert FeatureSchema.load(fixture_path("hart_schema")) == schema


def test_group_attribute_excluded_from_fingerprint(schema):
    assert schema.with_group("Group").fingerprint() == schema.fingerprint()


def test_categorical_requires_single_other_bucket():
    with pytest.raises(SchemaError):
        FeatureSpec("c", "categorical", categories=("A", "B"))
    with pytest.raises(SchemaError):
        FeatureSpec("c", "categorical", categories=("A", "OTHER", "OTHER"))


def test_years_since_requires_sentinel():
    with pytest.raises(SchemaError):
        FeatureSpec("ys", "years-since")
    FeatureSpec("ys", "years-since", sentinel=SentinelRule())


def test_duplicate_names_rejected():
    spec = FeatureSpec("a", "numeric")
    with pytest.raises(SchemaError):
        FeatureSchema(specs=(spec, spec), label_set=("x", "y"))


def test_group_collision_rejected():
    spec = FeatureSpec("a", "numeric")
    with pytest.raises(SchemaError):
        FeatureSchema(specs=(spec,), label_set=("x", "y"), group_attribute="a")
    with pytest.raises(SchemaError):
        FeatureSchema(specs=(spec,), label_set=("x", "y"), group_attribute="label")


def test_single_label_rejected():
    with pytest.raises(SchemaError):
        FeatureSchema(specs=(FeatureSpec("a", "numeric"),), label_set=("x",))


def test_binary_defaults_to_no_yes():
    assert FeatureSpec("b", "binary").categories == ("No", "Yes")
