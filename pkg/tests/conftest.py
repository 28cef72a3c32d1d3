import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from riskforest import FeatureSchema, FeatureSpec, SentinelRule, hart_schema


@pytest.fixture(scope="session")
def schema():
    return hart_schema()


@pytest.fixture(scope="session")
def small_schema():
    """Three mixed-kind features over two labels; handy for oracle tests."""
    return FeatureSchema(
        specs=(
            FeatureSpec("score", "numeric"),
            FeatureSpec("priors", "count"),
            FeatureSpec("area", "categorical",
                        categories=("N", "S", "E", "OTHER")),
        ),
        label_set=("High", "Low"),
    )


@pytest.fixture(scope="session")
def tri_schema():
    """Mixed kinds, three labels, includes a years-since sentinel column."""
    return FeatureSchema(
        specs=(
            FeatureSpec("age", "numeric"),
            FeatureSpec("priors", "count"),
            FeatureSpec("recent", "years-since",
                        sentinel=SentinelRule(code=100.0, null_allowed=True)),
            FeatureSpec("flag", "binary"),
            FeatureSpec("area", "categorical",
                        categories=("N", "S", "E", "W", "OTHER")),
        ),
        label_set=("High", "Moderate", "Low"),
    )
