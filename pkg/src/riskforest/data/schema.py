"""Feature schemas for custody-risk tabular data.

A schema is an ordered list of feature specs plus an ordered label set.
It drives CSV parsing, value validation, synthetic generation, and the
kind of split predicate a tree may apply to each column. Labels are
ordered from highest to lowest risk; vote tie-breaking and the
dangerous/cautious error roles rely on that ordering.

Schemas serialize to a small line-oriented text format, one feature per
line, so they stay hand-editable:

    labels: High, Moderate, Low
    group: Ethnicity
    feature: CustodyAge | numeric
    feature: Gender | binary | Male, Female
    feature: PriorCustodyLatestYears | years-since | sentinel=100 null
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace
from importlib import resources

from ..errors import SchemaError

KINDS = ("numeric", "count", "years-since", "categorical", "binary")
NUMERIC_KINDS = frozenset({"numeric", "count", "years-since"})
SUBSET_KINDS = frozenset({"categorical", "binary"})

OTHER = "OTHER"
MISSING_HISTORY_CODE = 100.0
LABEL_COLUMN = "label"

_FORMAT_LINE = "riskforest-schema v1"


@dataclass(frozen=True)
class SentinelRule:
    """Missing-history convention for a years-since column.

    ``code`` is stored as a literal value in the data (100 by default) so
    trees can split on it. When ``null_allowed`` is set, blank or
    null-ish cells are normalized to ``code`` at load time.
    """

    code: float = MISSING_HISTORY_CODE
    null_allowed: bool = False


@dataclass(frozen=True)
class FeatureSpec:
    """One input column: a name, a kind, and kind-specific rules."""

    name: str
    kind: str
    categories: tuple[str, ...] = ()
    sentinel: SentinelRule | None = None

    def __post_init__(self):
        if not self.name or any(c in self.name for c in ",|:\n"):
            raise SchemaError(f"bad feature name: {self.name!r}")
        if self.kind not in KINDS:
            raise SchemaError(f"{self.name}: unknown kind {self.kind!r}")
        object.__setattr__(self, "categories", tuple(self.categories))
        if self.kind == "binary" and not self.categories:
            object.__setattr__(self, "categories", ("No", "Yes"))
        if self.kind == "categorical":
            if len(self.categories) < 2:
                raise SchemaError(f"{self.name}: categorical needs >= 2 categories")
            if self.categories.count(OTHER) != 1:
                raise SchemaError(
                    f"{self.name}: categorical needs exactly one {OTHER} bucket"
                )
        elif self.kind == "binary":
            if len(self.categories) != 2:
                raise SchemaError(f"{self.name}: binary needs exactly 2 categories")
        elif self.categories:
            raise SchemaError(f"{self.name}: {self.kind} takes no categories")
        if self.categories and len(set(self.categories)) != len(self.categories):
            raise SchemaError(f"{self.name}: duplicate categories")
        if self.kind == "years-since":
            if self.sentinel is None or self.sentinel.code is None:
                raise SchemaError(
                    f"{self.name}: years-since requires a missing-history sentinel code"
                )
        elif self.sentinel is not None:
            raise SchemaError(f"{self.name}: only years-since takes a sentinel")

    @property
    def other_index(self) -> int | None:
        return self.categories.index(OTHER) if OTHER in self.categories else None


@dataclass(frozen=True)
class FeatureSchema:
    """Ordered feature specs, risk-ordered label names, optional group column."""

    specs: tuple[FeatureSpec, ...]
    label_set: tuple[str, ...]
    group_attribute: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "specs", tuple(self.specs))
        object.__setattr__(self, "label_set", tuple(self.label_set))
        names = [s.name for s in self.specs]
        if not names:
            raise SchemaError("schema has no features")
        if len(set(names)) != len(names):
            raise SchemaError("duplicate feature names")
        if len(self.label_set) < 2 or len(set(self.label_set)) != len(self.label_set):
            raise SchemaError("label_set needs >= 2 distinct names")
        reserved = set(names) | {LABEL_COLUMN}
        if self.group_attribute is not None and self.group_attribute in reserved:
            raise SchemaError(
                f"group attribute {self.group_attribute!r} collides with a column"
            )

    @property
    def feature_names(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.specs)

    @property
    def n_features(self) -> int:
        return len(self.specs)

    @property
    def n_labels(self) -> int:
        return len(self.label_set)

    def spec_index(self, name: str) -> int:
        try:
            return self.feature_names.index(name)
        except ValueError:
            raise SchemaError(f"no feature named {name!r}") from None

    def label_index(self, label: str) -> int:
        try:
            return self.label_set.index(label)
        except ValueError:
            raise SchemaError(f"no label named {label!r}") from None

    def with_group(self, name: str) -> "FeatureSchema":
        return replace(self, group_attribute=name)

    def fingerprint(self) -> str:
        """Stable hex digest of the model-facing schema contents.

        The group attribute is audit metadata, not a training input, so
        grouped and ungrouped variants of one schema fingerprint alike
        and interoperate with the same models.
        """
        canonical = self if self.group_attribute is None else replace(
            self, group_attribute=None)
        return hashlib.sha256(canonical.to_text().encode()).hexdigest()[:16]

    # -- text format --------------------------------------------------

    def to_text(self) -> str:
        lines = [_FORMAT_LINE, "labels: " + ", ".join(self.label_set)]
        if self.group_attribute is not None:
            lines.append("group: " + self.group_attribute)
        for spec in self.specs:
            parts = [spec.name, spec.kind]
            if spec.kind in ("categorical", "binary"):
                parts.append(", ".join(spec.categories))
            elif spec.kind == "years-since":
                tokens = [f"sentinel={_fmt_code(spec.sentinel.code)}"]
                if spec.sentinel.null_allowed:
                    tokens.append("null")
                parts.append(" ".join(tokens))
            lines.append("feature: " + " | ".join(parts))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "FeatureSchema":
        labels: tuple[str, ...] | None = None
        group = None
        specs = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line or line == _FORMAT_LINE:
                continue
            key, _, rest = line.partition(":")
            key = key.strip().lower()
            rest = rest.strip()
            if key == "labels":
                labels = tuple(t.strip() for t in rest.split(",") if t.strip())
            elif key == "group":
                group = rest
            elif key == "feature":
                specs.append(_parse_feature_line(rest, lineno))
            else:
                raise SchemaError(f"line {lineno}: unknown entry {key!r}")
        if labels is None:
            raise SchemaError("schema text has no labels: line")
        return cls(specs=tuple(specs), label_set=labels, group_attribute=group)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_text())

    @classmethod
    def load(cls, path) -> "FeatureSchema":
        with open(path, encoding="utf-8") as fh:
            return cls.from_text(fh.read())


def _fmt_code(code: float) -> str:
    return str(int(code)) if float(code).is_integer() else repr(float(code))


def _parse_feature_line(rest: str, lineno: int) -> FeatureSpec:
    parts = [p.strip() for p in rest.split("|")]
    if len(parts) < 2:
        raise SchemaError(f"line {lineno}: feature needs 'name | kind'")
    name, kind = parts[0], parts[1]
    extra = parts[2] if len(parts) > 2 else ""
    categories: tuple[str, ...] = ()
    sentinel = None
    if kind in ("categorical", "binary"):
        if extra:
            categories = tuple(t.strip() for t in extra.split(",") if t.strip())
    elif kind == "years-since":
        code = MISSING_HISTORY_CODE
        null_allowed = False
        for token in extra.split():
            if token.startswith("sentinel="):
                code = float(token.split("=", 1)[1])
            elif token == "null":
                null_allowed = True
            else:
                raise SchemaError(f"line {lineno}: unknown sentinel token {token!r}")
        sentinel = SentinelRule(code=code, null_allowed=null_allowed)
    elif extra:
        raise SchemaError(f"line {lineno}: {kind} takes no extra field")
    return FeatureSpec(name=name, kind=kind, categories=categories, sentinel=sentinel)


# -- cell encode/decode ----------------------------------------------

_NULLISH = frozenset({"", "null", "none", "na", "n/a"})


def encode_cell(spec: FeatureSpec, cell: str) -> float:
    """Parse one CSV cell into the numeric column encoding.

    Categorical and binary cells become category indices; everything else
    is a float. Raises ValueError with a bare reason; callers attach
    row/column context.
    """
    text = cell.strip()
    if spec.kind in ("categorical", "binary"):
        if text in spec.categories:
            return float(spec.categories.index(text))
        if spec.other_index is not None:
            return float(spec.other_index)
        raise ValueError(f"unknown category {text!r}")
    if spec.kind == "years-since":
        if text.lower() in _NULLISH:
            if spec.sentinel.null_allowed:
                return float(spec.sentinel.code)
            raise ValueError("blank cell (null not allowed here)")
        value = float(text)
        if not value >= 0:
            raise ValueError(f"negative years value {text!r}")
        return value
    if spec.kind == "count":
        value = int(text)
        if value < 0:
            raise ValueError(f"negative count {text!r}")
        return float(value)
    # numeric
    value = float(text)
    if value != value or value in (float("inf"), float("-inf")):
        raise ValueError(f"non-finite value {text!r}")
    return value


def decode_cell(spec: FeatureSpec, value: float) -> str:
    if spec.kind in ("categorical", "binary"):
        return spec.categories[int(value)]
    if float(value).is_integer():
        return str(int(value))
    return repr(float(value))


# -- the bundled 34-feature custody schema ----------------------------

_POSTCODES = tuple(
    f"DH{i}" for i in range(1, 10)
) + tuple(f"DL{i}" for i in range(1, 9)) + tuple(f"SR{i}" for i in range(1, 8))

_MOSAIC = tuple(f"M{i:02d}" for i in range(1, 29))


def hart_schema(group_attribute: str | None = None) -> FeatureSchema:
    """The bundled 34-feature custody schema with High/Moderate/Low labels.

    Years-since columns use the literal 100 code for "no history" and
    accept blank cells as that code.
    """

    def years(name):
        return FeatureSpec(name, "years-since",
                           sentinel=SentinelRule(code=100.0, null_allowed=True))

    def count(name):
        return FeatureSpec(name, "count")

    def age(name):
        return FeatureSpec(name, "numeric")

    specs = (
        age("CustodyAge"),
        FeatureSpec("Gender", "binary", categories=("Male", "Female")),
        count("InstantAnyOffenceCount"),
        FeatureSpec("InstantViolenceOffenceBinary", "binary"),
        FeatureSpec("InstantPropertyOffenceBinary", "binary"),
        FeatureSpec("CustodyPostcodeOutwardTop24", "categorical",
                    categories=_POSTCODES + (OTHER,)),
        FeatureSpec("CustodyMosaicCodeTop28", "categorical",
                    categories=_MOSAIC + (OTHER,)),
        age("FirstAnyOffenceAge"),
        age("FirstViolenceOffenceAge"),
        age("FirstSexualOffenceAge"),
        age("FirstWeaponOffenceAge"),
        age("FirstDrugOffenceAge"),
        age("FirstPropertyOffenceAge"),
        count("PriorAnyOffenceCount"),
        years("PriorAnyOffenceLatestYears"),
        count("PriorMurderOffenceCount"),
        count("PriorSeriousOffenceCount"),
        years("PriorSeriousOffenceLatestYears"),
        count("PriorViolenceOffenceCount"),
        years("PriorViolenceOffenceLatestYears"),
        count("PriorSexualOffenceCount"),
        years("PriorSexualOffenceLatestYears"),
        count("PriorSexRegOffenceCount"),
        count("PriorWeaponOffenceCount"),
        years("PriorWeaponOffenceLatestYears"),
        count("PriorFirearmOffenceCount"),
        count("PriorDurgOffenceCount"),
        years("PriorDrugOffenceLatestYears"),
        count("PriorDrugDistOffenceCount"),
        count("PriorPropertyOffenceCount"),
        years("PriorPropertyOffenceLatestYears"),
        count("PriorCustodyCount"),
        years("PriorCustodyLatestYears"),
        count("PriorIntelCount"),
    )
    return FeatureSchema(specs=specs, label_set=("High", "Moderate", "Low"),
                         group_attribute=group_attribute)


def fixture_path(name: str):
    """Path to a bundled fixture file (context-manager free for local installs)."""
    return resources.files("riskforest.fixtures").joinpath(name)
