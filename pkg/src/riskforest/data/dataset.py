"""Validated tabular datasets and CSV round-tripping.

A Dataset is immutable after construction: its arrays are marked
read-only so it can be shared across worker threads during forest
training. Feature values live in a float matrix; categorical and binary
cells are stored as category indices, years-since "no history" as the
literal sentinel code.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from ..errors import DataError, SchemaError, SchemaMismatchError
from .schema import LABEL_COLUMN, FeatureSchema, decode_cell, encode_cell


@dataclass(frozen=True)
class Dataset:
    schema: FeatureSchema
    X: np.ndarray
    y: np.ndarray
    groups: np.ndarray | None = None
    provenance: str = ""

    def __post_init__(self):
        X = np.ascontiguousarray(np.asarray(self.X, dtype=np.float64))
        y = np.asarray(self.y, dtype=np.int64)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        if self.groups is not None:
            groups = np.asarray(self.groups, dtype=object)
            object.__setattr__(self, "groups", groups)
        _validate(self.schema, X, y, self.groups)
        X.flags.writeable = False
        y.flags.writeable = False
        if self.groups is not None:
            self.groups.flags.writeable = False

    def __len__(self) -> int:
        return self.X.shape[0]

    def label_marginals(self) -> np.ndarray:
        counts = np.bincount(self.y, minlength=self.schema.n_labels)
        return counts / counts.sum()

    def take(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        groups = self.groups[idx] if self.groups is not None else None
        return Dataset(self.schema, self.X[idx], self.y[idx], groups,
                       provenance=self.provenance)

    def rows_equal(self, other: "Dataset") -> bool:
        return (
            self.schema.fingerprint() == other.schema.fingerprint()
            and np.array_equal(self.X, other.X)
            and np.array_equal(self.y, other.y)
            and (
                (self.groups is None and other.groups is None)
                or (
                    self.groups is not None
                    and other.groups is not None
                    and list(self.groups) == list(other.groups)
                )
            )
        )


def _validate(schema: FeatureSchema, X: np.ndarray, y: np.ndarray, groups) -> None:
    if X.ndim != 2 or X.shape[1] != schema.n_features:
        raise DataError(
            f"feature matrix is {X.shape}, schema has {schema.n_features} features"
        )
    n = X.shape[0]
    if y.shape != (n,):
        raise DataError("label vector length does not match row count")
    if n and (y.min() < 0 or y.max() >= schema.n_labels):
        bad = int(np.flatnonzero((y < 0) | (y >= schema.n_labels))[0])
        raise DataError(f"label index out of range at row {bad}", row=bad)
    if groups is not None and len(groups) != n:
        raise DataError("group vector length does not match row count")
    if not np.isfinite(X).all():
        r, c = map(int, np.argwhere(~np.isfinite(X))[0])
        raise DataError("non-finite feature value",
                        row=r, column=schema.specs[c].name)
    for j, spec in enumerate(schema.specs):
        col = X[:, j]
        if spec.kind == "count":
            bad = (col < 0) | (col != np.floor(col))
        elif spec.kind == "years-since":
            bad = col < 0
        elif spec.kind in ("categorical", "binary"):
            bad = (col != np.floor(col)) | (col < 0) | (col >= len(spec.categories))
        else:
            continue
        if bad.any():
            r = int(np.flatnonzero(bad)[0])
            raise DataError(
                f"value {col[r]!r} invalid for {spec.kind} feature {spec.name}",
                row=r, column=spec.name,
            )


# -- CSV ---------------------------------------------------------------


def load_csv(path, schema: FeatureSchema) -> Dataset:
    """Load a labeled dataset, validating every cell against the schema."""
    X, y, groups = _parse_csv(path, schema, require_label=True)
    return Dataset(schema, X, y, groups, provenance=str(path))


def load_unlabeled_csv(path, schema: FeatureSchema):
    """Load features (and groups, if present) from a CSV that may lack labels.

    Returns (X, y_or_None, groups_or_None).
    """
    X, y, groups = _parse_csv(path, schema, require_label=False)
    return X, y, groups


def _parse_csv(path, schema: FeatureSchema, require_label: bool):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        expected = set(schema.feature_names) | {LABEL_COLUMN}
        if schema.group_attribute is not None:
            expected.add(schema.group_attribute)
        missing = [n for n in schema.feature_names if n not in header]
        has_label = LABEL_COLUMN in header
        if require_label and not has_label:
            missing.append(LABEL_COLUMN)
        extra = [h for h in header if h not in expected]
        if missing or extra:
            raise SchemaMismatchError(
                f"{path}: columns do not match schema"
                f" (missing: {', '.join(missing) or 'none'};"
                f" extra: {', '.join(extra) or 'none'})",
                missing=missing, extra=extra,
            )
        col_of = {name: header.index(name) for name in header}
        has_group = (
            schema.group_attribute is not None and schema.group_attribute in header
        )

        rows, labels, groups = [], [], []
        for rownum, record in enumerate(reader, start=1):
            if len(record) != len(header):
                raise DataError(f"row {rownum}: expected {len(header)} cells,"
                                f" got {len(record)}", row=rownum)
            encoded = np.empty(schema.n_features)
            for j, spec in enumerate(schema.specs):
                cell = record[col_of[spec.name]]
                try:
                    encoded[j] = encode_cell(spec, cell)
                except ValueError as exc:
                    raise DataError(
                        f"row {rownum}, column {spec.name}: {exc}",
                        row=rownum, column=spec.name,
                    ) from None
            rows.append(encoded)
            if has_label:
                cell = record[col_of[LABEL_COLUMN]].strip()
                if cell not in schema.label_set:
                    raise DataError(
                        f"row {rownum}: label {cell!r} not in"
                        f" {'/'.join(schema.label_set)}",
                        row=rownum, column=LABEL_COLUMN,
                    )
                labels.append(schema.label_set.index(cell))
            if has_group:
                groups.append(record[col_of[schema.group_attribute]].strip())

    X = np.asarray(rows) if rows else np.empty((0, schema.n_features))
    y = np.asarray(labels, dtype=np.int64) if has_label else None
    g = np.asarray(groups, dtype=object) if has_group else None
    return X, y, g


def write_csv(dataset: Dataset, path) -> None:
    """Write the dataset in the canonical cell formatting (round-trip safe)."""
    schema = dataset.schema
    header = list(schema.feature_names) + [LABEL_COLUMN]
    if dataset.groups is not None:
        if schema.group_attribute is None:
            raise SchemaError("dataset has groups but schema names no group column")
        header.append(schema.group_attribute)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(len(dataset)):
            record = [decode_cell(spec, dataset.X[i, j])
                      for j, spec in enumerate(schema.specs)]
            record.append(schema.label_set[dataset.y[i]])
            if dataset.groups is not None:
                record.append(str(dataset.groups[i]))
            writer.writerow(record)


# -- holdout splitting ---------------------------------------------------


def split_holdout(dataset: Dataset, fraction: float, seed: int):
    """Disjoint (rest, holdout) split; the holdout gets round(fraction * n) rows.

    Row order within each part follows the original dataset. Deterministic
    for a fixed seed.
    """
    n = len(dataset)
    if n < 2:
        raise DataError("need at least 2 rows to split")
    if not 0.0 < fraction < 1.0:
        raise DataError(f"fraction {fraction} outside (0, 1)")
    n_hold = int(round(fraction * n))
    if n_hold == 0 or n_hold == n:
        raise DataError(f"fraction {fraction} of {n} rows leaves an empty part")
    perm = np.random.default_rng(seed).permutation(n)
    hold = np.sort(perm[:n_hold])
    rest = np.sort(perm[n_hold:])
    return dataset.take(rest), dataset.take(hold)
