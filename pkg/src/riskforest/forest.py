"""Bootstrap-aggregated tree ensembles with plurality voting.

Every tree trains on a with-replacement bootstrap whose generator is
derived from (master_seed, tree index) through a splittable seed
sequence, so the trained forest is identical whatever the worker count
or execution order. The per-tree bootstrap membership is kept so
out-of-bag predictions can vote with only the trees that never saw a
row.

Vote ties: an individual tree breaks its leaf-distribution ties toward
the lower-risk label; the forest breaks vote ties toward the higher-risk
label (labels are ordered highest risk first).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .data.dataset import Dataset, split_holdout
from .errors import CalibrationError, DataError, FingerprintMismatchError
from .tree import (
    FORMAT_LINE as TREE_FORMAT_LINE,
    TreeNode,
    default_feature_subset_size,
    deserialize_tree,
    serialize_tree,
    train_tree,
    tree_votes,
)

FOREST_FORMAT_LINE = "riskforest-forest v1"

#: High-risk weight multipliers swept by calibrate_cost_ratio.
COST_GRID = (0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0)


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 509
    class_weights: tuple[float, ...] | None = None  # uniform when None
    feature_subset_size: int | None = None  # ceil(sqrt(d)) when None
    min_leaf: int = 5
    max_depth: int = 16
    master_seed: int = 0
    bootstrap_size: int | None = None  # training-set size when None
    identity_bootstrap: bool = False  # test hook: in-bag = every row once

    def __post_init__(self):
        if self.n_trees < 1:
            raise DataError("n_trees must be >= 1")
        if self.bootstrap_size is not None and self.bootstrap_size < 1:
            raise DataError("bootstrap_size must be >= 1")
        if self.class_weights is not None:
            cw = tuple(float(w) for w in self.class_weights)
            if any(w <= 0 for w in cw):
                raise DataError("class weights must be positive")
            object.__setattr__(self, "class_weights", cw)

    def resolved(self, data: Dataset) -> "ForestConfig":
        """Fill data-dependent defaults so the config is fully explicit."""
        return replace(
            self,
            class_weights=self.class_weights or (1.0,) * data.schema.n_labels,
            feature_subset_size=self.feature_subset_size
            or default_feature_subset_size(data.schema.n_features),
            bootstrap_size=self.bootstrap_size or len(data),
        )


@dataclass(frozen=True)
class Forest:
    config: ForestConfig
    trees: tuple[TreeNode, ...]
    inbag: tuple[np.ndarray, ...]
    fingerprint: str
    labels: tuple[str, ...]

    @property
    def n_labels(self) -> int:
        return len(self.labels)


def derive_tree_seed(master_seed: int, index: int) -> int:
    """The integer seed tree ``index`` trains with. Exposed for tests."""
    _, tree_ss = np.random.SeedSequence(
        entropy=master_seed, spawn_key=(index,)).spawn(2)
    return int(tree_ss.generate_state(1, dtype=np.uint64)[0])


def _bootstrap_indices(master_seed: int, index: int, n: int, size: int) -> np.ndarray:
    boot_ss, _ = np.random.SeedSequence(
        entropy=master_seed, spawn_key=(index,)).spawn(2)
    draws = np.random.default_rng(boot_ss).integers(0, n, size=size)
    return np.sort(draws)  # canonical multiset representation


def train_forest(data: Dataset, config: ForestConfig, threads: int = 1) -> Forest:
    """Train config.n_trees trees on per-tree bootstraps of ``data``.

    ``threads`` caps concurrent tree builds and never changes the result;
    trees are assembled in index order regardless of completion order.
    """
    if len(data) == 0:
        raise DataError("cannot train on an empty dataset")
    cfg = config.resolved(data)
    n = len(data)

    def build(i: int):
        if cfg.identity_bootstrap:
            inbag = np.arange(n, dtype=np.int64)
        else:
            inbag = _bootstrap_indices(cfg.master_seed, i, n, cfg.bootstrap_size)
        tree = train_tree(
            data,
            class_weights=cfg.class_weights,
            feature_subset_size=cfg.feature_subset_size,
            min_leaf=cfg.min_leaf,
            max_depth=cfg.max_depth,
            seed=derive_tree_seed(cfg.master_seed, i),
            row_indices=inbag,
        )
        return tree, inbag

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            built = list(pool.map(build, range(cfg.n_trees)))
    else:
        built = [build(i) for i in range(cfg.n_trees)]

    trees = tuple(t for t, _ in built)
    inbag = tuple(b for _, b in built)
    return Forest(config=cfg, trees=trees, inbag=inbag,
                  fingerprint=data.schema.fingerprint(),
                  labels=data.schema.label_set)


# -- prediction ----------------------------------------------------------


def _check_fingerprint(forest: Forest, data: Dataset) -> None:
    if data.schema.fingerprint() != forest.fingerprint:
        raise FingerprintMismatchError(
            f"dataset schema {data.schema.fingerprint()} does not match the"
            f" model's {forest.fingerprint}"
        )


def forest_votes(forest: Forest, X: np.ndarray) -> np.ndarray:
    """(n_trees, n_rows) matrix of per-tree vote label indices."""
    return np.stack([tree_votes(tree, X) for tree in forest.trees])


def tally_votes(votes: np.ndarray, n_labels: int) -> np.ndarray:
    """(n_rows, K) vote counts from a (n_trees, n_rows) vote matrix."""
    n_rows = votes.shape[1]
    tally = np.zeros((n_rows, n_labels), dtype=np.int64)
    rows = np.arange(n_rows)
    for t in range(votes.shape[0]):
        tally[rows, votes[t]] += 1
    return tally


def predict_forest(forest: Forest, row):
    """Plurality label and the per-label vote tally for one row."""
    X = np.asarray(row, dtype=float).reshape(1, -1)
    votes = forest_votes(forest, X)
    tally = tally_votes(votes, forest.n_labels)[0]
    label = forest.labels[int(np.argmax(tally))]  # argmax ties -> higher risk
    return label, {name: int(c) for name, c in zip(forest.labels, tally)}


def predict_dataset(forest: Forest, data: Dataset):
    """(label indices, vote tallies) for every row; checks the fingerprint."""
    _check_fingerprint(forest, data)
    votes = forest_votes(forest, data.X)
    tally = tally_votes(votes, forest.n_labels)
    return np.argmax(tally, axis=1), tally


def oob_predict(forest: Forest, data: Dataset):
    """Out-of-bag labels per row, -1 where every tree saw the row.

    Returns (labels, n_oob_trees) where n_oob_trees[i] counts the trees
    voting on row i.
    """
    _check_fingerprint(forest, data)
    n = len(data)
    votes = forest_votes(forest, data.X)
    tally = np.zeros((n, forest.n_labels), dtype=np.int64)
    oob_counts = np.zeros(n, dtype=np.int64)
    for t, inbag in enumerate(forest.inbag):
        if inbag.size and inbag.max() >= n:
            raise FingerprintMismatchError(
                "dataset is smaller than the training set this model recorded")
        member = np.zeros(n, dtype=bool)
        member[inbag] = True
        rows = np.flatnonzero(~member)
        tally[rows, votes[t, rows]] += 1
        oob_counts[rows] += 1
    labels = np.argmax(tally, axis=1)
    labels[oob_counts == 0] = -1
    return labels, oob_counts


# -- cost-ratio calibration ----------------------------------------------


def count_policy_errors(pred: np.ndarray, actual: np.ndarray, n_labels: int):
    """(dangerous, cautious) counts under the custody error policy.

    Dangerous: a highest-risk row forecast anything lower. Cautious: a
    lowest-risk row forecast anything higher. Label index 0 is the
    highest risk, index K-1 the lowest.
    """
    high, low = 0, n_labels - 1
    dangerous = int(np.sum((actual == high) & (pred != high)))
    cautious = int(np.sum((actual == low) & (pred != low)))
    return dangerous, cautious


@dataclass(frozen=True)
class SweepPoint:
    multiplier: float
    class_weights: tuple[float, ...]
    dangerous: int
    cautious: int

    @property
    def ratio(self) -> float | None:
        return self.cautious / self.dangerous if self.dangerous > 0 else None


@dataclass(frozen=True)
class CalibrationResult:
    weights: tuple[float, ...]
    realized_ratio: float
    sweep: tuple[SweepPoint, ...]
    target_ratio: float


def calibrate_cost_ratio(data: Dataset, config: ForestConfig, target_ratio: float,
                         grid=COST_GRID, eval_fraction: float = 0.5,
                         threads: int = 1) -> CalibrationResult:
    """Sweep high-risk weight multipliers toward a cautious:dangerous target.

    Each grid point trains on one half of ``data`` (split seeded from the
    config's master seed) and counts policy errors on the other half. The
    returned weights realize the ratio nearest ``target_ratio``. Raises
    CalibrationError, carrying the sweep, when no grid point produces
    both error types.
    """
    if target_ratio <= 0:
        raise DataError("target_ratio must be positive")
    cfg = config.resolved(data)
    train_part, eval_part = split_holdout(data, eval_fraction, cfg.master_seed)
    points = []
    for mult in grid:
        weights = list(cfg.class_weights)
        weights[0] *= mult
        forest = train_forest(train_part,
                              replace(cfg, class_weights=tuple(weights)),
                              threads=threads)
        pred, _ = predict_dataset(forest, eval_part)
        dangerous, cautious = count_policy_errors(pred, eval_part.y,
                                                  data.schema.n_labels)
        points.append(SweepPoint(multiplier=mult, class_weights=tuple(weights),
                                 dangerous=dangerous, cautious=cautious))
    usable = [p for p in points if p.dangerous > 0 and p.cautious > 0]
    if not usable:
        raise CalibrationError(
            "no grid point produced both dangerous and cautious errors; sweep: "
            + "; ".join(f"x{p.multiplier}: d={p.dangerous}, c={p.cautious}"
                        for p in points),
            sweep=points,
        )
    best = min(usable, key=lambda p: (abs(p.ratio - target_ratio), p.multiplier))
    return CalibrationResult(weights=best.class_weights,
                             realized_ratio=best.ratio,
                             sweep=tuple(points), target_ratio=target_ratio)


# -- save/load -----------------------------------------------------------


def save_forest(forest: Forest, path) -> None:
    """Write the forest as a deterministic text document."""
    cfg = forest.config
    lines = [
        FOREST_FORMAT_LINE,
        f"fingerprint {forest.fingerprint}",
        "labels " + ",".join(forest.labels),
        f"n_trees {cfg.n_trees}",
        "class_weights " + ",".join(repr(w) for w in cfg.class_weights),
        f"feature_subset_size {cfg.feature_subset_size}",
        f"min_leaf {cfg.min_leaf}",
        f"max_depth {cfg.max_depth}",
        f"master_seed {cfg.master_seed}",
        f"bootstrap_size {cfg.bootstrap_size}",
        f"identity_bootstrap {int(cfg.identity_bootstrap)}",
    ]
    for i, inbag in enumerate(forest.inbag):
        lines.append(f"inbag {i} " + " ".join(str(v) for v in inbag))
    for i, tree in enumerate(forest.trees):
        lines.append(f"tree {i}")
        lines.append(serialize_tree(tree).rstrip("\n"))
    lines.append("end")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_forest(path, schema=None) -> Forest:
    """Read a forest document; verifies the fingerprint when a schema is given."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    lines = text.splitlines()
    if not lines or lines[0] != FOREST_FORMAT_LINE:
        raise DataError(f"not a forest document (expected {FOREST_FORMAT_LINE!r})")
    header: dict[str, str] = {}
    pos = 1
    while pos < len(lines) and not lines[pos].startswith(("inbag ", "tree ")):
        key, _, value = lines[pos].partition(" ")
        header[key] = value
        pos += 1
    try:
        labels = tuple(header["labels"].split(","))
        cfg = ForestConfig(
            n_trees=int(header["n_trees"]),
            class_weights=tuple(float(w)
                                for w in header["class_weights"].split(",")),
            feature_subset_size=int(header["feature_subset_size"]),
            min_leaf=int(header["min_leaf"]),
            max_depth=int(header["max_depth"]),
            master_seed=int(header["master_seed"]),
            bootstrap_size=int(header["bootstrap_size"]),
            identity_bootstrap=bool(int(header["identity_bootstrap"])),
        )
        fingerprint = header["fingerprint"]
    except KeyError as exc:
        raise DataError(f"forest header missing {exc}") from None

    inbag = []
    while pos < len(lines) and lines[pos].startswith("inbag "):
        _, _, rest = lines[pos].split(" ", 2)
        inbag.append(np.array([int(v) for v in rest.split()], dtype=np.int64))
        pos += 1

    trees = []
    while pos < len(lines) and lines[pos].startswith("tree "):
        pos += 1
        if lines[pos] != TREE_FORMAT_LINE:
            raise DataError("malformed tree block")
        block = [lines[pos]]
        pos += 1
        while pos < len(lines) and lines[pos].startswith(("leaf ", "split ")):
            block.append(lines[pos])
            pos += 1
        trees.append(deserialize_tree("\n".join(block)))
    if pos >= len(lines) or lines[pos] != "end":
        raise DataError("forest document not terminated with 'end'")
    if len(trees) != cfg.n_trees or len(inbag) != cfg.n_trees:
        raise DataError("tree or inbag count does not match header")
    if schema is not None and schema.fingerprint() != fingerprint:
        raise FingerprintMismatchError(
            f"schema {schema.fingerprint()} does not match the saved model's"
            f" {fingerprint}")
    return Forest(config=cfg, trees=tuple(trees), inbag=tuple(inbag),
                  fingerprint=fingerprint, labels=labels)
