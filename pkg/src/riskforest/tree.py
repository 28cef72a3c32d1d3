"""Greedy decision-tree induction with class-weighted Gini impurity.

Each internal node tests one feature: numeric-like kinds (numeric,
count, years-since) split on "value <= threshold", categorical and
binary kinds on "value in subset". Candidate thresholds are midpoints
between consecutive distinct sorted values. Categorical candidates are
exhaustive two-way partitions when at most 12 categories are present at
the node; beyond that, categories are ordered by their weight fraction
on the highest-risk class and prefixes of that ordering are scanned.

Class weighting alters the prior over outcomes: a class's weight
multiplies its rows inside both the impurity computation and the leaf
counts, which is how asymmetric error costs enter training without any
resampling.

Determinism contract: candidate splits whose scores agree within a
small tolerance count as tied, and ties resolve to the lowest feature
index, then the lowest threshold or the lexicographically smallest
pinned subset. Training is a pure function of (data view, parameters,
seed).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil, sqrt

import numpy as np

from .data.dataset import Dataset
from .data.schema import NUMERIC_KINDS
from .errors import DataError, SchemaError

#: Relative score tolerance below which two splits count as tied.
SCORE_TIE_REL = 1e-9

FORMAT_LINE = "riskforest-tree v1"


@dataclass(frozen=True)
class SplitRule:
    """One node test. Exactly one of threshold / subset is set."""

    feature_index: int
    threshold: float | None = None
    subset: frozenset[int] | None = None

    def __post_init__(self):
        if (self.threshold is None) == (self.subset is None):
            raise SchemaError("rule needs exactly one of threshold or subset")
        if self.subset is not None:
            object.__setattr__(self, "subset", frozenset(int(c) for c in self.subset))
            if not self.subset:
                raise SchemaError("subset rule must be nonempty")

    def goes_left(self, value: float) -> bool:
        if self.threshold is not None:
            return value <= self.threshold
        return int(value) in self.subset


class TreeNode:
    """Internal node (rule, left, right) or leaf (class_weights)."""

    __slots__ = ("rule", "left", "right", "class_weights")

    def __init__(self, rule=None, left=None, right=None, class_weights=None):
        self.rule = rule
        self.left = left
        self.right = right
        self.class_weights = class_weights
        if self.is_leaf:
            if class_weights is None or not np.sum(class_weights) > 0:
                raise SchemaError("leaf class_weights must sum to > 0")

    @property
    def is_leaf(self) -> bool:
        return self.rule is None

    def __eq__(self, other):
        if not isinstance(other, TreeNode):
            return NotImplemented
        return serialize_tree(self) == serialize_tree(other)

    def __hash__(self):
        return hash(serialize_tree(self))


def default_feature_subset_size(n_features: int) -> int:
    return ceil(sqrt(n_features))


def train_tree(data: Dataset, class_weights, feature_subset_size: int | None = None,
               min_leaf: int = 5, max_depth: int = 16, seed: int = 0,
               row_indices=None) -> TreeNode:
    """Grow a tree on ``data`` (optionally restricted to a row-index multiset).

    ``row_indices`` may repeat indices, which is how bootstrap draws feed
    in: a repeated row simply counts multiple times. At every node
    ``feature_subset_size`` features are sampled without replacement from
    the seeded generator; recursion stops at ``max_depth``, on pure
    nodes, when no candidate improves impurity, or when a child would
    hold fewer than ``min_leaf`` rows.
    """
    X, y = data.X, data.y
    K = data.schema.n_labels
    cw = np.asarray(class_weights, dtype=float)
    if cw.shape != (K,):
        raise DataError(f"need {K} class weights, got {cw.shape}")
    if not (cw > 0).all():
        raise DataError("class weights must be positive")
    d = data.schema.n_features
    m = default_feature_subset_size(d) if feature_subset_size is None else feature_subset_size
    if not 1 <= m <= d:
        raise DataError(f"feature_subset_size {m} outside [1, {d}]")
    if min_leaf < 1 or max_depth < 1:
        raise DataError("min_leaf and max_depth must be >= 1")
    idx = (np.arange(len(data)) if row_indices is None
           else np.asarray(row_indices, dtype=np.int64))
    if idx.size == 0:
        raise DataError("cannot train on an empty row set")

    kinds = [spec.kind for spec in data.schema.specs]
    n_cats = [len(spec.categories) for spec in data.schema.specs]
    rng = np.random.default_rng(seed)
    return _grow(X, y, idx, 0, kinds, n_cats, K, cw, m, min_leaf, max_depth, rng)


def _grow(X, y, idx, depth, kinds, n_cats, K, cw, m, min_leaf, max_depth, rng):
    ynode = y[idx]
    counts = np.bincount(ynode, minlength=K).astype(float)
    wcounts = counts * cw
    leaf = TreeNode(class_weights=wcounts)
    if depth >= max_depth or idx.size < 2 * min_leaf:
        return leaf
    if np.count_nonzero(counts) <= 1:
        return leaf

    features = np.sort(rng.choice(len(kinds), size=m, replace=False))
    W = wcounts.sum()
    parent_score = float(wcounts @ wcounts) / W
    tol = SCORE_TIE_REL * W
    best = None  # (score, rule, left_mask_builder args)

    for j in features:
        v = X[idx, j]
        if kinds[j] in NUMERIC_KINDS:
            found = _best_numeric(v, ynode, K, cw, min_leaf)
        else:
            found = _best_subset(v, ynode, K, cw, min_leaf, n_cats[j])
        if found is None:
            continue
        score, rule_args = found
        if best is None or score > best[0] + tol:
            best = (score, int(j), rule_args)

    if best is None or best[0] <= parent_score + tol:
        return leaf

    _, j, rule_args = best
    if rule_args[0] == "threshold":
        rule = SplitRule(feature_index=j, threshold=rule_args[1])
        mask = X[idx, j] <= rule.threshold
    else:
        rule = SplitRule(feature_index=j, subset=rule_args[1])
        mask = np.isin(X[idx, j].astype(np.int64), rule_args[2])
    left = _grow(X, y, idx[mask], depth + 1, kinds, n_cats, K, cw, m,
                 min_leaf, max_depth, rng)
    right = _grow(X, y, idx[~mask], depth + 1, kinds, n_cats, K, cw, m,
                  min_leaf, max_depth, rng)
    return TreeNode(rule=rule, left=left, right=right)


def _best_numeric(v, ynode, K, cw, min_leaf):
    """Best threshold by the sum-of-squares score; None if no cut is legal.

    Maximizing sum_k wL_k^2/WL + sum_k wR_k^2/WR over cut points is
    equivalent to maximizing the weighted-Gini decrease.
    """
    order = np.argsort(v, kind="stable")
    sv = v[order]
    if sv[0] == sv[-1]:
        return None
    sy = ynode[order]
    n = sv.shape[0]
    M = np.zeros((n, K))
    M[np.arange(n), sy] = cw[sy]
    cums = np.cumsum(M, axis=0)
    tot = cums[-1]
    cut = np.flatnonzero(sv[:-1] < sv[1:])  # left side = rows [0..i]
    if min_leaf > 1:
        cut = cut[(cut + 1 >= min_leaf) & (n - cut - 1 >= min_leaf)]
    if cut.size == 0:
        return None
    L = cums[cut]
    R = tot - L
    score = (L * L).sum(axis=1) / L.sum(axis=1) + (R * R).sum(axis=1) / R.sum(axis=1)
    pos = _first_within_tol(score, SCORE_TIE_REL * tot.sum())
    i = int(cut[pos])
    threshold = (sv[i] + sv[i + 1]) / 2.0
    return float(score[pos]), ("threshold", threshold)


def _first_within_tol(score: np.ndarray, tol: float) -> int:
    """Earliest candidate within tolerance of the best score.

    Scan order is the tie-break order, so near-ties (float noise between
    algebraically equal splits) resolve to the earliest candidate.
    """
    return int(np.argmax(score > score.max() - tol))


# Cache of mask orderings that realize lexicographic subset tie-breaks.
_LEX_MASKS: dict[int, np.ndarray] = {}


def _lex_mask_order(c: int) -> np.ndarray:
    """Masks over categories 1..c-1 (category 0 pinned left), lex-sorted."""
    if c not in _LEX_MASKS:
        masks = np.arange(2 ** (c - 1) - 1)  # all-ones mask excluded: improper
        keys = [tuple(b for b in range(c - 1) if mask >> b & 1) for mask in masks]
        _LEX_MASKS[c] = masks[sorted(range(masks.size), key=keys.__getitem__)]
    return _LEX_MASKS[c]


def _best_subset(v, ynode, K, cw, min_leaf, n_categories):
    vi = v.astype(np.int64)
    wrow = cw[ynode]
    wmat = np.bincount(ynode * n_categories + vi, weights=wrow,
                       minlength=K * n_categories).reshape(K, n_categories)
    raw = np.bincount(vi, minlength=n_categories)
    present = np.flatnonzero(raw > 0)
    c = present.size
    if c < 2:
        return None
    wp = wmat[:, present]  # K x c weighted counts
    rawp = raw[present].astype(np.int64)
    tot_w = wp.sum(axis=1)
    n = vi.shape[0]

    if c <= 12:
        masks = _lex_mask_order(c)
        bits = (masks[:, None] >> np.arange(c - 1)) & 1  # n_masks x (c-1)
        L = bits @ wp[:, 1:].T + wp[:, 0]  # n_masks x K
        rawL = bits @ rawp[1:] + rawp[0]
        subsets_iter = ("mask", masks, bits)
    else:
        # heuristic: order by highest-risk-class weight fraction, scan prefixes
        frac = wp[0] / wp.sum(axis=0)
        order = np.lexsort((present, -frac))  # desc fraction, asc index on ties
        cum_w = np.cumsum(wp[:, order], axis=1)[:, :-1]  # prefixes 1..c-1
        L = cum_w.T
        rawL = np.cumsum(rawp[order])[:-1]
        subsets_iter = ("prefix", order, None)

    R = tot_w - L
    rawR = n - rawL
    ok = (rawL >= min_leaf) & (rawR >= min_leaf)
    if not ok.any():
        return None
    WL = L.sum(axis=1)
    WR = R.sum(axis=1)
    score = np.where(ok, (L * L).sum(axis=1) / WL + (R * R).sum(axis=1) / WR,
                     -np.inf)
    pos = _first_within_tol(score, SCORE_TIE_REL * tot_w.sum())
    kind, a, b = subsets_iter
    if kind == "mask":
        chosen = [present[0]] + [int(present[1 + bpos])
                                 for bpos in range(c - 1) if a[pos] >> bpos & 1]
    else:
        chosen = [int(present[k]) for k in a[: pos + 1]]
    members = np.array(sorted(chosen), dtype=np.int64)
    return float(score[pos]), ("subset", frozenset(int(x) for x in members), members)


# -- prediction ----------------------------------------------------------


def predict_tree(tree: TreeNode, row) -> np.ndarray:
    """Normalized class distribution of the leaf this row lands in."""
    node = tree
    row = np.asarray(row, dtype=float)
    while not node.is_leaf:
        node = node.left if node.rule.goes_left(row[node.rule.feature_index]) else node.right
    w = np.asarray(node.class_weights, dtype=float)
    return w / w.sum()


def tree_apply(tree: TreeNode, X: np.ndarray) -> np.ndarray:
    """Vectorized predict_tree over a row matrix; returns (n, K) distributions."""
    n = X.shape[0]
    if n == 0:
        raise DataError("empty row matrix")
    probe = tree
    while not probe.is_leaf:
        probe = probe.left
    out = np.empty((n, len(probe.class_weights)))
    stack = [(tree, np.arange(n))]
    while stack:
        node, idx = stack.pop()
        if idx.size == 0:
            continue
        if node.is_leaf:
            w = np.asarray(node.class_weights, dtype=float)
            out[idx] = w / w.sum()
            continue
        v = X[idx, node.rule.feature_index]
        if node.rule.threshold is not None:
            mask = v <= node.rule.threshold
        else:
            mask = np.isin(v.astype(np.int64),
                           np.fromiter(node.rule.subset, dtype=np.int64))
        stack.append((node.left, idx[mask]))
        stack.append((node.right, idx[~mask]))
    return out


def tree_votes(tree: TreeNode, X: np.ndarray) -> np.ndarray:
    """Per-row argmax labels with ties broken toward the lower-risk label."""
    dist = tree_apply(tree, X)
    K = dist.shape[1]
    return K - 1 - np.argmax(dist[:, ::-1], axis=1)


# -- serialization ------------------------------------------------------


def serialize_tree(tree: TreeNode) -> str:
    """Pre-order node list, one node per line. Floats use repr round-trip."""
    lines = [FORMAT_LINE]

    def walk(node):
        if node.is_leaf:
            weights = ",".join(repr(float(w)) for w in node.class_weights)
            lines.append(f"leaf {weights}")
            return
        r = node.rule
        if r.threshold is not None:
            lines.append(f"split {r.feature_index} <= {repr(float(r.threshold))}")
        else:
            members = ",".join(str(c) for c in sorted(r.subset))
            lines.append(f"split {r.feature_index} in {members}")
        walk(node.left)
        walk(node.right)

    walk(tree)
    return "\n".join(lines) + "\n"


def deserialize_tree(text: str) -> TreeNode:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != FORMAT_LINE:
        raise DataError(f"not a tree document (expected {FORMAT_LINE!r})")
    it = iter(lines[1:])
    tree = _read_node(it)
    if next(it, None) is not None:
        raise DataError("trailing content after tree")
    return tree


def _read_node(it) -> TreeNode:
    try:
        line = next(it)
    except StopIteration:
        raise DataError("truncated tree document") from None
    kind, _, rest = line.partition(" ")
    if kind == "leaf":
        weights = np.array([float(t) for t in rest.split(",")])
        return TreeNode(class_weights=weights)
    if kind != "split":
        raise DataError(f"bad node line {line!r}")
    feat, op, arg = rest.split(" ", 2)
    if op == "<=":
        rule = SplitRule(feature_index=int(feat), threshold=float(arg))
    elif op == "in":
        rule = SplitRule(feature_index=int(feat),
                         subset=frozenset(int(t) for t in arg.split(",")))
    else:
        raise DataError(f"bad split operator {op!r}")
    left = _read_node(it)
    right = _read_node(it)
    return TreeNode(rule=rule, left=left, right=right)
