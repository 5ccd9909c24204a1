"""Bagged variance-reduction regression trees.

Every split considers all features. Candidate thresholds are midpoints
between consecutive distinct sorted values; samples with ``x <= threshold``
go left. Ties in variance reduction resolve to the lower feature index, then
the lower threshold.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import Dataset

LEAF = -1


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    min_samples_split: int = 2
    min_samples_leaf: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be >= 2")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")


@dataclass(eq=False)
class Tree:
    """Node arrays; ``feature[i] == LEAF`` marks a leaf whose prediction is ``value[i]``."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    n_samples: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def is_leaf(self, i) -> bool:
        return self.feature[i] == LEAF

    def apply(self, X) -> np.ndarray:
        """Index of the leaf each row of ``X`` lands in."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        node = np.zeros(len(X), dtype=np.intp)
        rows = np.arange(len(X))
        active = self.feature[node] != LEAF
        while active.any():
            idx = rows[active]
            nd = node[idx]
            go_left = X[idx, self.feature[nd]] <= self.threshold[nd]
            node[idx] = np.where(go_left, self.left[nd], self.right[nd])
            active[idx] = self.feature[node[idx]] != LEAF
        return node

    def predict(self, X) -> np.ndarray:
        return self.value[self.apply(X)]

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
            "n_samples": self.n_samples.tolist(),
        }

    @classmethod
    def from_dict(cls, d) -> "Tree":
        return cls(
            feature=np.array(d["feature"], dtype=np.intp),
            threshold=np.array(d["threshold"], dtype=float),
            left=np.array(d["left"], dtype=np.intp),
            right=np.array(d["right"], dtype=np.intp),
            value=np.array(d["value"], dtype=float),
            n_samples=np.array(d["n_samples"], dtype=np.intp),
        )


def best_split(X: np.ndarray, y: np.ndarray, min_samples_leaf: int = 1):
    """Return ``(feature, threshold, sse_reduction)`` of the best split, or None.

    The reduction is in summed squared error, i.e. ``n`` times the weighted
    variance reduction.
    """
    n, d = X.shape
    if n < 2 * min_samples_leaf:
        return None
    yc = y - y.mean()
    order = np.argsort(X, axis=0, kind="stable")
    xs = np.take_along_axis(X, order, axis=0)
    ys = yc[order]
    csum = np.cumsum(ys, axis=0)
    csq = np.cumsum(ys * ys, axis=0)
    total, total_sq = csum[-1], csq[-1]

    n_left = np.arange(1, n)[:, None]
    n_right = n - n_left
    sse_left = csq[:-1] - csum[:-1] ** 2 / n_left
    sse_right = (total_sq - csq[:-1]) - (total - csum[:-1]) ** 2 / n_right
    gain = (total_sq - total**2 / n) - sse_left - sse_right

    valid = (xs[1:] > xs[:-1]) & (n_left >= min_samples_leaf) & (n_right >= min_samples_leaf)
    if not valid.any():
        return None
    gain = np.where(valid, gain, -np.inf).T.ravel()
    # feature-major order: first hit is the lowest feature, then lowest threshold;
    # gains equal up to rounding count as ties
    best = gain.max()
    tol = 1e-12 * max(float(total_sq[0]), 1e-300)
    flat = int(np.flatnonzero(gain >= best - tol)[0])
    gain = gain.reshape(d, n - 1).T
    feat, pos = divmod(flat, n - 1)
    threshold = 0.5 * (xs[pos, feat] + xs[pos + 1, feat])
    if threshold >= xs[pos + 1, feat]:
        threshold = xs[pos, feat]
    return feat, float(threshold), float(gain[pos, feat])


def fit_tree(X, y, min_samples_split: int = 2, min_samples_leaf: int = 1) -> Tree:
    """Grow a tree until nodes are pure, too small to split, or unsplittable."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(y) == 0:
        raise ValueError("cannot fit a tree on no samples")
    feature, threshold, left, right, value, count = [], [], [], [], [], []

    def new_node(idx):
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        value.append(float(np.mean(y[idx])))
        count.append(len(idx))
        return len(feature) - 1

    stack = [(new_node(np.arange(len(y))), np.arange(len(y)))]
    while stack:
        node, idx = stack.pop()
        yi = y[idx]
        if len(idx) < min_samples_split or yi.max() == yi.min():
            continue
        found = best_split(X[idx], yi, min_samples_leaf)
        if found is None:
            continue
        feat, thr, _ = found
        mask = X[idx, feat] <= thr
        li, ri = idx[mask], idx[~mask]
        feature[node] = feat
        threshold[node] = thr
        left[node] = new_node(li)
        right[node] = new_node(ri)
        stack.append((right[node], ri))
        stack.append((left[node], li))

    return Tree(
        feature=np.array(feature, dtype=np.intp),
        threshold=np.array(threshold),
        left=np.array(left, dtype=np.intp),
        right=np.array(right, dtype=np.intp),
        value=np.array(value),
        n_samples=np.array(count, dtype=np.intp),
    )


def tree_seed(master_seed: int, tree_index: int) -> int:
    """Per-tree seed: NumPy SeedSequence hash of (master_seed, tree_index)."""
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(tree_index),))
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def bootstrap_indices(n: int, seed: int) -> np.ndarray:
    if n <= 0:
        raise ValueError("cannot resample an empty set")
    return np.random.default_rng(seed).integers(0, n, size=n)


def bootstrap_sample(train: Dataset, seed: int) -> Dataset:
    return train.subset(bootstrap_indices(len(train), seed), f"{train.source_id}:bootstrap")


@dataclass(eq=False)
class Forest:
    trees: list
    tree_seeds: list = field(default_factory=list)

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        total = np.zeros(len(X))
        for tree in self.trees:
            total += tree.predict(X)
        return total / len(self.trees)

    def tree_predictions(self, X) -> np.ndarray:
        """(n_trees, n_rows) matrix of individual tree outputs."""
        return np.array([tree.predict(X) for tree in self.trees])

    def to_dict(self) -> dict:
        return {"tree_seeds": list(self.tree_seeds), "trees": [t.to_dict() for t in self.trees]}

    @classmethod
    def from_dict(cls, d) -> "Forest":
        return cls([Tree.from_dict(t) for t in d["trees"]], list(d.get("tree_seeds", [])))


def forest_train(train: Dataset, cfg: ForestConfig = ForestConfig()) -> Forest:
    if len(train) == 0:
        raise ValueError("empty training set")
    seeds = [tree_seed(cfg.seed, i) for i in range(cfg.n_trees)]
    trees = []
    for s in seeds:
        idx = bootstrap_indices(len(train), s)
        trees.append(fit_tree(train.X[idx], train.y[idx], cfg.min_samples_split, cfg.min_samples_leaf))
    return Forest(trees, seeds)


def forest_predict(forest: Forest, X) -> np.ndarray | float:
    X = np.asarray(X, dtype=float)
    out = forest.predict(np.atleast_2d(X))
    return float(out[0]) if X.ndim == 1 else out


class ForestRegressor:
    """Predictor wrapper; the forest sees raw (unscaled) features."""

    name = "RFR"

    def __init__(self, forest: Forest):
        self.forest = forest

    @classmethod
    def fit(cls, train: Dataset, cfg: ForestConfig = ForestConfig()):
        return cls(forest_train(train, cfg))

    def predict(self, X) -> np.ndarray:
        return self.forest.predict(X)
