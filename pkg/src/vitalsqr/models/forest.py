"""Random forest regression with quantile prediction by leaf pooling.

Trees are grown on bootstrap samples with squared-error splits. The mean
prediction averages per-tree leaf means (classic regression forest); a
quantile prediction pools the training targets of the leaves a query
falls into, across all trees, and takes their empirical tau-quantile.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..metrics import empirical_quantile
from .tree import LEAF, RegressionTree, grow_tree

RF_DEFAULTS = {
    "n_trees": 100,
    "depth": 8,
    "min_leaf": 5,
    "bootstrap": True,
}


@dataclass
class RfModel:
    trees: list[RegressionTree]
    # Per tree: leaf node id -> array of training targets in that leaf.
    leaf_targets: list[dict[int, np.ndarray]]
    seed: int
    tree_seeds: tuple[int, ...] = field(default_factory=tuple)

    def predict_mean(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        acc = np.zeros(X.shape[0], dtype=np.float64)
        for tree in self.trees:
            acc += tree.predict(X)
        return acc / len(self.trees)

    def predict_quantile(self, X: np.ndarray, tau: float) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        leaf_ids = [tree.apply(X) for tree in self.trees]
        out = np.empty(X.shape[0], dtype=np.float64)
        for i in range(X.shape[0]):
            pooled = np.concatenate(
                [
                    self.leaf_targets[t][int(leaf_ids[t][i])]
                    for t in range(len(self.trees))
                ]
            )
            out[i] = empirical_quantile(pooled, tau)
        return out


def fit_rf_quantile(
    X: np.ndarray,
    y: np.ndarray,
    n_trees: int = RF_DEFAULTS["n_trees"],
    depth: int = RF_DEFAULTS["depth"],
    min_leaf: int = RF_DEFAULTS["min_leaf"],
    bootstrap: bool = RF_DEFAULTS["bootstrap"],
    seed: int = 0,
) -> RfModel:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64)
    n = y.shape[0]
    if n < min_leaf:
        raise ValueError(f"need at least min_leaf={min_leaf} rows, got {n}")

    seed_seq = np.random.SeedSequence(seed)
    tree_seeds = tuple(int(s) for s in seed_seq.generate_state(n_trees))
    trees: list[RegressionTree] = []
    leaf_targets: list[dict[int, np.ndarray]] = []
    for tree_seed in tree_seeds:
        if bootstrap:
            rng = np.random.default_rng(tree_seed)
            rows = rng.integers(0, n, size=n)
            rows = np.sort(rows).astype(np.intp)
        else:
            rows = np.arange(n, dtype=np.intp)
        tree = grow_tree(X, y, depth, min_leaf, rows=rows, keep_members=True)
        targets = {
            int(node_id): np.sort(y[tree.leaf_members[node_id]])
            for node_id in np.nonzero(tree.feature == LEAF)[0]
        }
        tree.leaf_members = []
        trees.append(tree)
        leaf_targets.append(targets)
    return RfModel(trees=trees, leaf_targets=leaf_targets, seed=seed,
                   tree_seeds=tree_seeds)
