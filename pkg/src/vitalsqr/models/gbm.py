"""Gradient boosting for conditional quantiles.

Each stage grows a squared-error tree on the pinball subgradient signs
(tau above the current prediction, tau - 1 below, 0 at exact ties) and
then overwrites every leaf with the empirical tau-quantile of that
leaf's raw residuals, so each scaled leaf step is a descent step on the
training pinball loss.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..metrics import empirical_quantile, mean_pinball
from .tree import LEAF, RegressionTree, grow_tree

GBM_DEFAULTS = {
    "n_trees": 200,
    "depth": 3,
    "learning_rate": 0.1,
    "min_leaf": 20,
}


@dataclass
class GbmModel:
    tau: float
    base_score: float
    learning_rate: float
    trees: list[RegressionTree] = field(default_factory=list)
    # Mean training pinball loss after the base score and after every
    # stage; filled when fit_gbm_qr(..., record_loss=True).
    train_loss_trace: list[float] | None = None

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        out = np.full(X.shape[0], self.base_score, dtype=np.float64)
        for tree in self.trees:
            out += self.learning_rate * tree.predict(X)
        return out


def fit_gbm_qr(
    X: np.ndarray,
    y: np.ndarray,
    tau: float,
    n_trees: int = GBM_DEFAULTS["n_trees"],
    depth: int = GBM_DEFAULTS["depth"],
    learning_rate: float = GBM_DEFAULTS["learning_rate"],
    min_leaf: int = GBM_DEFAULTS["min_leaf"],
    record_loss: bool = False,
) -> GbmModel:
    """Boosted quantile model at level tau.

    The base score is the empirical tau-quantile of the targets. With
    all-equal targets every stage degenerates to a zero-valued root leaf
    and the model stays the constant.
    """
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must be in (0, 1), got {tau}")
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64)
    n = y.shape[0]
    if n < min_leaf:
        raise ValueError(f"need at least min_leaf={min_leaf} rows, got {n}")

    base = empirical_quantile(y, tau)
    current = np.full(n, base, dtype=np.float64)
    model = GbmModel(tau=tau, base_score=float(base), learning_rate=learning_rate)
    if record_loss:
        model.train_loss_trace = [mean_pinball(y, current, tau)]

    for _ in range(n_trees):
        residuals = y - current
        # Pinball subgradient signs; exact ties take the zero element of
        # the subdifferential so tie plateaus (many y equal to the current
        # prediction) still expose structure to the tree.
        pseudo = np.where(
            residuals > 0, tau, np.where(residuals < 0, tau - 1.0, 0.0)
        )
        tree = grow_tree(X, pseudo, depth, min_leaf, keep_members=True)
        for node_id in np.nonzero(tree.feature == LEAF)[0]:
            members = tree.leaf_members[node_id]
            leaf_value = empirical_quantile(residuals[members], tau)
            tree.value[node_id] = leaf_value
            current[members] += learning_rate * leaf_value
        tree.leaf_members = []
        model.trees.append(tree)
        if record_loss:
            model.train_loss_trace.append(mean_pinball(y, current, tau))
    return model
