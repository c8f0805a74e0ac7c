"""Depth-limited regression trees grown on squared-error splits.

Trees are stored as flat arrays (feature index, threshold, child links,
leaf value). The split rule is "go left iff x <= threshold" with the
threshold taken verbatim from a training sample, so serialization and
re-evaluation are exact. Split search runs through the kernel backend;
node targets are centered on their mean before the scan so a constant
node scores exactly zero gain and growth stops deterministically.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import _kernels

LEAF = -1

# Relative gain threshold: splits must reduce node SSE by more than this
# fraction to be accepted, which absorbs float noise in the scan.
MIN_GAIN_FRACTION = 1e-12


@dataclass
class RegressionTree:
    feature: np.ndarray  # int32, LEAF for leaves
    threshold: np.ndarray  # float64
    left: np.ndarray  # int32
    right: np.ndarray  # int32
    value: np.ndarray  # float64, leaf prediction
    # Row indices of the training samples in each leaf (empty for inner
    # nodes); kept only when the grower is asked to record memberships.
    leaf_members: list[np.ndarray] = field(default_factory=list)

    @property
    def n_nodes(self) -> int:
        return int(self.feature.shape[0])

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf node index for every row of X."""
        n = X.shape[0]
        node = np.zeros(n, dtype=np.int32)
        active = self.feature[node] != LEAF
        while active.any():
            idx = np.nonzero(active)[0]
            cur = node[idx]
            feat = self.feature[cur]
            go_left = X[idx, feat] <= self.threshold[cur]
            node[idx] = np.where(go_left, self.left[cur], self.right[cur])
            active = self.feature[node] != LEAF
        return node

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]


def grow_tree(
    X: np.ndarray,
    y: np.ndarray,
    max_depth: int,
    min_leaf: int,
    rows: np.ndarray | None = None,
    keep_members: bool = False,
) -> RegressionTree:
    """Grow one tree on rows of X (all rows when rows is None).

    Leaf values are the mean target of the leaf's samples; callers that
    need a different leaf statistic (quantile leaves, pooled targets)
    use keep_members=True and rewrite values afterwards.
    """
    n_total = X.shape[0]
    if rows is None:
        rows = np.arange(n_total, dtype=np.intp)
    p = X.shape[1]
    sorted_rows = [
        rows[np.argsort(X[rows, f], kind="stable")] for f in range(p)
    ]

    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    value: list[float] = []
    members: list[np.ndarray] = []
    in_left = np.zeros(n_total, dtype=bool)

    def new_node() -> int:
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        value.append(0.0)
        members.append(np.empty(0, dtype=np.intp))
        return len(feature) - 1

    def build(node_sorted: list[np.ndarray], depth: int, node_id: int) -> None:
        idx = node_sorted[0]
        targets = y[idx]
        mean = float(np.mean(targets))
        value[node_id] = mean
        n_node = idx.shape[0]
        # the min == max test is exact; centering noise cannot fake a gain
        if (
            depth >= max_depth
            or n_node < 2 * min_leaf
            or targets.min() == targets.max()
        ):
            if keep_members:
                members[node_id] = idx
            return
        node_sse = float(np.dot(targets - mean, targets - mean))
        best_score = -np.inf
        best_feat = -1
        best_pos = -1
        for f in range(p):
            xs = np.ascontiguousarray(X[node_sorted[f], f], dtype=np.float64)
            ys = np.ascontiguousarray(y[node_sorted[f]] - mean, dtype=np.float64)
            pos, score = _kernels.best_split(xs, ys, min_leaf)
            if pos >= 0 and score > best_score:
                best_score = score
                best_feat = f
                best_pos = pos
        if best_feat < 0 or best_score <= MIN_GAIN_FRACTION * node_sse:
            if keep_members:
                members[node_id] = idx
            return
        split_order = node_sorted[best_feat]
        cut = float(X[split_order[best_pos], best_feat])
        in_left[split_order[: best_pos + 1]] = True
        left_sorted = []
        right_sorted = []
        for f in range(p):
            arr = node_sorted[f]
            mask = in_left[arr]
            left_sorted.append(arr[mask])
            right_sorted.append(arr[~mask])
        in_left[split_order[: best_pos + 1]] = False

        feature[node_id] = best_feat
        threshold[node_id] = cut
        left_id = new_node()
        right_id = new_node()
        left[node_id] = left_id
        right[node_id] = right_id
        build(left_sorted, depth + 1, left_id)
        build(right_sorted, depth + 1, right_id)

    root = new_node()
    build(sorted_rows, 0, root)
    tree = RegressionTree(
        feature=np.asarray(feature, dtype=np.int32),
        threshold=np.asarray(threshold, dtype=np.float64),
        left=np.asarray(left, dtype=np.int32),
        right=np.asarray(right, dtype=np.int32),
        value=np.asarray(value, dtype=np.float64),
        leaf_members=members if keep_members else [],
    )
    return tree
