"""Single-hidden-layer network with one output head per quantile level.

The heads share the hidden layer; head j is trained with pinball loss at
its level and the losses are summed across heads. Inputs and targets are
standardized internally (training statistics travel with the model), so
the fixed learning rate behaves the same at any data scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MLP_DEFAULTS = {
    "hidden": 32,
    "epochs": 500,
    "lr": 0.005,
    "batch": 64,
}


class DivergenceError(RuntimeError):
    """Training loss became non-finite."""


@dataclass
class MlpModel:
    levels: tuple[float, ...]
    w1: np.ndarray  # (hidden, n_features)
    b1: np.ndarray  # (hidden,)
    w2: np.ndarray  # (n_levels, hidden)
    b2: np.ndarray  # (n_levels,)
    x_mean: np.ndarray
    x_sd: np.ndarray
    y_mean: float
    y_sd: float
    seed: int

    def predict_levels(self, X: np.ndarray) -> np.ndarray:
        """(n, n_levels) predictions in target units, ordered by level."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        Xs = (X - self.x_mean) / self.x_sd
        hidden = np.maximum(Xs @ self.w1.T + self.b1, 0.0)
        out = hidden @ self.w2.T + self.b2
        return out * self.y_sd + self.y_mean

    def predict(self, X: np.ndarray, tau: float) -> np.ndarray:
        try:
            j = self.levels.index(tau)
        except ValueError as exc:
            raise ValueError(f"model has no head for level {tau}") from exc
        return self.predict_levels(X)[:, j]


def loss_and_grads(
    w1: np.ndarray,
    b1: np.ndarray,
    w2: np.ndarray,
    b2: np.ndarray,
    Xs: np.ndarray,
    ys: np.ndarray,
    levels: np.ndarray,
):
    """Summed-over-heads mean pinball loss and its parameter gradients.

    Xs and ys are already standardized. Returns (loss, (gw1, gb1, gw2, gb2)).
    Subgradient convention at the kink: residual zero takes the negative
    branch slope (1 - tau).
    """
    n = Xs.shape[0]
    pre = Xs @ w1.T + b1
    hidden = np.maximum(pre, 0.0)
    out = hidden @ w2.T + b2  # (n, k)
    resid = ys[:, None] - out
    loss = float(
        np.sum(np.mean(np.maximum(levels * resid, (levels - 1.0) * resid), axis=0))
    )
    # d(loss)/d(out): -tau where resid > 0, (1 - tau) otherwise, / n.
    dout = np.where(resid > 0, -levels, 1.0 - levels) / n
    gw2 = dout.T @ hidden
    gb2 = dout.sum(axis=0)
    dhidden = (dout @ w2) * (pre > 0)
    gw1 = dhidden.T @ Xs
    gb1 = dhidden.sum(axis=0)
    return loss, (gw1, gb1, gw2, gb2)


def fit_mlp_qr(
    X: np.ndarray,
    y: np.ndarray,
    levels,
    hidden: int = MLP_DEFAULTS["hidden"],
    epochs: int = MLP_DEFAULTS["epochs"],
    lr: float = MLP_DEFAULTS["lr"],
    batch: int = MLP_DEFAULTS["batch"],
    seed: int = 0,
) -> MlpModel:
    """Minibatch SGD with seeded shuffling; deterministic for a fixed seed."""
    levels = tuple(float(t) for t in levels)
    if any(not 0.0 < t < 1.0 for t in levels):
        raise ValueError("levels must lie in (0, 1)")
    if list(levels) != sorted(levels):
        raise ValueError("levels must be increasing")
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64)
    n, d = X.shape
    k = len(levels)

    x_mean = X.mean(axis=0)
    x_sd = np.where(X.std(axis=0) > 0, X.std(axis=0), 1.0)
    y_mean = float(y.mean())
    y_sd = float(y.std()) or 1.0
    Xs = (X - x_mean) / x_sd
    ys = (y - y_mean) / y_sd

    rng = np.random.default_rng(seed)
    w1 = rng.normal(0.0, np.sqrt(2.0 / d), size=(hidden, d))
    b1 = np.zeros(hidden)
    w2 = rng.normal(0.0, np.sqrt(1.0 / hidden), size=(k, hidden))
    b2 = np.quantile(ys, levels, method="inverted_cdf").astype(np.float64)

    lv = np.asarray(levels, dtype=np.float64)
    for epoch in range(epochs):
        order = rng.permutation(n)
        for start in range(0, n, batch):
            rows = order[start : start + batch]
            loss, (gw1, gb1, gw2, gb2) = loss_and_grads(
                w1, b1, w2, b2, Xs[rows], ys[rows], lv
            )
            if not np.isfinite(loss):
                raise DivergenceError(
                    f"non-finite training loss at epoch {epoch}"
                )
            w1 -= lr * gw1
            b1 -= lr * gb1
            w2 -= lr * gw2
            b2 -= lr * gb2
    return MlpModel(
        levels=levels,
        w1=w1,
        b1=b1,
        w2=w2,
        b2=b2,
        x_mean=x_mean,
        x_sd=x_sd,
        y_mean=y_mean,
        y_sd=y_sd,
        seed=seed,
    )
