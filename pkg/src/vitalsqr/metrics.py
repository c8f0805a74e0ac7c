"""Evaluation metrics: R-squared, MSE, pinball loss, and band coverage."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class EvalResult:
    r2: float | None
    mse: float | None
    per_level_pinball: dict[float, float]
    total_quantile_loss: float | None
    coverage_05_95: float | None


def evaluate_quantile_predictions(
    y_true,
    predictions_by_level: dict[float, "np.ndarray"],
    point_predictions=None,
) -> EvalResult:
    """Bundle evaluation in one pass: per-level pinball means, their
    unweighted average, coverage of the closed band between the lowest
    and highest level, and (when point predictions are supplied) R-squared
    and MSE.
    """
    if not predictions_by_level:
        raise ValueError("no quantile levels supplied")
    per_level = {
        float(tau): mean_pinball(y_true, preds, tau)
        for tau, preds in predictions_by_level.items()
    }
    levels = sorted(per_level)
    cov = coverage(
        y_true,
        predictions_by_level[levels[0]],
        predictions_by_level[levels[-1]],
    )
    r2_value = mse_value = None
    if point_predictions is not None:
        r2_value = r2(y_true, point_predictions)
        mse_value = mse(y_true, point_predictions)
    return EvalResult(
        r2=r2_value,
        mse=mse_value,
        per_level_pinball=per_level,
        total_quantile_loss=total_quantile_loss(per_level),
        coverage_05_95=cov,
    )


def _paired(y_true, y_pred) -> tuple[np.ndarray, np.ndarray]:
    yt = np.asarray(y_true, dtype=np.float64)
    yp = np.asarray(y_pred, dtype=np.float64)
    if yt.shape != yp.shape or yt.ndim != 1:
        raise ValueError(f"length mismatch: {yt.shape} vs {yp.shape}")
    if yt.size == 0:
        raise ValueError("empty input")
    return yt, yp


def r2(y_true, y_pred) -> float:
    """Coefficient of determination, 1 - SSR/SST; negative for bad fits."""
    yt, yp = _paired(y_true, y_pred)
    sst = float(np.sum((yt - yt.mean()) ** 2))
    if sst == 0.0:
        raise ValueError("r2 undefined: all true values identical")
    ssr = float(np.sum((yt - yp) ** 2))
    return 1.0 - ssr / sst


def mse(y_true, y_pred) -> float:
    """Mean squared difference between true and predicted values."""
    yt, yp = _paired(y_true, y_pred)
    return float(np.mean((yt - yp) ** 2))


def pinball(y: float, y_hat: float, tau: float) -> float:
    """Quantile loss at level tau: max(tau*(y-y_hat), (tau-1)*(y-y_hat))."""
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must be in (0, 1), got {tau}")
    r = y - y_hat
    return max(tau * r, (tau - 1.0) * r)


def mean_pinball(y_true, y_pred, tau: float) -> float:
    """Mean quantile loss over a sample."""
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must be in (0, 1), got {tau}")
    yt, yp = _paired(y_true, y_pred)
    r = yt - yp
    return float(np.mean(np.maximum(tau * r, (tau - 1.0) * r)))


def total_quantile_loss(per_level_means: dict[float, float]) -> float:
    """Unweighted mean of the per-level mean losses."""
    if not per_level_means:
        raise ValueError("no quantile levels supplied")
    return float(np.mean(list(per_level_means.values())))


def coverage(y_true, q_low, q_high) -> float:
    """Fraction of observations inside the closed [q_low, q_high] band."""
    yt = np.asarray(y_true, dtype=np.float64)
    lo = np.asarray(q_low, dtype=np.float64)
    hi = np.asarray(q_high, dtype=np.float64)
    if not (yt.shape == lo.shape == hi.shape) or yt.ndim != 1:
        raise ValueError("length mismatch between truths and band edges")
    if yt.size == 0:
        raise ValueError("empty input")
    return float(np.mean((lo <= yt) & (yt <= hi)))


def empirical_quantile(values, tau: float) -> float:
    """Smallest sample value v with at least a tau fraction of mass at or
    below v (the lower empirical quantile); this constant minimizes the
    mean pinball loss at tau over the sample.
    """
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must be in (0, 1), got {tau}")
    v = np.asarray(values, dtype=np.float64)
    n = v.size
    if n == 0:
        raise ValueError("empty sample")
    # Guard against k*tau landing an ulp above an exact integer.
    k = int(np.ceil(n * tau - 1e-9))
    k = min(max(k, 1), n)
    return float(np.partition(v, k - 1)[k - 1])
