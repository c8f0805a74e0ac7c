"""Linear model families: least squares, quantile regression by averaged
subgradient descent, the curved-age quantile equation, and linear
epsilon-insensitive regression.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .. import _kernels
from ..metrics import empirical_quantile, mean_pinball

QR_MAX_ITER = 50_000
QR_CHECK_EVERY = 100
QR_TOL = 1e-7
QR_STEP_SCALE = 0.2

SVR_MAX_ITER = 50_000
SVR_STEP_SCALE = 0.05


class RankDeficiencyError(ValueError):
    """Design matrix has linearly dependent columns."""


@dataclass(frozen=True)
class LinearModel:
    feature_names: tuple[str, ...]
    coefficients: tuple[float, ...]
    intercept: float
    # Populated by the quantile fits; None for least-squares models.
    tau: float | None = None
    converged: bool = True
    final_loss: float | None = None

    def __post_init__(self) -> None:
        if len(self.coefficients) != len(self.feature_names):
            raise ValueError("coefficient count must match feature count")

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != len(self.coefficients):
            raise ValueError(
                f"expected {len(self.coefficients)} features, got {X.shape[1]}"
            )
        return X @ np.asarray(self.coefficients) + self.intercept


def _design(X: np.ndarray) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    return np.column_stack([np.ones(X.shape[0]), X])


def fit_ols(X: np.ndarray, y: np.ndarray, feature_names=None) -> LinearModel:
    """Least squares through the normal equations (SPD solve).

    Raises RankDeficiencyError when the design matrix (with intercept)
    is column-rank deficient.
    """
    Z = _design(X)
    y = np.asarray(y, dtype=np.float64)
    if Z.shape[0] < Z.shape[1]:
        raise RankDeficiencyError("fewer rows than coefficients")
    if np.linalg.matrix_rank(Z) < Z.shape[1]:
        raise RankDeficiencyError("design matrix has dependent columns")
    gram = Z.T @ Z
    rhs = Z.T @ y
    try:
        coefs = np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError as exc:
        raise RankDeficiencyError(str(exc)) from exc
    names = _names(feature_names, Z.shape[1] - 1)
    return LinearModel(names, tuple(float(c) for c in coefs[1:]), float(coefs[0]))


def _names(feature_names, p: int) -> tuple[str, ...]:
    if feature_names is None:
        return tuple(f"x{i}" for i in range(p))
    names = tuple(feature_names)
    if len(names) != p:
        raise ValueError("feature_names length mismatch")
    return names


def _standardize(X: np.ndarray):
    mu = X.mean(axis=0)
    sd = X.std(axis=0)
    sd = np.where(sd > 0, sd, 1.0)
    return (X - mu) / sd, mu, sd


def fit_linear_qr(
    X: np.ndarray,
    y: np.ndarray,
    tau: float,
    feature_names=None,
    max_iter: int = QR_MAX_ITER,
) -> LinearModel:
    """Quantile regression by averaged subgradient descent.

    Features and targets are standardized internally; steps decay as
    c/sqrt(t) and the best probed iterate is kept. The descent stops when
    the probed loss improves by less than 1e-7 across a 100-iteration
    check window, or at the iteration cap, whichever comes first. The
    intercept is then re-centered to the exact tau-quantile of the slope
    residuals, which can only lower the loss. Non-convergence is recorded
    on the model (converged flag and final training loss), not raised.
    """
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must be in (0, 1), got {tau}")
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64)
    n, p = X.shape
    if n < p + 1:
        raise ValueError("need at least feature-count + 1 rows")
    names = _names(feature_names, p)

    if np.ptp(y) == 0.0:
        return LinearModel(names, (0.0,) * p, float(y[0]), tau=tau, final_loss=0.0)

    Xs, mu, sd = _standardize(X)
    y_shift = empirical_quantile(y, tau)
    y_scale = float(np.std(y))
    if y_scale == 0.0:
        y_scale = 1.0
    ys = (y - y_shift) / y_scale

    Z = np.ascontiguousarray(np.column_stack([np.ones(n), Xs]))
    w0 = np.zeros(p + 1)
    w, _, iters = _kernels.qr_descent(
        Z, ys, w0, tau, QR_STEP_SCALE, max_iter, QR_CHECK_EVERY, QR_TOL
    )
    w = np.asarray(w)

    # Exact 1-D refinement: optimal intercept given slopes is the
    # tau-quantile of the slope residuals.
    slopes_std = w[1:]
    resid_no_intercept = ys - Xs @ slopes_std
    w[0] = empirical_quantile(resid_no_intercept, tau)

    coefs = y_scale * slopes_std / sd
    intercept = y_scale * (w[0] - float(np.dot(slopes_std, mu / sd))) + y_shift
    model = LinearModel(
        names,
        tuple(float(c) for c in coefs),
        float(intercept),
        tau=tau,
        converged=iters < max_iter,
    )
    loss = mean_pinball(y, model.predict(X), tau)
    return replace(model, final_loss=float(loss))


def fit_statistical(
    X_curved: np.ndarray, y: np.ndarray, tau: float = 0.5
) -> LinearModel:
    """Quantile fit of the curved-age equation hr ~ bt, age, age^2.

    X_curved columns must be [bt, age, age^2]; the returned coefficients
    line up with those names.
    """
    return fit_linear_qr(
        X_curved, y, tau, feature_names=("bt_celsius", "age_months", "age_sq")
    )


@dataclass(frozen=True)
class SvrModel:
    """Linear epsilon-insensitive model. The optimized objective is
    0.5*||w_std||^2 + c_reg * sum(hinge) on internally standardized
    features; objective_value reproduces that number for any parameters
    so independent searches can score candidates identically.
    """

    feature_names: tuple[str, ...]
    coefficients: tuple[float, ...]
    intercept: float
    epsilon: float
    c_reg: float
    x_mean: tuple[float, ...]
    x_sd: tuple[float, ...]
    converged: bool = True
    final_objective: float | None = None

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        return X @ np.asarray(self.coefficients) + self.intercept

    def standardized_params(self) -> np.ndarray:
        sd = np.asarray(self.x_sd)
        mu = np.asarray(self.x_mean)
        w = np.asarray(self.coefficients) * sd
        b = self.intercept + float(np.dot(self.coefficients, mu))
        return np.concatenate([[b], w])

    def objective_value(self, X: np.ndarray, y: np.ndarray) -> float:
        Xs = (np.atleast_2d(np.asarray(X, dtype=np.float64)) - self.x_mean) / self.x_sd
        Z = np.column_stack([np.ones(Xs.shape[0]), Xs])
        return svr_objective(
            Z, np.asarray(y, dtype=np.float64), self.standardized_params(),
            self.epsilon, self.c_reg,
        )


def svr_objective(Z, y, w, epsilon: float, c_reg: float) -> float:
    r = y - Z @ w
    hinge = np.maximum(0.0, np.abs(r) - epsilon)
    return float(0.5 * np.dot(w[1:], w[1:]) + c_reg * np.sum(hinge))


def fit_linear_svr(
    X: np.ndarray,
    y: np.ndarray,
    epsilon: float = 0.5,
    c_reg: float = 1.0,
    feature_names=None,
    max_iter: int = SVR_MAX_ITER,
) -> SvrModel:
    """Linear SVR by subgradient descent on the primal objective."""
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    if c_reg <= 0:
        raise ValueError("c_reg must be > 0")
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64)
    n, p = X.shape
    names = _names(feature_names, p)

    Xs, mu, sd = _standardize(X)
    Z = np.ascontiguousarray(np.column_stack([np.ones(n), Xs]))
    w0 = np.zeros(p + 1)
    w0[0] = float(np.median(y))
    # The hinge term is a sum over rows, so its subgradient scales with
    # n * c_reg; normalize the step so early moves are O(sd of y).
    y_spread = float(np.std(y))
    step_scale = SVR_STEP_SCALE * max(y_spread, 1e-8) / (c_reg * n)
    w, obj, iters = _kernels.svr_descent(
        Z, y, w0, epsilon, c_reg, step_scale, max_iter, QR_CHECK_EVERY, QR_TOL
    )
    w = np.asarray(w)
    coefs = w[1:] / sd
    intercept = float(w[0] - np.dot(w[1:], mu / sd))
    return SvrModel(
        names,
        tuple(float(c) for c in coefs),
        intercept,
        epsilon,
        c_reg,
        tuple(float(m) for m in mu),
        tuple(float(s) for s in sd),
        converged=iters < max_iter,
        final_objective=float(obj),
    )
