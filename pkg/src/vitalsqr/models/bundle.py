"""Per-quantile model bundles and band prediction.

A bundle owns one fitted model per level (or one shared model: the
least-squares kernel predicts the same value at every level, the forest
and the multi-head network answer any level from a single fit) plus the
age/BT bounds of its training data. Queries outside those bounds are
refused rather than extrapolated.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .features import FEATURE_SETS, build_features
from .forest import RF_DEFAULTS, RfModel, fit_rf_quantile
from .gbm import GBM_DEFAULTS, GbmModel, fit_gbm_qr
from .linear import LinearModel, SvrModel, fit_linear_qr, fit_ols
from .mlp import MLP_DEFAULTS, MlpModel, fit_mlp_qr

DEFAULT_LEVELS = (0.05, 0.25, 0.50, 0.75, 0.95)

# family -> (feature set, needs per-level fits)
QUANTILE_FAMILIES: dict[str, str] = {
    "ols": "interaction",
    "qr": "interaction",
    "statistical": "curved_age",
    "gbm": "raw",
    "rf": "raw",
    "mlp": "raw",
}

POINT_FAMILIES: dict[str, str] = {
    "lr": "age",
    "mlr": "interaction",
    "pr1": "interaction",
    "svr": "interaction",
    "ols": "interaction",
    "statistical": "curved_age",
}


class DomainStatus(enum.Enum):
    IN_DOMAIN = "InDomain"
    OUT_OF_DOMAIN = "OutOfDomain"


@dataclass(frozen=True)
class PredictionBand:
    levels: tuple[float, ...]
    quantiles_bpm: tuple[float, ...] | None
    domain_status: DomainStatus
    in_range: bool | None


@dataclass
class QuantileModelBundle:
    family: str
    levels: tuple[float, ...]
    feature_set: str
    models: dict[float, object] | None  # per-level models
    shared_model: object | None  # one model answering every level
    age_bounds: tuple[float, float]
    bt_bounds: tuple[float, float]
    seed: int
    params: dict[str, float | int]

    def predict_level(self, tau: float, age_months, bt_celsius) -> np.ndarray:
        X = build_features(age_months, bt_celsius, self.feature_set)
        if self.models is not None:
            model = self.models[tau]
            if isinstance(model, GbmModel):
                return model.predict(X)
            return model.predict(X)
        model = self.shared_model
        if isinstance(model, RfModel):
            return model.predict_quantile(X, tau)
        if isinstance(model, MlpModel):
            return model.predict(X, tau)
        # Least-squares kernel: one point prediction serves every level.
        return model.predict(X)

    def predict_matrix(self, age_months, bt_celsius) -> np.ndarray:
        """(n, n_levels) raw per-level predictions, before rearrangement."""
        cols = [
            self.predict_level(tau, age_months, bt_celsius)
            for tau in self.levels
        ]
        return np.column_stack(cols)


def training_bounds(age_months: np.ndarray, bt_celsius: np.ndarray):
    age = np.asarray(age_months, dtype=np.float64)
    bt = np.asarray(bt_celsius, dtype=np.float64)
    return (float(age.min()), float(age.max())), (float(bt.min()), float(bt.max()))


def fit_bundle(
    family: str,
    age_months: np.ndarray,
    bt_celsius: np.ndarray,
    hr_bpm: np.ndarray,
    levels=DEFAULT_LEVELS,
    seed: int = 0,
    params: dict | None = None,
) -> QuantileModelBundle:
    """Train one quantile bundle; params overrides the family defaults."""
    if family not in QUANTILE_FAMILIES:
        raise ValueError(f"unknown quantile family {family!r}")
    levels = tuple(float(t) for t in levels)
    if list(levels) != sorted(set(levels)):
        raise ValueError("levels must be strictly increasing")
    feature_set = QUANTILE_FAMILIES[family]
    X = build_features(age_months, bt_celsius, feature_set)
    y = np.asarray(hr_bpm, dtype=np.float64)
    names = FEATURE_SETS[feature_set]
    age_bounds, bt_bounds = training_bounds(age_months, bt_celsius)

    params = dict(params or {})
    models: dict[float, object] | None = None
    shared: object | None = None
    if family == "ols":
        shared = fit_ols(X, y, feature_names=names)
    elif family in ("qr", "statistical"):
        models = {
            tau: fit_linear_qr(X, y, tau, feature_names=names) for tau in levels
        }
    elif family == "gbm":
        cfg = {**GBM_DEFAULTS, **params}
        models = {
            tau: fit_gbm_qr(
                X,
                y,
                tau,
                n_trees=int(cfg["n_trees"]),
                depth=int(cfg["depth"]),
                learning_rate=float(cfg["learning_rate"]),
                min_leaf=int(cfg["min_leaf"]),
            )
            for tau in levels
        }
        params = cfg
    elif family == "rf":
        cfg = {**RF_DEFAULTS, **params}
        shared = fit_rf_quantile(
            X,
            y,
            n_trees=int(cfg["n_trees"]),
            depth=int(cfg["depth"]),
            min_leaf=int(cfg["min_leaf"]),
            bootstrap=bool(cfg["bootstrap"]),
            seed=seed,
        )
        params = cfg
    elif family == "mlp":
        cfg = {**MLP_DEFAULTS, **params}
        shared = fit_mlp_qr(
            X,
            y,
            levels,
            hidden=int(cfg["hidden"]),
            epochs=int(cfg["epochs"]),
            lr=float(cfg["lr"]),
            batch=int(cfg["batch"]),
            seed=seed,
        )
        params = cfg
    return QuantileModelBundle(
        family=family,
        levels=levels,
        feature_set=feature_set,
        models=models,
        shared_model=shared,
        age_bounds=age_bounds,
        bt_bounds=bt_bounds,
        seed=seed,
        params=params,
    )


def predict_band(
    bundle: QuantileModelBundle,
    age_months: float,
    bt_celsius: float,
    observed_hr: float | None = None,
) -> PredictionBand:
    """Percentile predictions for one query, with the in-range verdict.

    Out-of-bounds age or BT yields OutOfDomain with no predictions.
    Raw per-level predictions are rearranged (sorted ascending) so the
    reported band never crosses; in_range tests the closed interval
    between the lowest and highest level.
    """
    (age_lo, age_hi) = bundle.age_bounds
    (bt_lo, bt_hi) = bundle.bt_bounds
    if not (age_lo <= age_months <= age_hi) or not (bt_lo <= bt_celsius <= bt_hi):
        return PredictionBand(
            levels=bundle.levels,
            quantiles_bpm=None,
            domain_status=DomainStatus.OUT_OF_DOMAIN,
            in_range=None,
        )
    raw = bundle.predict_matrix([age_months], [bt_celsius])[0]
    values = tuple(float(v) for v in np.sort(raw))
    in_range = None
    if observed_hr is not None:
        in_range = bool(values[0] <= observed_hr <= values[-1])
    return PredictionBand(
        levels=bundle.levels,
        quantiles_bpm=values,
        domain_status=DomainStatus.IN_DOMAIN,
        in_range=in_range,
    )
