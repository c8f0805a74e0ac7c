"""Model families, quantile bundles, and persistence."""

from .bundle import (
    DEFAULT_LEVELS,
    DomainStatus,
    POINT_FAMILIES,
    PredictionBand,
    QUANTILE_FAMILIES,
    QuantileModelBundle,
    fit_bundle,
    predict_band,
)
from .features import FEATURE_SETS, build_features
from .forest import RF_DEFAULTS, RfModel, fit_rf_quantile
from .gbm import GBM_DEFAULTS, GbmModel, fit_gbm_qr
from .linear import (
    LinearModel,
    RankDeficiencyError,
    SvrModel,
    fit_linear_qr,
    fit_linear_svr,
    fit_ols,
    fit_statistical,
)
from .mlp import MLP_DEFAULTS, DivergenceError, MlpModel, fit_mlp_qr
from .persist import (
    CorruptModelError,
    ModelFormatError,
    VersionMismatchError,
    load_model,
    read_header,
    save_model,
)
from .tree import RegressionTree, grow_tree

__all__ = [
    "DEFAULT_LEVELS",
    "DomainStatus",
    "FEATURE_SETS",
    "GBM_DEFAULTS",
    "GbmModel",
    "LinearModel",
    "MLP_DEFAULTS",
    "DivergenceError",
    "MlpModel",
    "ModelFormatError",
    "CorruptModelError",
    "VersionMismatchError",
    "POINT_FAMILIES",
    "PredictionBand",
    "QUANTILE_FAMILIES",
    "QuantileModelBundle",
    "RF_DEFAULTS",
    "RankDeficiencyError",
    "RegressionTree",
    "RfModel",
    "SvrModel",
    "build_features",
    "fit_bundle",
    "fit_gbm_qr",
    "fit_linear_qr",
    "fit_linear_svr",
    "fit_mlp_qr",
    "fit_ols",
    "fit_rf_quantile",
    "fit_statistical",
    "grow_tree",
    "load_model",
    "predict_band",
    "read_header",
    "save_model",
]
