"""Feature construction from (age_months, bt_celsius) query points.

Each model family declares one of these feature sets:
  age          -> [age]                      (single-input linear baseline)
  interaction  -> [age, bt, age*bt]          (multi-input linear families)
  curved_age   -> [bt, age, age^2]           (the quantile curve equation)
  raw          -> [age, bt]                  (tree and network families)
"""

from __future__ import annotations

import numpy as np

FEATURE_SETS: dict[str, tuple[str, ...]] = {
    "age": ("age_months",),
    "interaction": ("age_months", "bt_celsius", "age_bt"),
    "curved_age": ("bt_celsius", "age_months", "age_sq"),
    "raw": ("age_months", "bt_celsius"),
}


def build_features(age_months, bt_celsius, feature_set: str) -> np.ndarray:
    """Design matrix (without intercept) for the given feature set."""
    age = np.atleast_1d(np.asarray(age_months, dtype=np.float64))
    bt = np.atleast_1d(np.asarray(bt_celsius, dtype=np.float64))
    if feature_set == "age":
        return age[:, None].copy()
    if feature_set == "interaction":
        return np.column_stack([age, bt, age * bt])
    if feature_set == "curved_age":
        return np.column_stack([bt, age, age * age])
    if feature_set == "raw":
        return np.column_stack([age, bt])
    raise ValueError(f"unknown feature set {feature_set!r}")
