import numpy as np
import pytest

from vitalsqr.models import (
    DomainStatus,
    LinearModel,
    QuantileModelBundle,
    fit_bundle,
    predict_band,
)


@pytest.fixture(scope="module")
def ols_bundle(small_pairs_arrays):
    age, bt, hr = small_pairs_arrays
    return fit_bundle("ols", age, bt, hr, seed=1)


@pytest.fixture(scope="module")
def gbm_bundle(small_pairs_arrays):
    age, bt, hr = small_pairs_arrays
    return fit_bundle(
        "gbm", age, bt, hr, seed=1, params={"n_trees": 50, "min_leaf": 10}
    )


def test_bounds_come_from_training_data(ols_bundle, small_pairs_arrays):
    age, bt, _ = small_pairs_arrays
    assert ols_bundle.age_bounds == (float(age.min()), float(age.max()))
    assert ols_bundle.bt_bounds == (float(bt.min()), float(bt.max()))


def test_out_of_domain_age(gbm_bundle):
    beyond = gbm_bundle.age_bounds[1] + 1.0
    band = predict_band(gbm_bundle, beyond, 37.0)
    assert band.domain_status is DomainStatus.OUT_OF_DOMAIN
    assert band.quantiles_bpm is None
    assert band.in_range is None


def test_out_of_domain_bt(gbm_bundle):
    band = predict_band(gbm_bundle, 60.0, gbm_bundle.bt_bounds[0] - 0.2)
    assert band.domain_status is DomainStatus.OUT_OF_DOMAIN


def test_band_nondecreasing(gbm_bundle):
    band = predict_band(gbm_bundle, 60.0, 37.5)
    values = band.quantiles_bpm
    assert values is not None
    assert all(a <= b for a, b in zip(values, values[1:]))


def test_in_range_closed_at_bounds(gbm_bundle):
    probe = predict_band(gbm_bundle, 60.0, 37.5)
    q_low = probe.quantiles_bpm[0]
    at_bound = predict_band(gbm_bundle, 60.0, 37.5, observed_hr=q_low)
    assert at_bound.in_range is True
    below = predict_band(gbm_bundle, 60.0, 37.5, observed_hr=q_low - 0.01)
    assert below.in_range is False


def test_rearrangement_sorts_crossing_predictions():
    # Hand-built per-level models that cross: at x=(age=10, bt=37) the
    # 0.25 model predicts above the 0.75 model.
    lo = LinearModel(("age_months", "bt_celsius", "age_bt"), (0.0, 0.0, 0.0), 120.0)
    hi = LinearModel(("age_months", "bt_celsius", "age_bt"), (0.0, 0.0, 0.0), 100.0)
    bundle = QuantileModelBundle(
        family="qr",
        levels=(0.25, 0.75),
        feature_set="interaction",
        models={0.25: lo, 0.75: hi},
        shared_model=None,
        age_bounds=(0.0, 216.0),
        bt_bounds=(33.0, 41.0),
        seed=0,
        params={},
    )
    band = predict_band(bundle, 10.0, 37.0)
    assert band.quantiles_bpm == (100.0, 120.0)


def test_ols_bundle_predicts_same_value_at_every_level(ols_bundle):
    band = predict_band(ols_bundle, 60.0, 37.5)
    assert len(set(band.quantiles_bpm)) == 1


def test_levels_validated(small_pairs_arrays):
    age, bt, hr = small_pairs_arrays
    with pytest.raises(ValueError):
        fit_bundle("gbm", age, bt, hr, levels=(0.5, 0.25))
    with pytest.raises(ValueError):
        fit_bundle("nope", age, bt, hr)


def test_rf_and_mlp_bundles_answer_every_level(small_pairs_arrays):
    age, bt, hr = small_pairs_arrays
    rf = fit_bundle("rf", age, bt, hr, seed=2, params={"n_trees": 10, "depth": 4})
    mlp = fit_bundle("mlp", age, bt, hr, seed=2, params={"epochs": 5})
    for bundle in (rf, mlp):
        band = predict_band(bundle, 60.0, 37.5)
        assert band.domain_status is DomainStatus.IN_DOMAIN
        assert len(band.quantiles_bpm) == 5
