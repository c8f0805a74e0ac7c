import numpy as np
import pytest

from vitalsqr.models import (
    CorruptModelError,
    VersionMismatchError,
    fit_bundle,
    load_model,
    read_header,
    save_model,
)

FAMILY_PARAMS = {
    "ols": {},
    "qr": {},
    "statistical": {},
    "gbm": {"n_trees": 20, "min_leaf": 10},
    "rf": {"n_trees": 8, "depth": 5},
    "mlp": {"epochs": 5},
}


@pytest.fixture(scope="module")
def query_grid():
    rng = np.random.default_rng(99)
    age = rng.uniform(5, 200, 200)
    bt = rng.uniform(33.5, 40.5, 200)
    return age, bt


@pytest.mark.parametrize("family", sorted(FAMILY_PARAMS))
def test_round_trip_is_exact(family, small_pairs_arrays, query_grid, tmp_path):
    age, bt, hr = small_pairs_arrays
    bundle = fit_bundle(
        family, age, bt, hr, seed=3, params=FAMILY_PARAMS[family]
    )
    path = tmp_path / f"{family}.model"
    save_model(bundle, str(path))
    loaded = load_model(str(path))

    q_age, q_bt = query_grid
    before = bundle.predict_matrix(q_age, q_bt)
    after = loaded.predict_matrix(q_age, q_bt)
    assert np.max(np.abs(before - after)) < 1e-12
    assert loaded.age_bounds == bundle.age_bounds
    assert loaded.bt_bounds == bundle.bt_bounds
    assert loaded.levels == bundle.levels


def test_header_round_trip(small_pairs_arrays, tmp_path):
    age, bt, hr = small_pairs_arrays
    bundle = fit_bundle("ols", age, bt, hr, seed=3)
    path = tmp_path / "m.model"
    save_model(bundle, str(path))
    header = read_header(str(path))
    assert header["family"] == "ols"
    assert header["seed"] == "3"


def test_version_mismatch(small_pairs_arrays, tmp_path):
    age, bt, hr = small_pairs_arrays
    path = tmp_path / "m.model"
    save_model(fit_bundle("ols", age, bt, hr), str(path))
    text = path.read_text()
    path.write_text(text.replace("v=1", "v=9", 1))
    with pytest.raises(VersionMismatchError):
        load_model(str(path))


def test_not_a_model_file(tmp_path):
    path = tmp_path / "junk.txt"
    path.write_text("hello world\n")
    with pytest.raises(VersionMismatchError):
        load_model(str(path))


def test_truncated_file_reports_byte_offset(small_pairs_arrays, tmp_path):
    age, bt, hr = small_pairs_arrays
    bundle = fit_bundle("gbm", age, bt, hr, params={"n_trees": 5, "min_leaf": 10})
    path = tmp_path / "m.model"
    save_model(bundle, str(path))
    data = path.read_bytes()
    cut = int(len(data) * 0.6)
    path.write_bytes(data[:cut])
    with pytest.raises(CorruptModelError) as exc_info:
        load_model(str(path))
    assert exc_info.value.byte_offset <= cut
    assert "byte" in str(exc_info.value)


def test_garbled_body(small_pairs_arrays, tmp_path):
    age, bt, hr = small_pairs_arrays
    path = tmp_path / "m.model"
    save_model(fit_bundle("qr", age, bt, hr), str(path))
    lines = path.read_text().splitlines()
    lines[2] = "linear level=0.25 intercept=notanumber coefs=1,2,3"
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(CorruptModelError):
        load_model(str(path))
