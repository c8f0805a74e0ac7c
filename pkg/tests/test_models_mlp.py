import numpy as np
import pytest

from vitalsqr.metrics import mean_pinball
from vitalsqr.models import DivergenceError, fit_linear_qr, fit_mlp_qr
from vitalsqr.models.mlp import loss_and_grads


def _flat(params):
    return np.concatenate([p.ravel() for p in params])


def test_gradient_matches_central_differences():
    rng = np.random.default_rng(0)
    d, h, k = 2, 4, 3
    levels = np.array([0.25, 0.5, 0.75])
    Xs = rng.normal(size=(3, d))
    ys = rng.normal(size=3) * 3.0
    # resample until residuals and hidden pre-activations are all well
    # away from the kinks, so finite differences are valid
    for attempt in range(100):
        w1 = rng.normal(0, 1.0, size=(h, d))
        b1 = rng.normal(0, 0.5, size=h)
        w2 = rng.normal(0, 1.0, size=(k, h))
        b2 = rng.normal(0, 0.5, size=k)
        pre = Xs @ w1.T + b1
        out = np.maximum(pre, 0.0) @ w2.T + b2
        resid = ys[:, None] - out
        if np.min(np.abs(resid)) >= 0.1 and np.min(np.abs(pre)) >= 0.1:
            break
    else:
        pytest.fail("could not find a kink-free configuration")

    loss0, grads = loss_and_grads(w1, b1, w2, b2, Xs, ys, levels)
    analytic = _flat(grads)

    eps = 1e-5
    params = [w1, b1, w2, b2]
    numeric = np.empty_like(analytic)
    i = 0
    for p in params:
        flat = p.ravel()
        for j in range(flat.size):
            orig = flat[j]
            flat[j] = orig + eps
            lp, _ = loss_and_grads(w1, b1, w2, b2, Xs, ys, levels)
            flat[j] = orig - eps
            lm, _ = loss_and_grads(w1, b1, w2, b2, Xs, ys, levels)
            flat[j] = orig
            numeric[i] = (lp - lm) / (2 * eps)
            i += 1
    denom = np.maximum(np.abs(numeric), np.abs(analytic))
    mask = denom > 1e-12
    rel = np.abs(analytic - numeric)[mask] / denom[mask]
    assert np.max(rel) < 1e-4


def test_seed_determinism():
    rng = np.random.default_rng(1)
    X = rng.uniform(size=(120, 2))
    y = rng.normal(size=120)
    a = fit_mlp_qr(X, y, [0.5], epochs=5, seed=7)
    b = fit_mlp_qr(X, y, [0.5], epochs=5, seed=7)
    np.testing.assert_array_equal(a.w1, b.w1)
    np.testing.assert_array_equal(a.w2, b.w2)
    np.testing.assert_array_equal(a.b1, b.b1)
    np.testing.assert_array_equal(a.b2, b.b2)


def test_linear_data_close_to_linear_qr():
    rng = np.random.default_rng(2)
    n = 1200
    X = np.column_stack([rng.uniform(0, 10, n), rng.uniform(0, 5, n)])
    y = 20 + 3 * X[:, 0] - 2 * X[:, 1] + rng.normal(0, 1.0, n)
    X_test = np.column_stack([rng.uniform(0, 10, 400), rng.uniform(0, 5, 400)])
    y_test = 20 + 3 * X_test[:, 0] - 2 * X_test[:, 1] + rng.normal(0, 1.0, 400)

    mlp = fit_mlp_qr(X, y, [0.5], epochs=300, seed=3)
    linear = fit_linear_qr(X, y, 0.5)
    mlp_loss = mean_pinball(y_test, mlp.predict(X_test, 0.5), 0.5)
    lin_loss = mean_pinball(y_test, linear.predict(X_test), 0.5)
    assert mlp_loss <= lin_loss * 1.10


def test_heads_ordered_and_validated():
    X = np.zeros((40, 2))
    y = np.zeros(40)
    with pytest.raises(ValueError):
        fit_mlp_qr(X, y, [0.5, 0.25])
    with pytest.raises(ValueError):
        fit_mlp_qr(X, y, [0.0, 0.5])


def test_divergence_detection():
    rng = np.random.default_rng(4)
    X = rng.uniform(size=(100, 2))
    y = rng.normal(size=100)
    with np.errstate(over="ignore", invalid="ignore"):
        with pytest.raises(DivergenceError):
            fit_mlp_qr(X, y, [0.5], epochs=50, lr=1e12, seed=0)


def test_unknown_level_on_predict():
    rng = np.random.default_rng(5)
    X = rng.uniform(size=(60, 2))
    model = fit_mlp_qr(X, rng.normal(size=60), [0.25, 0.75], epochs=2, seed=0)
    with pytest.raises(ValueError):
        model.predict(X, 0.5)
