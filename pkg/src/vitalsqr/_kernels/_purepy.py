"""Numpy fallback for the hot kernels.

Arithmetic deliberately mirrors the compiled extension: cumulative sums are
sequential (np.cumsum accumulates left to right, like the C loop), the same
expressions are evaluated per candidate, and first-maximum tie-breaking is
used, so both backends return identical split decisions on identical input.
"""

from __future__ import annotations

import numpy as np

BACKEND = "purepy"


def best_split(x: np.ndarray, y: np.ndarray, min_leaf: int) -> tuple[int, float]:
    """Best squared-error split of a node along one presorted feature.

    x is sorted ascending and y is aligned with it. Candidate positions i
    send samples [0..i] left and [i+1..] right; a position is valid when
    both sides keep at least min_leaf samples and x[i] != x[i+1]. Returns
    (pos, score) where score = left_sum^2/n_left + right_sum^2/n_right
    maximized over valid positions (first maximum wins), or (-1, -inf)
    when no valid split exists.
    """
    n = x.shape[0]
    if n < 2 * min_leaf:
        return -1, -np.inf
    cs = np.cumsum(y)
    total = cs[-1]
    left_n = np.arange(1, n, dtype=np.float64)
    left_sum = cs[:-1]
    right_sum = total - left_sum
    gains = left_sum * left_sum / left_n + right_sum * right_sum / (n - left_n)
    valid = x[:-1] != x[1:]
    valid[: min_leaf - 1] = False
    if min_leaf > 1:
        valid[n - min_leaf :] = False
    else:
        valid[n - 1 :] = False
    if not valid.any():
        return -1, -np.inf
    gains[~valid] = -np.inf
    pos = int(np.argmax(gains))
    return pos, float(gains[pos])


def qr_descent(
    Z: np.ndarray,
    y: np.ndarray,
    w0: np.ndarray,
    tau: float,
    step_scale: float,
    max_iter: int,
    check_every: int,
    tol: float,
) -> tuple[np.ndarray, float, int]:
    """Averaged subgradient descent on the mean pinball loss of y - Z @ w.

    Steps are step_scale/sqrt(t). A running average of the iterates is kept
    (restarted at powers of two so late iterates dominate) and the loss of
    both the average and the raw iterate is probed every check_every
    iterations; the best parameter vector seen is returned. Stops early
    when the probed loss improves by less than tol between checks.
    Returns (best_w, best_loss, iterations_run).
    """
    n = y.shape[0]
    w = w0.astype(np.float64).copy()
    avg = w.copy()
    avg_count = 1
    next_restart = 2

    def loss(wv: np.ndarray) -> float:
        r = y - Z @ wv
        return float(np.mean(np.maximum(tau * r, (tau - 1.0) * r)))

    best_loss = loss(w)
    best_w = w.copy()
    prev_probe = best_loss
    t = 0
    for t in range(1, max_iter + 1):
        r = y - Z @ w
        s = np.where(r > 0, tau, np.where(r < 0, tau - 1.0, 0.0))
        step = step_scale / np.sqrt(t)
        w += (step / n) * (Z.T @ s)
        if t == next_restart:
            avg[:] = w
            avg_count = 1
            next_restart *= 2
        else:
            avg_count += 1
            avg += (w - avg) / avg_count
        if t % check_every == 0:
            la = loss(avg)
            lw = loss(w)
            if la < best_loss:
                best_loss = la
                best_w[:] = avg
            if lw < best_loss:
                best_loss = lw
                best_w[:] = w
            probe = min(la, lw)
            if prev_probe - probe < tol and probe <= best_loss:
                break
            prev_probe = probe
    return best_w, best_loss, t


def svr_descent(
    Z: np.ndarray,
    y: np.ndarray,
    w0: np.ndarray,
    epsilon: float,
    c_reg: float,
    step_scale: float,
    max_iter: int,
    check_every: int,
    tol: float,
) -> tuple[np.ndarray, float, int]:
    """Subgradient descent for linear epsilon-insensitive regression.

    Objective: 0.5 * ||w[1:]||^2 + c_reg * sum(max(0, |y - Z @ w| - epsilon)).
    w[0] is the unpenalized intercept (Z's first column is all ones).
    Same stepping, averaging, probing, and stopping as qr_descent.
    """
    w = w0.astype(np.float64).copy()
    avg = w.copy()
    avg_count = 1
    next_restart = 2

    def objective(wv: np.ndarray) -> float:
        r = y - Z @ wv
        hinge = np.maximum(0.0, np.abs(r) - epsilon)
        return float(0.5 * np.dot(wv[1:], wv[1:]) + c_reg * np.sum(hinge))

    best_obj = objective(w)
    best_w = w.copy()
    prev_probe = best_obj
    t = 0
    for t in range(1, max_iter + 1):
        r = y - Z @ w
        s = np.where(r > epsilon, -1.0, np.where(r < -epsilon, 1.0, 0.0))
        grad = c_reg * (Z.T @ s)
        grad[1:] += w[1:]
        step = step_scale / np.sqrt(t)
        w -= step * grad
        if t == next_restart:
            avg[:] = w
            avg_count = 1
            next_restart *= 2
        else:
            avg_count += 1
            avg += (w - avg) / avg_count
        if t % check_every == 0:
            oa = objective(avg)
            ow = objective(w)
            if oa < best_obj:
                best_obj = oa
                best_w[:] = avg
            if ow < best_obj:
                best_obj = ow
                best_w[:] = w
            probe = min(oa, ow)
            if prev_probe - probe < tol and probe <= best_obj:
                break
            prev_probe = probe
    return best_w, best_obj, t
