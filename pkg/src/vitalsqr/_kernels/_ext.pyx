# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: tree split search and the subgradient descent loops.

Same contracts and the same arithmetic order as _purepy, so split decisions
are bit-identical across backends.
"""

from libc.math cimport INFINITY, fabs, sqrt

import numpy as np

BACKEND = "ext"


def best_split(double[::1] x, double[::1] y, int min_leaf):
    """See _purepy.best_split; identical contract and tie-breaking."""
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t i, pos = -1
    cdef Py_ssize_t lo, hi
    cdef double running = 0.0, total = 0.0
    cdef double ls, rs, nl, nr, gain, best = -INFINITY
    if n < 2 * min_leaf:
        return -1, -INFINITY
    for i in range(n):
        total += y[i]
    lo = min_leaf - 1
    hi = n - min_leaf - 1
    for i in range(n - 1):
        running += y[i]
        if i < lo or i > hi:
            continue
        if x[i] == x[i + 1]:
            continue
        ls = running
        rs = total - ls
        nl = <double> (i + 1)
        nr = <double> (n - i - 1)
        gain = ls * ls / nl + rs * rs / nr
        if gain > best:
            best = gain
            pos = i
    if pos < 0:
        return -1, -INFINITY
    return pos, best


cdef double _pinball_loss(double[:, ::1] Z, double[::1] y, double[::1] w,
                          double tau, Py_ssize_t n, Py_ssize_t p):
    cdef Py_ssize_t i, j
    cdef double acc = 0.0, r
    for i in range(n):
        r = y[i]
        for j in range(p):
            r -= Z[i, j] * w[j]
        if r > 0:
            acc += tau * r
        else:
            acc += (tau - 1.0) * r
    return acc / n


def qr_descent(double[:, ::1] Z, double[::1] y, double[::1] w0, double tau,
               double step_scale, long max_iter, long check_every, double tol):
    """See _purepy.qr_descent; identical contract."""
    cdef Py_ssize_t n = Z.shape[0]
    cdef Py_ssize_t p = Z.shape[1]
    cdef Py_ssize_t i, j
    cdef long t = 0, next_restart = 2, avg_count = 1
    cdef double r, s, step, la, lw, probe

    w_arr = np.array(w0, dtype=np.float64)
    avg_arr = w_arr.copy()
    best_arr = w_arr.copy()
    grad_arr = np.zeros(p, dtype=np.float64)
    cdef double[::1] w = w_arr
    cdef double[::1] avg = avg_arr
    cdef double[::1] best_w = best_arr
    cdef double[::1] g = grad_arr

    cdef double best_loss = _pinball_loss(Z, y, w, tau, n, p)
    cdef double prev_probe = best_loss

    for t in range(1, max_iter + 1):
        for j in range(p):
            g[j] = 0.0
        for i in range(n):
            r = y[i]
            for j in range(p):
                r -= Z[i, j] * w[j]
            if r > 0:
                s = tau
            elif r < 0:
                s = tau - 1.0
            else:
                s = 0.0
            if s != 0.0:
                for j in range(p):
                    g[j] += Z[i, j] * s
        step = step_scale / sqrt(<double> t)
        for j in range(p):
            w[j] += (step / n) * g[j]
        if t == next_restart:
            for j in range(p):
                avg[j] = w[j]
            avg_count = 1
            next_restart *= 2
        else:
            avg_count += 1
            for j in range(p):
                avg[j] += (w[j] - avg[j]) / avg_count
        if t % check_every == 0:
            la = _pinball_loss(Z, y, avg, tau, n, p)
            lw = _pinball_loss(Z, y, w, tau, n, p)
            if la < best_loss:
                best_loss = la
                for j in range(p):
                    best_w[j] = avg[j]
            if lw < best_loss:
                best_loss = lw
                for j in range(p):
                    best_w[j] = w[j]
            probe = la if la < lw else lw
            if prev_probe - probe < tol and probe <= best_loss:
                break
            prev_probe = probe
    return best_arr, best_loss, t


cdef double _svr_objective(double[:, ::1] Z, double[::1] y, double[::1] w,
                           double epsilon, double c_reg,
                           Py_ssize_t n, Py_ssize_t p):
    cdef Py_ssize_t i, j
    cdef double acc = 0.0, r, h
    for i in range(n):
        r = y[i]
        for j in range(p):
            r -= Z[i, j] * w[j]
        h = fabs(r) - epsilon
        if h > 0:
            acc += h
    cdef double ridge = 0.0
    for j in range(1, p):
        ridge += w[j] * w[j]
    return 0.5 * ridge + c_reg * acc


def svr_descent(double[:, ::1] Z, double[::1] y, double[::1] w0,
                double epsilon, double c_reg, double step_scale,
                long max_iter, long check_every, double tol):
    """See _purepy.svr_descent; identical contract."""
    cdef Py_ssize_t n = Z.shape[0]
    cdef Py_ssize_t p = Z.shape[1]
    cdef Py_ssize_t i, j
    cdef long t = 0, next_restart = 2, avg_count = 1
    cdef double r, s, step, oa, ow, probe

    w_arr = np.array(w0, dtype=np.float64)
    avg_arr = w_arr.copy()
    best_arr = w_arr.copy()
    grad_arr = np.zeros(p, dtype=np.float64)
    cdef double[::1] w = w_arr
    cdef double[::1] avg = avg_arr
    cdef double[::1] best_w = best_arr
    cdef double[::1] g = grad_arr

    cdef double best_obj = _svr_objective(Z, y, w, epsilon, c_reg, n, p)
    cdef double prev_probe = best_obj

    for t in range(1, max_iter + 1):
        for j in range(p):
            g[j] = 0.0
        for i in range(n):
            r = y[i]
            for j in range(p):
                r -= Z[i, j] * w[j]
            if r > epsilon:
                s = -1.0
            elif r < -epsilon:
                s = 1.0
            else:
                s = 0.0
            if s != 0.0:
                for j in range(p):
                    g[j] += Z[i, j] * s
        for j in range(p):
            g[j] *= c_reg
        for j in range(1, p):
            g[j] += w[j]
        step = step_scale / sqrt(<double> t)
        for j in range(p):
            w[j] -= step * g[j]
        if t == next_restart:
            for j in range(p):
                avg[j] = w[j]
            avg_count = 1
            next_restart *= 2
        else:
            avg_count += 1
            for j in range(p):
                avg[j] += (w[j] - avg[j]) / avg_count
        if t % check_every == 0:
            oa = _svr_objective(Z, y, avg, epsilon, c_reg, n, p)
            ow = _svr_objective(Z, y, w, epsilon, c_reg, n, p)
            if oa < best_obj:
                best_obj = oa
                for j in range(p):
                    best_w[j] = avg[j]
            if ow < best_obj:
                best_obj = ow
                for j in range(p):
                    best_w[j] = w[j]
            probe = oa if oa < ow else ow
            if prev_probe - probe < tol and probe <= best_obj:
                break
            prev_probe = probe
    return best_arr, best_obj, t
