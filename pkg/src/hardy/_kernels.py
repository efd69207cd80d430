"""Hot loops for the staircase Hardy kernel.

Every kernel has a pure-numpy implementation and a loop implementation that
is compiled with numba when available.  The loop versions are used unless
numba is missing or ``HARDY_DISABLE_NUMBA`` is set to a truthy value before
import.

The kernel is never stored densely.  Points are sorted by level; a row ``j``
sees the first ``cut[j]`` points, so

    (A u)_j   = row_w[j] * sum_{i < cut[j]} col_w[i] * u[i]
    (A^T v)_i = col_w[i] * sum_{j : cut[j] > i} row_w[j] * v[j]
"""

import os

import numpy as np

_TRUTHY = {"1", "true", "yes", "on"}


def _numba_disabled():
    return os.environ.get("HARDY_DISABLE_NUMBA", "").strip().lower() in _TRUTHY


try:
    if _numba_disabled():
        raise ImportError("numba disabled by HARDY_DISABLE_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def decorator(func):
            return func

        return decorator


# ---------------------------------------------------------------------------
# numpy path


def matvec_numpy(col_w, cut, row_w, u):
    prefix = np.empty(col_w.shape[0] + 1)
    prefix[0] = 0.0
    np.cumsum(col_w * u, out=prefix[1:])
    return row_w * prefix[cut]


def rmatvec_numpy(col_w, cut, row_w, v):
    n = col_w.shape[0]
    acc = np.bincount(cut, weights=row_w * v, minlength=n + 1)
    # suffix[i] = sum_{k >= i} acc[k]
    suffix = np.cumsum(acc[::-1])[::-1]
    return col_w * suffix[1:]


def _lp_norm_numpy(x, p):
    scale = np.max(x) if x.size else 0.0
    if scale == 0.0:
        return 0.0
    return scale * np.sum((x / scale) ** p) ** (1.0 / p)


def _dual_power_numpy(x, e):
    scale = np.max(x) if x.size else 0.0
    if scale == 0.0:
        return np.zeros_like(x)
    return (x / scale) ** e


def power_iterate_numpy(col_w, cut, row_w, u0, p, q, max_iter, tol):
    return _power_iterate(col_w, cut, row_w, u0, p, q, max_iter, tol,
                          matvec_numpy, rmatvec_numpy, _lp_norm_numpy,
                          _dual_power_numpy)


def _power_iterate(col_w, cut, row_w, u0, p, q, max_iter, tol,
                   matvec, rmatvec, lp_norm, dual_power):
    norm0 = lp_norm(u0, p)
    if norm0 == 0.0:
        return u0.copy(), 0.0, 0, False
    u = u0 / norm0
    best_u = u.copy()
    best = -1.0
    prev = -1.0
    converged = False
    it = 0
    while it < max_iter:
        v = matvec(col_w, cut, row_w, u)
        it += 1
        ratio = lp_norm(v, q)
        if ratio > best:
            best = ratio
            best_u = u.copy()
        if prev >= 0.0 and abs(ratio - prev) <= tol * ratio:
            converged = True
            break
        prev = ratio
        g = rmatvec(col_w, cut, row_w, dual_power(v, q - 1.0))
        u_new = dual_power(g, 1.0 / (p - 1.0))
        norm = lp_norm(u_new, p)
        if norm == 0.0:
            # zero kernel: every direction has ratio 0
            converged = True
            break
        u = u_new / norm
    return best_u, max(best, 0.0), it, converged


# ---------------------------------------------------------------------------
# loop path


@njit(cache=True)
def matvec_loop(col_w, cut, row_w, u):
    n = col_w.shape[0]
    prefix = np.empty(n + 1)
    prefix[0] = 0.0
    s = 0.0
    for i in range(n):
        s += col_w[i] * u[i]
        prefix[i + 1] = s
    m = cut.shape[0]
    out = np.empty(m)
    for j in range(m):
        out[j] = row_w[j] * prefix[cut[j]]
    return out


@njit(cache=True)
def rmatvec_loop(col_w, cut, row_w, v):
    n = col_w.shape[0]
    acc = np.zeros(n + 1)
    for j in range(cut.shape[0]):
        acc[cut[j]] += row_w[j] * v[j]
    out = np.empty(n)
    s = acc[n]
    for i in range(n - 1, -1, -1):
        out[i] = col_w[i] * s
        s += acc[i]
    return out


@njit(cache=True)
def _lp_norm_loop(x, p):
    scale = 0.0
    for k in range(x.shape[0]):
        if x[k] > scale:
            scale = x[k]
    if scale == 0.0:
        return 0.0
    s = 0.0
    for k in range(x.shape[0]):
        s += (x[k] / scale) ** p
    return scale * s ** (1.0 / p)


@njit(cache=True)
def _dual_power_loop(x, e):
    scale = 0.0
    for k in range(x.shape[0]):
        if x[k] > scale:
            scale = x[k]
    out = np.zeros(x.shape[0])
    if scale == 0.0:
        return out
    for k in range(x.shape[0]):
        out[k] = (x[k] / scale) ** e
    return out


@njit(cache=True)
def power_iterate_loop(col_w, cut, row_w, u0, p, q, max_iter, tol):
    norm0 = _lp_norm_loop(u0, p)
    if norm0 == 0.0:
        return u0.copy(), 0.0, 0, False
    u = u0 / norm0
    best_u = u.copy()
    best = -1.0
    prev = -1.0
    converged = False
    it = 0
    while it < max_iter:
        v = matvec_loop(col_w, cut, row_w, u)
        it += 1
        ratio = _lp_norm_loop(v, q)
        if ratio > best:
            best = ratio
            best_u = u.copy()
        if prev >= 0.0 and abs(ratio - prev) <= tol * ratio:
            converged = True
            break
        prev = ratio
        g = rmatvec_loop(col_w, cut, row_w, _dual_power_loop(v, q - 1.0))
        u_new = _dual_power_loop(g, 1.0 / (p - 1.0))
        norm = _lp_norm_loop(u_new, p)
        if norm == 0.0:
            converged = True
            break
        u = u_new / norm
    return best_u, max(best, 0.0), it, converged


if HAVE_NUMBA:
    BACKEND = "numba"
    matvec = matvec_loop
    rmatvec = rmatvec_loop
    power_iterate = power_iterate_loop
else:
    BACKEND = "numpy"
    matvec = matvec_numpy
    rmatvec = rmatvec_numpy
    power_iterate = power_iterate_numpy
