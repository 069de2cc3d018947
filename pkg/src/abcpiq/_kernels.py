"""Inner loops of the Volterra solver.

Two interchangeable backends live here: numba-compiled loops and a
pure-numpy path. ``ABCPIQ_NO_NUMBA=1`` (or a missing numba install)
selects the numpy path; ``backend(...)`` lets callers pick explicitly.

Both backends march the product-trapezoidal discretisation

    x_j = x0 + a_loc*f(x_j) + c_mem*h**theta*(hist_j + B(1)*f(x_j))
    hist_j = C(j)*F_0 + sum_{k=1}^{j-1} W(j-k)*F_k

solving the implicit part by fixed-point iteration. The weight tables
C, W, B come from :func:`kernel_weights`.
"""

from __future__ import annotations

import math
import os

import numpy as np

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    numba = None
    HAVE_NUMBA = False

__all__ = [
    "HAVE_NUMBA",
    "default_backend",
    "kernel_weights",
    "piq_march",
    "history_sum",
]

# status codes returned by the marching kernels
OK = 0
NO_CONVERGENCE = 1
NON_FINITE = 2


def default_backend():
    flag = os.environ.get("ABCPIQ_NO_NUMBA", "").strip().lower()
    if flag in ("1", "true", "yes", "on") or not HAVE_NUMBA:
        return "numpy"
    return "numba"


# ---------------------------------------------------------------------------
# weights
# ---------------------------------------------------------------------------

def _pow_diff(u, p):
    """u**p - (u-1)**p for u >= 1 without cancellation."""
    out = np.empty_like(u)
    one = u == 1.0
    out[one] = 1.0
    v = u[~one]
    out[~one] = -(v ** p) * np.expm1(p * np.log1p(-1.0 / v))
    return out


def _right_moment(u, alpha):
    """B(u) = int_0^1 (u - s)**(alpha-1) * s ds for integer u >= 1."""
    out = np.empty_like(u)
    small = u < 10.0
    us = u[small]
    # closed form; cancellation costs at most ~u ulps, harmless for u < 10
    out[small] = us * _pow_diff(us, alpha) / alpha - _pow_diff(us, alpha + 1.0) / (alpha + 1.0)
    ul = u[~small]
    if ul.size:
        # u**(alpha-1) * sum_n binom(alpha-1, n) * (-1/u)**n / (n+2)
        x = -1.0 / ul
        acc = np.full_like(ul, 0.5)
        c = 1.0
        xn = np.ones_like(ul)
        for n in range(1, 60):
            c *= (alpha - n) / n
            xn = xn * x
            term = c * xn / (n + 2)
            acc += term
            if np.all(np.abs(term) <= 1e-18 * np.abs(acc)):
                break
        out[~small] = ul ** (alpha - 1.0) * acc
    return out


def kernel_weights(theta, steps):
    """Unit-step product-trapezoid weight tables for kernel (t - s)**(theta-1).

    Returns ``(C, W, B1)`` with arrays indexed by the node distance u:
    ``C[u]`` is the left-node weight of a cell u steps back, ``W[u]`` the
    combined weight of an interior node u steps back and ``B1`` the weight
    of the current node. Index 0 of C and W is unused. Multiply by
    ``h**theta`` for a grid of spacing h.
    """
    alpha = float(theta)
    m = int(steps)
    u = np.arange(1, m + 2, dtype=np.float64)
    a = _pow_diff(u, alpha) / alpha
    b = _right_moment(u, alpha)
    c = a - b
    C = np.zeros(m + 1)
    W = np.zeros(m + 1)
    C[1:] = c[:m]
    W[1:] = c[:m] + b[1 : m + 1]
    return C, W, float(b[0])


# ---------------------------------------------------------------------------
# numpy backend
# ---------------------------------------------------------------------------

def _history_numpy(C, W, F, j):
    if j == 1:
        return C[1] * F[0]
    return C[j] * F[0] + W[j - 1 : 0 : -1] @ F[1:j]


def _field(r, x):
    lam, gam, d0, eta, mu, sig, h = r
    inf = gam * x[0] * x[1]
    return np.array(
        (
            lam - inf - d0 * x[0],
            inf - (d0 + h + eta) * x[1] + sig * x[2],
            eta * x[1] - (d0 + mu + sig) * x[2],
        )
    )


def _fixed_point_numpy(r, base, gain, guess, tol, maxit):
    x = guess
    for it in range(1, maxit + 1):
        new = base + gain * _field(r, x)
        if not np.all(np.isfinite(new)):
            return new, it, NON_FINITE
        if np.all(np.abs(new - x) <= tol * np.maximum(1.0, np.abs(new))):
            return new, it, OK
        x = new
    return x, maxit, NO_CONVERGENCE


def _piq_march_numpy(r, x0, a_loc, c_mem_h, C, W, B1, steps, tol, maxit):
    r = tuple(float(v) for v in r)
    X = np.empty((steps + 1, 3))
    F = np.empty((steps + 1, 3))
    iters = np.zeros(steps + 1, dtype=np.int64)
    X[0] = x0
    # right limit x(0+) solves x = x0 + a_loc*f(x); it feeds the history at s = 0
    if a_loc != 0.0:
        start, it, status = _fixed_point_numpy(r, x0, a_loc, x0.copy(), tol, maxit)
        iters[0] = it
        if status != OK:
            return X, F, iters, start, status, 0
    else:
        start = x0.copy()
    F[0] = _field(r, start)
    gain = a_loc + c_mem_h * B1
    prev = start
    for j in range(1, steps + 1):
        base = x0 + c_mem_h * _history_numpy(C, W, F, j)
        x, it, status = _fixed_point_numpy(r, base, gain, prev, tol, maxit)
        iters[j] = it
        if status != OK:
            return X, F, iters, start, status, j
        X[j] = x
        F[j] = _field(r, x)
        prev = x
    return X, F, iters, start, OK, -1


# ---------------------------------------------------------------------------
# numba backend
# ---------------------------------------------------------------------------

if HAVE_NUMBA:

    @numba.njit(cache=True, nogil=True)
    def _field_nb(r, x, out):
        inf = r[1] * x[0] * x[1]
        out[0] = r[0] - inf - r[2] * x[0]
        out[1] = inf - (r[2] + r[6] + r[3]) * x[1] + r[5] * x[2]
        out[2] = r[3] * x[1] - (r[2] + r[4] + r[5]) * x[2]

    @numba.njit(cache=True, nogil=True)
    def _fixed_point_nb(r, base, gain, x, tol, maxit, fx):
        # iterates in place on x; returns (iterations, status)
        new = np.empty(3)
        for it in range(1, maxit + 1):
            _field_nb(r, x, fx)
            done = True
            for c in range(3):
                new[c] = base[c] + gain * fx[c]
                if not math.isfinite(new[c]):
                    x[c] = new[c]
                    return it, NON_FINITE
                if abs(new[c] - x[c]) > tol * max(1.0, abs(new[c])):
                    done = False
            for c in range(3):
                x[c] = new[c]
            if done:
                return it, OK
        return maxit, NO_CONVERGENCE

    @numba.njit(cache=True, nogil=True)
    def _piq_march_nb(r, x0, a_loc, c_mem_h, C, W, B1, steps, tol, maxit):
        X = np.empty((steps + 1, 3))
        F = np.empty((steps + 1, 3))
        iters = np.zeros(steps + 1, dtype=np.int64)
        fx = np.empty(3)
        x = x0.copy()
        for c in range(3):
            X[0, c] = x0[c]
        if a_loc != 0.0:
            it, status = _fixed_point_nb(r, x0, a_loc, x, tol, maxit, fx)
            iters[0] = it
            if status != OK:
                return X, F, iters, x, status, 0
        start = x.copy()
        _field_nb(r, start, fx)
        for c in range(3):
            F[0, c] = fx[c]
        gain = a_loc + c_mem_h * B1
        base = np.empty(3)
        for j in range(1, steps + 1):
            for c in range(3):
                base[c] = C[j] * F[0, c]
            for k in range(1, j):
                w = W[j - k]
                base[0] += w * F[k, 0]
                base[1] += w * F[k, 1]
                base[2] += w * F[k, 2]
            for c in range(3):
                base[c] = x0[c] + c_mem_h * base[c]
            it, status = _fixed_point_nb(r, base, gain, x, tol, maxit, fx)
            iters[j] = it
            if status != OK:
                return X, F, iters, start, status, j
            _field_nb(r, x, fx)
            for c in range(3):
                X[j, c] = x[c]
                F[j, c] = fx[c]
        return X, F, iters, start, OK, -1

    @numba.njit(cache=True, nogil=True)
    def _history_nb(C, W, F, j):
        d = F.shape[1]
        out = np.empty(d)
        for c in range(d):
            out[c] = C[j] * F[0, c]
        for k in range(1, j):
            w = W[j - k]
            for c in range(d):
                out[c] += w * F[k, c]
        return out


def piq_march(rates, x0, a_loc, c_mem_h, C, W, B1, steps, tol, maxit, backend=None):
    """March the P-I-Q Volterra scheme over ``steps`` steps.

    Returns ``(X, F, iters, start, status, failed_at)``.
    """
    backend = backend or default_backend()
    rates = np.ascontiguousarray(rates, dtype=np.float64)
    x0 = np.ascontiguousarray(x0, dtype=np.float64)
    if backend == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba backend requested but numba is not installed")
        return _piq_march_nb(rates, x0, float(a_loc), float(c_mem_h), C, W, float(B1),
                             int(steps), float(tol), int(maxit))
    if backend == "numpy":
        # overflow is reported through the NON_FINITE status
        with np.errstate(over="ignore", invalid="ignore"):
            return _piq_march_numpy(rates, x0, a_loc, c_mem_h, C, W, B1, int(steps), tol, maxit)
    raise ValueError(f"unknown backend {backend!r}")


def history_sum(C, W, F, j, backend=None):
    """Known part of the product-integration sum at node j (F has shape (>=j, d))."""
    backend = backend or default_backend()
    F = np.ascontiguousarray(F, dtype=np.float64)
    if backend == "numba":
        return _history_nb(C, W, F, int(j))
    return np.atleast_1d(_history_numpy(C, W, F, j)).astype(np.float64)
