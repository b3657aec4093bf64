"""Soft-margin kernel SVM trained by sequential minimal optimization.

Dual problem, with y in {-1, +1} and Q_ij = y_i y_j K(x_i, x_j)::

    min  0.5 a'Qa - sum(a)   s.t.  y'a = 0,  0 <= a_i <= C

Working pairs are chosen by the maximal-violating index plus the
second-order rule for its partner; iteration stops once the KKT gap
``m(a) - M(a)`` drops below ``tol``.
"""

import logging

import numba
import numpy as np

from ..errors import DegenerateDataError, ModelError

log = logging.getLogger(__name__)

KERNELS = ("linear", "poly2", "poly3")
_TAU = 1e-12


def kernel_matrix(A, B, kernel):
    dot = np.asarray(A, dtype=np.float64) @ np.asarray(B, dtype=np.float64).T
    if kernel == "linear":
        return dot
    if kernel == "poly2":
        return (1.0 + dot) ** 2
    if kernel == "poly3":
        return (1.0 + dot) ** 3
    raise ModelError(f"unknown kernel {kernel!r}; expected one of {KERNELS}")


@numba.njit(inline="always")
def _penalties(y_t, a_t, c):
    """(0 or inf) penalties for membership in I_up and I_low."""
    if y_t > 0:
        return (0.0 if a_t < c else np.inf), (0.0 if a_t > 0 else np.inf)
    return (0.0 if a_t > 0 else np.inf), (0.0 if a_t < c else np.inf)


@numba.njit(cache=True)
def _smo_loop(K, y, c, tol, max_iter, alpha, grad):
    n = y.shape[0]
    diag = np.empty(n)
    pen_up = np.empty(n)  # 0 where y_t a_t may grow (I_up), inf elsewhere
    pen_low = np.empty(n)  # 0 where y_t a_t may shrink (I_low), inf elsewhere
    for t in range(n):
        diag[t] = K[t, t]
        pen_up[t], pen_low[t] = _penalties(y[t], alpha[t], c)
    it = 0
    i_prev = -1
    j_prev = -1
    di = 0.0
    dj = 0.0
    while True:
        # apply the previous pair update and select i in the same sweep
        i = -1
        g_max = -np.inf
        g_min = np.inf
        if i_prev >= 0:
            Kp = K[i_prev]
            Kq = K[j_prev]
            for t in range(n):
                grad[t] += y[t] * (Kp[t] * di + Kq[t] * dj)
        for t in range(n):
            s = -y[t] * grad[t]
            su = s - pen_up[t]
            sl = s + pen_low[t]
            if su > g_max:
                g_max = su
                i = t
            g_min = min(g_min, sl)
        if i < 0 or g_max == -np.inf or g_min == np.inf or g_max - g_min < tol:
            return it, True
        if it >= max_iter:
            return it, False
        # partner j maximizes b_t^2 / a_t over I_low with b_t > 0; compared
        # by cross-multiplication to keep divisions out of the sweep
        j = -1
        best_num = 0.0
        best_den = 1.0
        kii = diag[i]
        Ki = K[i]
        for t in range(n):
            if pen_low[t] == 0.0:
                b_t = g_max + y[t] * grad[t]
                if b_t > 0:
                    a_t = kii + diag[t] - 2.0 * Ki[t]
                    if a_t <= 0:
                        a_t = _TAU
                    num = b_t * b_t
                    if j < 0 or num * best_den > best_num * a_t:
                        best_num = num
                        best_den = a_t
                        j = t
        yi = y[i]
        yj = y[j]
        quad = kii + diag[j] - 2.0 * Ki[j]
        if quad <= 0:
            quad = _TAU
        ai_old = alpha[i]
        aj_old = alpha[j]
        if yi != yj:
            delta = (-grad[i] - grad[j]) / quad
            diff = ai_old - aj_old
            ai = ai_old + delta
            aj = aj_old + delta
            if diff > 0:
                if aj < 0:
                    aj = 0.0
                    ai = diff
            elif ai < 0:
                ai = 0.0
                aj = -diff
            if diff > 0:
                if ai > c:
                    ai = c
                    aj = c - diff
            elif aj > c:
                aj = c
                ai = c + diff
        else:
            delta = (grad[i] - grad[j]) / quad
            total = ai_old + aj_old
            ai = ai_old - delta
            aj = aj_old + delta
            if total > c:
                if ai > c:
                    ai = c
                    aj = total - c
            elif aj < 0:
                aj = 0.0
                ai = total
            if total > c:
                if aj > c:
                    aj = c
                    ai = total - c
            elif ai < 0:
                ai = 0.0
                aj = total
        alpha[i] = ai
        alpha[j] = aj
        pen_up[i], pen_low[i] = _penalties(yi, ai, c)
        pen_up[j], pen_low[j] = _penalties(yj, aj, c)
        # grad_t += Q_ti d_i + Q_tj d_j (Q_ti = y_t y_i K_ti), applied next sweep
        di = yi * (ai - ai_old)
        dj = yj * (aj - aj_old)
        i_prev = i
        j_prev = j
        it += 1


def smo(K, y, c, tol=1e-3, max_iter=None):
    """Solve the dual for a precomputed kernel matrix.

    Returns ``(alpha, b, n_iter, converged)``; the decision function is
    ``sum_i alpha_i y_i K(x_i, x) + b``.
    """
    n = len(y)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if max_iter is None:
        max_iter = max(50_000_000, 100 * n)
    alpha = np.zeros(n)
    grad = -np.ones(n)  # gradient of the dual objective, Q a - 1
    it, converged = _smo_loop(np.ascontiguousarray(K, dtype=np.float64), y, float(c),
                              float(tol), int(max_iter), alpha, grad)
    if not converged:
        log.warning("SMO stopped at max_iter=%d before reaching tol=%g", max_iter, tol)
    return alpha, _bias(alpha, grad, y, c), it, converged


def _bias(alpha, grad, y, c):
    yg = y * grad
    at_c = alpha >= c
    at_0 = alpha <= 0
    free = ~at_c & ~at_0
    if free.any():
        rho = yg[free].mean()
    else:
        # only bounded multipliers: rho is any point of [lb, ub]
        ub = np.min(yg[(at_c & (y < 0)) | (at_0 & (y > 0))], initial=np.inf)
        lb = np.max(yg[(at_c & (y > 0)) | (at_0 & (y < 0))], initial=-np.inf)
        rho = 0.5 * (ub + lb)
    return float(-rho)


def fit(X, y, kernel="linear", c=1.0, tol=1e-3):
    """Train on class indices ``y`` in {0, 1}; class 1 is the +1 side."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if len(np.unique(y)) < 2:
        raise DegenerateDataError("SVM needs examples of both classes")
    if c <= 0:
        raise ModelError("box constraint c must be positive")
    ys = np.where(y == 1, 1.0, -1.0)
    K = kernel_matrix(X, X, kernel)
    alpha, b, n_iter, converged = smo(K, ys, c, tol)
    sv = alpha > 0
    return {
        "kernel": kernel,
        "c": float(c),
        "b": b,
        "sv_X": X[sv],
        "sv_coef": alpha[sv] * ys[sv],
        "alpha": alpha,
        "n_iter": n_iter,
        "converged": bool(converged),
    }


def decision_function(state, X):
    X = np.asarray(X, dtype=np.float64)
    if len(state["sv_X"]) == 0:
        return np.full(len(X), state["b"])
    return kernel_matrix(X, state["sv_X"], state["kernel"]) @ state["sv_coef"] + state["b"]


def predict(state, X):
    """Class 1 where the decision value is positive, class 0 otherwise."""
    return (decision_function(state, X) > 0).astype(np.int64)
