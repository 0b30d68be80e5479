"""Compiled coordinate-sweep kernel for the built-in losses.

One call performs a full Gauss-Seidel sweep: for each coordinate it streams
the (Fortran-ordered) data once, accumulating the partial derivative with
the freshest fitted values, then applies the step.  Semantics match the
pure-numpy sweep in :mod:`pmsdr.solver`; only the summation order differs
at machine precision.  Custom losses cannot be compiled and keep the numpy
path.
"""

import numpy as np
from numba import njit

FAMILY_CODES = {
    "svm": 0,
    "logit": 1,
    "l2svm": 2,
    "lssvm": 3,
    "qr": 4,
    "asls": 5,
}


@njit(cache=True, inline="always")
def _deriv(code, u, theta):
    if code == 0:  # hinge; flat side at the kink
        return -1.0 if u < 1.0 else 0.0
    if code == 1:  # logistic
        return -1.0 / (1.0 + np.exp(u))
    if code == 2:  # squared hinge
        return -2.0 * (1.0 - u) if u < 1.0 else 0.0
    if code == 3:  # squared
        return -2.0 * (1.0 - u)
    if code == 4:  # check; right derivative at u = 0
        return theta - 1.0 if u < 0.0 else theta
    # asymmetric squared
    return 2.0 * u * (1.0 - theta) if u < 0.0 else 2.0 * u * theta


@njit(cache=True)
def sweep(z, sigma, yt, w, beta, f, s, lam_n, eta, code, theta, margin):
    """One coordinate sweep in place; returns the largest |step|."""
    n, p1 = z.shape
    max_step = 0.0
    for j in range(p1):
        g = 0.0
        if margin:
            for i in range(n):
                u = yt[i] * f[i]
                g += w[i] * _deriv(code, u, theta) * yt[i] * z[i, j]
        else:
            for i in range(n):
                u = yt[i] - f[i]
                g -= w[i] * _deriv(code, u, theta) * z[i, j]
        g *= lam_n
        if j >= 1:
            g += 2.0 * s[j - 1]
        step = -eta * g
        beta[j] += step
        for i in range(n):
            f[i] += step * z[i, j]
        if j >= 1:
            for k in range(p1 - 1):
                s[k] += step * sigma[k, j - 1]
        if abs(step) > max_step:
            max_step = abs(step)
    return max_step
