"""Numba kernels for local-polynomial and kernel-density evaluation.

All fits use a Gaussian kernel on the standardized distance u = (x_i - t) / h.
The local design is built in u (not raw distance) so the ridge term and the
normal equations are scale-free in x. Weights with |u| > WINDOW are dropped;
at that cutoff exp(-u^2/2) < 1e-31, far below both machine precision relative
to in-window weights and the degeneracy floor, so the truncation is exact for
every downstream decision while making small-h fits O(window) instead of O(n).

Solves are closed-form (Cramer) on the ridged normal equations. Callers must
check the returned minimum weight mass against MASS_FLOOR and raise
DegenerateFit themselves; under-floor points get NaN values.
"""

import numpy as np
from numba import njit

WINDOW = 12.0
MASS_FLOOR = 1e-12
RIDGE = 1e-10

_SQRT_2PI = float(np.sqrt(2.0 * np.pi))


@njit(cache=True)
def locpoly_values(xs, ys, targets, h, degree):
    """Local-polynomial fitted values at each target; returns (values, min_mass)."""
    m = targets.shape[0]
    out = np.empty(m)
    min_mass = np.inf
    lim = WINDOW * h
    inv_h = 1.0 / h
    for j in range(m):
        t = targets[j]
        lo = np.searchsorted(xs, t - lim)
        hi = np.searchsorted(xs, t + lim, side="right")
        s0 = 0.0; s1 = 0.0; s2 = 0.0; s3 = 0.0; s4 = 0.0
        b0 = 0.0; b1 = 0.0; b2 = 0.0
        for i in range(lo, hi):
            u = (xs[i] - t) * inv_h
            w = np.exp(-0.5 * u * u)
            wu = w * u
            wuu = wu * u
            yv = ys[i]
            s0 += w; s1 += wu; s2 += wuu
            b0 += w * yv; b1 += wu * yv
            if degree == 2:
                s3 += wuu * u
                s4 += wuu * u * u
                b2 += wuu * yv
        if s0 < min_mass:
            min_mass = s0
        if s0 < MASS_FLOOR:
            out[j] = np.nan
            continue
        if degree == 0:
            out[j] = b0 / (s0 + RIDGE * s0)
        elif degree == 1:
            r = RIDGE * 0.5 * (s0 + s2)
            a00 = s0 + r
            a11 = s2 + r
            det = a00 * a11 - s1 * s1
            out[j] = (a11 * b0 - s1 * b1) / det
        else:
            r = RIDGE * (s0 + s2 + s4) / 3.0
            a00 = s0 + r; a01 = s1; a02 = s2
            a11 = s2 + r; a12 = s3; a22 = s4 + r
            m00 = a11 * a22 - a12 * a12
            m01 = a01 * a22 - a12 * a02
            m02 = a01 * a12 - a11 * a02
            det = a00 * m00 - a01 * m01 + a02 * m02
            det0 = b0 * m00 - a01 * (b1 * a22 - a12 * b2) + a02 * (b1 * a12 - a11 * b2)
            out[j] = det0 / det
    return out, min_mass


@njit(cache=True)
def deriv_values_se(xs, ys, e2, targets, h, want_se):
    """Local-quadratic slope at each target, with optional sandwich se.

    e2 holds squared pilot residuals at the data points; the local error
    variance at a target is their kernel-weighted mean. Returns
    (slopes, se, min_mass); se is all-zero when want_se is False.
    """
    m = targets.shape[0]
    slopes = np.empty(m)
    se = np.zeros(m)
    min_mass = np.inf
    lim = WINDOW * h
    inv_h = 1.0 / h
    for j in range(m):
        t = targets[j]
        lo = np.searchsorted(xs, t - lim)
        hi = np.searchsorted(xs, t + lim, side="right")
        s0 = 0.0; s1 = 0.0; s2 = 0.0; s3 = 0.0; s4 = 0.0
        b0 = 0.0; b1 = 0.0; b2 = 0.0
        p0 = 0.0; p1 = 0.0; p2 = 0.0; p3 = 0.0; p4 = 0.0
        ve = 0.0
        for i in range(lo, hi):
            u = (xs[i] - t) * inv_h
            w = np.exp(-0.5 * u * u)
            wu = w * u
            wuu = wu * u
            yv = ys[i]
            s0 += w; s1 += wu; s2 += wuu; s3 += wuu * u; s4 += wuu * u * u
            b0 += w * yv; b1 += wu * yv; b2 += wuu * yv
            if want_se:
                w2 = w * w
                w2u = w2 * u
                p0 += w2; p1 += w2u; p2 += w2u * u; p3 += w2u * u * u; p4 += w2u * u * u * u
                ve += w * e2[i]
        if s0 < min_mass:
            min_mass = s0
        if s0 < MASS_FLOOR:
            slopes[j] = np.nan
            continue
        r = RIDGE * (s0 + s2 + s4) / 3.0
        a00 = s0 + r; a01 = s1; a02 = s2
        a11 = s2 + r; a12 = s3; a22 = s4 + r
        m00 = a11 * a22 - a12 * a12
        m01 = a01 * a22 - a12 * a02
        m02 = a01 * a12 - a11 * a02
        det = a00 * m00 - a01 * m01 + a02 * m02
        det1 = a00 * (b1 * a22 - a12 * b2) - b0 * m01 + a02 * (a01 * b2 - b1 * a02)
        slopes[j] = det1 / det * inv_h
        if want_se:
            # row 1 of A^{-1} (cofactors of the symmetric ridged system)
            c0 = -m01 / det
            c1 = (a00 * a22 - a02 * a02) / det
            c2 = -(a00 * a12 - a02 * a01) / det
            q = (c0 * c0 * p0 + 2.0 * c0 * c1 * p1 + (2.0 * c0 * c2 + c1 * c1) * p2
                 + 2.0 * c1 * c2 * p3 + c2 * c2 * p4)
            var_local = ve / s0
            se[j] = np.sqrt(max(var_local * q, 0.0)) * inv_h
    return slopes, se, min_mass


@njit(cache=True)
def smoother_matrix(xs, targets, h, degree, deriv):
    """Equivalent-kernel matrix L with fitted values (or slopes) = L @ ys.

    Rows correspond to targets. deriv=True selects the slope row of the
    local-quadratic solve (degree is forced to 2 in that case by callers).
    Returns (L, min_mass).
    """
    m = targets.shape[0]
    n = xs.shape[0]
    L = np.zeros((m, n))
    min_mass = np.inf
    lim = WINDOW * h
    inv_h = 1.0 / h
    for j in range(m):
        t = targets[j]
        lo = np.searchsorted(xs, t - lim)
        hi = np.searchsorted(xs, t + lim, side="right")
        s0 = 0.0; s1 = 0.0; s2 = 0.0; s3 = 0.0; s4 = 0.0
        for i in range(lo, hi):
            u = (xs[i] - t) * inv_h
            w = np.exp(-0.5 * u * u)
            wu = w * u
            wuu = wu * u
            s0 += w; s1 += wu; s2 += wuu
            if degree == 2:
                s3 += wuu * u
                s4 += wuu * u * u
        if s0 < min_mass:
            min_mass = s0
        if s0 < MASS_FLOOR:
            for i in range(lo, hi):
                L[j, i] = np.nan
            continue
        if degree == 0:
            inv = 1.0 / (s0 + RIDGE * s0)
            for i in range(lo, hi):
                u = (xs[i] - t) * inv_h
                L[j, i] = np.exp(-0.5 * u * u) * inv
        elif degree == 1:
            r = RIDGE * 0.5 * (s0 + s2)
            a00 = s0 + r
            a11 = s2 + r
            det = a00 * a11 - s1 * s1
            c0 = a11 / det
            c1 = -s1 / det
            for i in range(lo, hi):
                u = (xs[i] - t) * inv_h
                w = np.exp(-0.5 * u * u)
                L[j, i] = w * (c0 + c1 * u)
        else:
            r = RIDGE * (s0 + s2 + s4) / 3.0
            a00 = s0 + r; a01 = s1; a02 = s2
            a11 = s2 + r; a12 = s3; a22 = s4 + r
            m00 = a11 * a22 - a12 * a12
            m01 = a01 * a22 - a12 * a02
            m02 = a01 * a12 - a11 * a02
            det = a00 * m00 - a01 * m01 + a02 * m02
            if deriv:
                c0 = -m01 / det * inv_h
                c1 = (a00 * a22 - a02 * a02) / det * inv_h
                c2 = -(a00 * a12 - a02 * a01) / det * inv_h
            else:
                c0 = m00 / det
                c1 = -m01 / det
                c2 = m02 / det
            for i in range(lo, hi):
                u = (xs[i] - t) * inv_h
                w = np.exp(-0.5 * u * u)
                L[j, i] = w * (c0 + c1 * u + c2 * u * u)
    return L, min_mass


@njit(cache=True)
def kde_values(xs, targets, h):
    """Gaussian kernel density estimate at each target."""
    m = targets.shape[0]
    n = xs.shape[0]
    out = np.empty(m)
    lim = WINDOW * h
    inv_h = 1.0 / h
    norm = 1.0 / (n * h * _SQRT_2PI)
    for j in range(m):
        t = targets[j]
        lo = np.searchsorted(xs, t - lim)
        hi = np.searchsorted(xs, t + lim, side="right")
        s = 0.0
        for i in range(lo, hi):
            u = (xs[i] - t) * inv_h
            s += np.exp(-0.5 * u * u)
        out[j] = s * norm
    return out


@njit(cache=True)
def kde_deriv_values(xs, targets, h):
    """First derivative of the Gaussian KDE at each target."""
    m = targets.shape[0]
    n = xs.shape[0]
    out = np.empty(m)
    lim = WINDOW * h
    inv_h = 1.0 / h
    norm = 1.0 / (n * h * h * _SQRT_2PI)
    for j in range(m):
        t = targets[j]
        lo = np.searchsorted(xs, t - lim)
        hi = np.searchsorted(xs, t + lim, side="right")
        s = 0.0
        for i in range(lo, hi):
            # d/dt of exp(-((x_i - t)/h)^2 / 2) brings down +u/h with u = (x_i - t)/h
            u = (xs[i] - t) * inv_h
            s += u * np.exp(-0.5 * u * u)
        out[j] = s * norm
    return out
