"""Compiled O(n * nodes) principal-value sums.

Each output node owns its own sequential accumulation over alpha, so the
result does not depend on how grid nodes are spread over threads.
"""
import numpy as np
from numba import njit, prange

from .kernels import kernel_from_slopes

# integrand forms
VEL1 = 0
VEL2 = 1
K_OVER_ALPHA = 2
G_OVER_ALPHA = 3
DXK_OVER_ALPHA = 4
K3_OVER_ALPHA = 5
GAMMA_OVER_ALPHA = 6
B4_OVER_ALPHA = 7
GAMMACAP_OVER_ALPHA = 8
THETACAP_OVER_ALPHA = 9
MEAN_GAMMA_F = 10
MEAN_THETA_F = 11
DXXK_OVER_ALPHA = 12
VEL = 13

# quadrature kinds
REGULAR = 0   # finite at alpha = 0, limit value gets full weight
SINGULAR = 1  # odd 1/alpha singularity, symmetric pairing
TAIL = 2      # |alpha| >= 1 only


@njit(cache=True)
def integrand(form, a, df, sg, sxg, sxxg):
    if form == VEL1:
        return sxg * kernel_from_slopes(0, df, sg, sxg, sxxg)
    if form == VEL2:
        return sg * kernel_from_slopes(1, df, sg, sxg, sxxg)
    if form == VEL:
        return (sxg * kernel_from_slopes(0, df, sg, sxg, sxxg)
                + sg * kernel_from_slopes(1, df, sg, sxg, sxxg))
    if form == K_OVER_ALPHA:
        return kernel_from_slopes(0, df, sg, sxg, sxxg) / a
    if form == G_OVER_ALPHA:
        return kernel_from_slopes(1, df, sg, sxg, sxxg) / a
    if form == DXK_OVER_ALPHA:
        return kernel_from_slopes(15, df, sg, sxg, sxxg) / a
    if form == K3_OVER_ALPHA:
        return kernel_from_slopes(0, df, sg, sxg, sxxg) ** 3 / a
    if form == GAMMA_OVER_ALPHA:
        return kernel_from_slopes(10, df, sg, sxg, sxxg) / a
    if form == B4_OVER_ALPHA:
        return kernel_from_slopes(8, df, sg, sxg, sxxg) / a
    if form == GAMMACAP_OVER_ALPHA:
        return kernel_from_slopes(12, df, sg, sxg, sxxg) / a
    if form == THETACAP_OVER_ALPHA:
        return kernel_from_slopes(13, df, sg, sxg, sxxg) / a
    if form == MEAN_GAMMA_F:
        return kernel_from_slopes(11, df, sg, sxg, sxxg)
    if form == MEAN_THETA_F:
        return kernel_from_slopes(14, df, sg, sxg, sxxg)
    if form == DXXK_OVER_ALPHA:
        return kernel_from_slopes(16, df, sg, sxg, sxxg) / a
    return np.nan


@njit(cache=True)
def _pair(form, i, j, dx, x2, g, dg, d2g):
    """integrand(+alpha) + integrand(-alpha) at alpha = j*dx on the grid."""
    n = g.shape[0]
    a = j * dx
    gi = g[i]
    dgi = dg[i]
    d2gi = d2g[i]
    ip = i - j
    im = i + j
    gp = 0.0
    dgp = 0.0
    d2gp = 0.0
    if ip >= 0 and ip < n:
        gp = g[ip]
        dgp = dg[ip]
        d2gp = d2g[ip]
    gm = 0.0
    dgm = 0.0
    d2gm = 0.0
    if im >= 0 and im < n:
        gm = g[im]
        dgm = dg[im]
        d2gm = d2g[im]
    vp = integrand(form, a, x2 - a, (gi - gp) / a, (dgi - dgp) / a, (d2gi - d2gp) / a)
    vm = integrand(form, -a, x2 + a, (gm - gi) / a, (dgm - dgi) / a, (d2gm - d2gi) / a)
    return vp + vm


@njit(cache=True)
def pv_one(form, kind, i, x, g, dg, d2g, dx, J, j_lo, m, A):
    x2 = 2.0 * x[i]
    s = 0.0
    p1 = 0.0
    p2 = 0.0
    for j in range(j_lo, J + 1):
        w = dx
        if j == J or (kind == TAIL and j == j_lo):
            w = 0.5 * dx
        p = _pair(form, i, j, dx, x2, g, dg, d2g)
        if j == 1:
            p1 = p
        elif j == 2:
            p2 = p
        s += w * p
    # Euler-Maclaurin end corrections dx^2/12 * P' at the half-weight ends
    s -= dx / 24.0 * (
        _pair(form, i, J + 1, dx, x2, g, dg, d2g) - _pair(form, i, J - 1, dx, x2, g, dg, d2g)
    )
    if kind == TAIL and j_lo > 1:
        s += dx / 24.0 * (
            _pair(form, i, j_lo + 1, dx, x2, g, dg, d2g)
            - _pair(form, i, j_lo - 1, dx, x2, g, dg, d2g)
        )
    if kind == REGULAR:
        s += dx * integrand(form, 0.0, x2, dg[i], d2g[i], 0.0)
    elif kind == SINGULAR:
        # even paired integrand: Richardson estimate of its alpha -> 0 limit
        s += 0.5 * dx * (4.0 * p1 - p2) / 3.0
    # far field, alpha = 1/u with g(x - alpha) = 0; the u -> 0 value is 0.
    # Even m: trapezoid on h and 2h Richardson-combined (Simpson weights).
    if m > 0:
        hu = 1.0 / (A * m)
        gi = g[i]
        dgi = dg[i]
        d2gi = d2g[i]
        simpson = m % 2 == 0
        for k in range(1, m + 1):
            if simpson:
                if k == m:
                    w = hu / 3.0
                elif k % 2 == 1:
                    w = 4.0 * hu / 3.0
                else:
                    w = 2.0 * hu / 3.0
            else:
                w = hu
                if k == m:
                    w = 0.5 * hu
            a = 1.0 / (k * hu)
            vp = integrand(form, a, x2 - a, gi / a, dgi / a, d2gi / a)
            vm = integrand(form, -a, x2 + a, -gi / a, -dgi / a, -d2gi / a)
            s += w * a * a * (vp + vm)
    return s


@njit(parallel=True, cache=True)
def pv_all(form, kind, x, g, dg, d2g, dx, J, j_lo, m, A):
    n = x.shape[0]
    out = np.empty(n)
    for i in prange(n):
        out[i] = pv_one(form, kind, i, x, g, dg, d2g, dx, J, j_lo, m, A)
    return out


@njit(parallel=True, cache=True)
def hilbert_pairs(g, d1, J):
    """(1/pi) sum_j (g[i-j] - g[i+j]) / j with the j = 0 trapezoid term."""
    n = g.shape[0]
    out = np.empty(n)
    for i in prange(n):
        s = -d1[i]
        for j in range(1, J + 1):
            w = 1.0
            if j == J:
                w = 0.5
            gp = g[i - j] if i - j >= 0 else 0.0
            gm = g[i + j] if i + j < n else 0.0
            s += w * (gp - gm) / j
        out[i] = s / np.pi
    return out
