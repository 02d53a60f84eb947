"""Compiled scalar kernels shared by the prox, the CD solver and FISTA.

Regularizers are passed as the flat tuple ``(kind, lam, gam, q, phi)`` where
``kind`` is one of the integer codes below.  For AMCP the ``q`` slot carries
the derived exponent ``2 phi / (1 + phi)``.
"""

import math

import numpy as np
from numba import njit

L1 = 0
LQ = 1
SCAD = 2
LSP = 3
MCP = 4
GP = 5
AMCP = 6

_TIE_RTOL = 1e-12
_NEWTON_MAXITER = 200
_NEWTON_UTOL = 1e-14


@njit(cache=True)
def r_value(kind, lam, gam, q, phi, u):
    if kind == L1:
        return lam * u
    if kind == LQ:
        return lam * lam * (u / lam) ** q
    if kind == SCAD:
        if u <= lam:
            return lam * u
        if u <= lam * (1.0 + gam):
            d = u - lam
            return lam * (u - d * d / (2.0 * lam * gam))
        return lam * lam * (1.0 + 0.5 * gam)
    if kind == LSP:
        return lam * lam * math.log1p(u / (lam * gam))
    if kind == MCP:
        if u <= lam * gam:
            return lam * u - u * u / (2.0 * gam)
        return 0.5 * lam * lam * gam
    if kind == GP:
        return lam * lam * u / (lam * gam + u)
    # AMCP
    j = lam * gam * (1.0 - phi)
    if u <= j:
        return lam * u - u * u / (2.0 * gam)
    return 0.5 * lam * lam * gam * (1.0 - phi * phi) * (u / j) ** q


@njit(cache=True)
def r_deriv(kind, lam, gam, q, phi, u):
    """Derivative of r at u > 0 (every supported kind is C^1 on (0, inf)).

    At u = 0 this returns the right derivative, +inf for Lq.
    """
    if kind == L1:
        return lam
    if kind == LQ:
        if u == 0.0:
            return np.inf
        return q * lam ** (2.0 - q) * u ** (q - 1.0)
    if kind == SCAD:
        if u <= lam:
            return lam
        if u < lam * (1.0 + gam):
            return lam * (1.0 - (u - lam) / (lam * gam))
        return 0.0
    if kind == LSP:
        return lam * lam / (lam * gam + u)
    if kind == MCP:
        d = lam - u / gam
        return d if d > 0.0 else 0.0
    if kind == GP:
        z = lam * gam + u
        return lam * lam * lam * gam / (z * z)
    j = lam * gam * (1.0 - phi)
    if u <= j:
        return lam - u / gam
    k = 0.5 * lam * lam * gam * (1.0 - phi * phi) / j ** q
    return q * k * u ** (q - 1.0)


@njit(cache=True)
def _r_second(kind, lam, gam, q, phi, u):
    # only used on the smooth concave branches searched by Newton
    if kind == LQ:
        return q * (q - 1.0) * lam ** (2.0 - q) * u ** (q - 2.0)
    if kind == LSP:
        z = lam * gam + u
        return -lam * lam / (z * z)
    if kind == GP:
        z = lam * gam + u
        return -2.0 * lam * lam * lam * gam / (z * z * z)
    j = lam * gam * (1.0 - phi)
    k = 0.5 * lam * lam * gam * (1.0 - phi * phi) / j ** q
    return q * (q - 1.0) * k * u ** (q - 2.0)


@njit(cache=True)
def penalty_sum(kind, lam, gam, q, phi, theta):
    s = 0.0
    for i in range(theta.shape[0]):
        s += r_value(kind, lam, gam, q, phi, abs(theta[i]))
    return s


@njit(cache=True)
def _stationarity(kind, lam, gam, q, phi, a, w, u):
    return a * (u - w) + r_deriv(kind, lam, gam, q, phi, u)


@njit(cache=True)
def _upper_root(kind, lam, gam, q, phi, a, w, lo, hi, u0):
    """Largest zero of h(u) = a (u - w) + r'(u) on [lo, hi].

    Requires h(lo) < 0 <= h(hi) with h convex on the bracket, so Newton
    started right of the root decreases monotonically; bisection is the
    fallback whenever a step leaves the bracket.
    """
    u = min(max(u0, lo), hi)
    for _ in range(_NEWTON_MAXITER):
        hu = _stationarity(kind, lam, gam, q, phi, a, w, u)
        if hu == 0.0:
            return u
        if hu > 0.0:
            hi = u
        else:
            lo = u
        dh = a + _r_second(kind, lam, gam, q, phi, u)
        if dh > 0.0:
            un = u - hu / dh
        else:
            un = 0.5 * (lo + hi)
        if un <= lo or un >= hi:
            un = 0.5 * (lo + hi)
        if abs(un - u) <= _NEWTON_UTOL * max(1.0, abs(u)):
            return un
        u = un
    return u


@njit(cache=True)
def _cubic_real_roots(b, c0, out):
    """Real roots of z^3 - b z^2 + c0 = 0 written into ``out``; returns count."""
    p = -b * b / 3.0
    qq = -2.0 * b * b * b / 27.0 + c0
    shift = b / 3.0
    disc = 0.25 * qq * qq + p * p * p / 27.0
    if disc < 0.0:
        m = 2.0 * math.sqrt(-p / 3.0)
        arg = 3.0 * qq / (2.0 * p) * math.sqrt(-3.0 / p)
        arg = min(1.0, max(-1.0, arg))
        th = math.acos(arg) / 3.0
        for k in range(3):
            out[k] = m * math.cos(th - 2.0 * math.pi * k / 3.0) + shift
        return 3
    sd = math.sqrt(disc)
    s1 = -0.5 * qq + sd
    s2 = -0.5 * qq - sd
    y = math.copysign(abs(s1) ** (1.0 / 3.0), s1) + math.copysign(abs(s2) ** (1.0 / 3.0), s2)
    out[0] = y + shift
    return 1


@njit(cache=True)
def _clip(x, lo, hi):
    if x < lo:
        return lo
    if x > hi:
        return hi
    return x


@njit(cache=True)
def prox_scalar(kind, lam, gam, q, phi, a, v):
    """Global minimizer of 0.5 a (u - v)^2 + r(|u|) over the real line."""
    w = abs(v)
    if w == 0.0:
        return 0.0
    cand = np.empty(12)
    nc = 0
    if kind == L1:
        cand[nc] = max(w - lam / a, 0.0)
        nc += 1
    elif kind == MCP or kind == AMCP:
        if kind == MCP:
            j = lam * gam
        else:
            j = lam * gam * (1.0 - phi)
        top = min(j, w)
        den = a - 1.0 / gam
        if den != 0.0:
            cand[nc] = _clip((a * w - lam) / den, 0.0, top)
            nc += 1
        cand[nc] = top
        nc += 1
        if w >= j:
            cand[nc] = w
            nc += 1
        if kind == AMCP and w > j:
            k = 0.5 * lam * lam * gam * (1.0 - phi * phi) / j ** q
            um = (q * (1.0 - q) * k / a) ** (1.0 / (2.0 - q))
            lo = max(j, um)
            if lo < w and _stationarity(kind, lam, gam, q, phi, a, w, lo) < 0.0:
                cand[nc] = _upper_root(kind, lam, gam, q, phi, a, w, lo, w, w)
                nc += 1
    elif kind == SCAD:
        b1 = lam
        b2 = lam * (1.0 + gam)
        cand[nc] = _clip(w - lam / a, 0.0, min(b1, w))
        nc += 1
        cand[nc] = min(b1, w)
        nc += 1
        if w > b1:
            top = min(b2, w)
            den = a - 1.0 / gam
            if den != 0.0:
                cand[nc] = _clip((a * w - lam * (1.0 + 1.0 / gam)) / den, b1, top)
                nc += 1
            cand[nc] = top
            nc += 1
            if w >= b2:
                cand[nc] = w
                nc += 1
    elif kind == LSP:
        lg = lam * gam
        disc = (lg + w) * (lg + w) - 4.0 * lam * lam / a
        if disc >= 0.0:
            u = 0.5 * (w - lg + math.sqrt(disc))
            if u > 0.0:
                for _ in range(2):
                    dh = a - lam * lam / ((lg + u) * (lg + u))
                    if dh <= 0.0:
                        break
                    u = u - _stationarity(kind, lam, gam, q, phi, a, w, u) / dh
                cand[nc] = _clip(u, 0.0, w)
                nc += 1
    elif kind == GP:
        lg = lam * gam
        roots = np.empty(3)
        nr = _cubic_real_roots(lg + w, lam * lam * lam * gam / a, roots)
        best = -1.0
        for k in range(nr):
            u = roots[k] - lg
            if 0.0 < u <= w and u > best:
                best = u
        um = (2.0 * lam * lam * lam * gam / a) ** (1.0 / 3.0) - lg
        lo = max(um, 0.0)
        if lo < w and _stationarity(kind, lam, gam, q, phi, a, w, lo) < 0.0:
            guess = best if best > lo else w
            cand[nc] = _upper_root(kind, lam, gam, q, phi, a, w, lo, w, guess)
            nc += 1
    else:  # LQ
        um = (q * (1.0 - q) * lam ** (2.0 - q) / a) ** (1.0 / (2.0 - q))
        if um < w and _stationarity(kind, lam, gam, q, phi, a, w, um) < 0.0:
            cand[nc] = _upper_root(kind, lam, gam, q, phi, a, w, um, w, w)
            nc += 1

    f0 = 0.5 * a * w * w
    fmin = f0
    fc = np.empty(nc)
    for k in range(nc):
        d = cand[k] - w
        fc[k] = 0.5 * a * d * d + r_value(kind, lam, gam, q, phi, cand[k])
        if fc[k] < fmin:
            fmin = fc[k]
    tol = _TIE_RTOL * f0
    if f0 <= fmin + tol:
        return 0.0
    u = 0.0
    for k in range(nc):
        if fc[k] <= fmin + tol and cand[k] > u:
            u = cand[k]
    return u if v > 0.0 else -u


@njit(cache=True)
def cd_sweep(xt, resid, theta, colsq, psi, kind, lam, gam, q, phi):
    """One proximal CD sweep in ascending coordinate order.

    ``xt`` is X transposed (p x n, C-contiguous), ``colsq`` holds
    ||x_i||^2 / n.  ``resid`` = y - X theta is updated in place.  Returns the
    squared norm of the change in theta.
    """
    p, n = xt.shape
    delta2 = 0.0
    for i in range(p):
        row = xt[i]
        ci = colsq[i]
        old = theta[i]
        a = ci + psi
        if ci == 0.0:
            new = 0.0 if a == 0.0 else prox_scalar(kind, lam, gam, q, phi, a, old)
        else:
            g = 0.0
            for k in range(n):
                g += row[k] * resid[k]
            v = (psi * old + g / n + ci * old) / a
            new = prox_scalar(kind, lam, gam, q, phi, a, v)
        d = new - old
        if d != 0.0:
            if ci != 0.0:
                for k in range(n):
                    resid[k] -= d * row[k]
            theta[i] = new
            delta2 += d * d
    return delta2
