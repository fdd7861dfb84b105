"""Compiled inner loops: potential evaluation, Pruefer phase integration, banded LDL^T."""

import math

import numpy as np
from numba import njit

STATUS_OK = 0
STATUS_NONFINITE = 1
STATUS_MAXSTEPS = 2
STATUS_STEPSIZE = 3

# Dormand-Prince 5(4) tableau
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# difference between 5th and embedded 4th order weights
_E1 = 71 / 57600
_E3 = -71 / 16695
_E4 = 71 / 1920
_E5 = -17253 / 339200
_E6 = 22 / 525
_E7 = -1 / 40


@njit(cache=True, nogil=True)
def q_and_dq(kind, par, tx, ty, t):
    """Profile value and derivative at ``t``; NaN outside a table's range."""
    if kind == 0:
        return 0.0, 0.0
    scale = par[0]
    s = t + par[2]
    if kind == 1:
        base = 1.0 + s
        v = scale * base ** (-2.0 * par[1])
        return v, -2.0 * par[1] * v / base
    if kind == 2:
        v = scale * math.exp(-2.0 * par[1] * s)
        return v, -2.0 * par[1] * v
    n = tx.shape[0]
    if s > tx[n - 1]:
        if par[3] > 0.0:
            return scale * ty[n - 1], 0.0
        return np.nan, np.nan
    if s < tx[0]:
        return np.nan, np.nan
    i = np.searchsorted(tx, s, side="right") - 1
    if i > n - 2:
        i = n - 2
    slope = (ty[i + 1] - ty[i]) / (tx[i + 1] - tx[i])
    return scale * (ty[i] + slope * (s - tx[i])), scale * slope


@njit(cache=True, nogil=True)
def _rhs(t, xi, lam, lam0, vsign, kind, par, tx, ty):
    q, dq = q_and_dq(kind, par, tx, ty, t)
    f2 = lam0 + q
    f = math.sqrt(f2)
    s = math.sin(xi)
    c = math.cos(xi)
    return f * c * c + (lam - vsign * q) / f * s * s + dq / (2.0 * f2) * s * c


@njit(cache=True, nogil=True)
def prufer_phase(r1, r2, lam, vsign, kind, par, tx, ty, b, rtol, atol, max_steps):
    """Integrate the Pruefer phase from ``xi(r1) = 0`` to ``r2``.

    The amplitude weight is ``f = sqrt(q + lam0)``, ``lam0 = |lam| + 1``.  At every
    integer strictly inside ``(r1, r2)`` the matching conditions
    ``y(n+) = sqrt(b) y(n-)``, ``y'(n+) = y'(n-)/sqrt(b)`` act on the phase as
    ``tan xi+ = b tan xi-`` within the same branch.

    Returns ``(xi, status, steps)``.
    """
    lam0 = abs(lam) + 1.0
    xi = 0.0
    t = r1
    q0, _ = q_and_dq(kind, par, tx, ty, t)
    h = 0.25 / math.sqrt(lam0 + q0)
    steps = 0
    n_next = math.floor(r1) + 1.0
    k1 = _rhs(t, xi, lam, lam0, vsign, kind, par, tx, ty)
    if not math.isfinite(k1):
        return xi, STATUS_NONFINITE, steps
    while True:
        seg_end = n_next if n_next < r2 else r2
        while t < seg_end:
            if steps >= max_steps:
                return xi, STATUS_MAXSTEPS, steps
            last = False
            h_prop = h
            if t + h >= seg_end:
                h = seg_end - t
                last = True
            k2 = _rhs(t + _C2 * h, xi + h * (_A21 * k1), lam, lam0, vsign, kind, par, tx, ty)
            k3 = _rhs(t + _C3 * h, xi + h * (_A31 * k1 + _A32 * k2), lam, lam0, vsign, kind, par, tx, ty)
            k4 = _rhs(t + _C4 * h, xi + h * (_A41 * k1 + _A42 * k2 + _A43 * k3),
                      lam, lam0, vsign, kind, par, tx, ty)
            k5 = _rhs(t + _C5 * h, xi + h * (_A51 * k1 + _A52 * k2 + _A53 * k3 + _A54 * k4),
                      lam, lam0, vsign, kind, par, tx, ty)
            k6 = _rhs(t + h, xi + h * (_A61 * k1 + _A62 * k2 + _A63 * k3 + _A64 * k4 + _A65 * k5),
                      lam, lam0, vsign, kind, par, tx, ty)
            xn = xi + h * (_B1 * k1 + _B3 * k3 + _B4 * k4 + _B5 * k5 + _B6 * k6)
            tn = seg_end if last else t + h
            k7 = _rhs(tn, xn, lam, lam0, vsign, kind, par, tx, ty)
            err = abs(h * (_E1 * k1 + _E3 * k3 + _E4 * k4 + _E5 * k5 + _E6 * k6 + _E7 * k7))
            if not math.isfinite(err) or not math.isfinite(xn):
                if h < 1e-14:
                    return xi, STATUS_NONFINITE, steps
                h *= 0.25
                continue
            sc = atol + rtol * max(abs(xi), abs(xn))
            ratio = err / sc
            steps += 1
            if ratio <= 1.0:
                t = tn
                xi = xn
                k1 = k7
                fac = 5.0 if ratio == 0.0 else min(5.0, max(0.2, 0.9 * ratio ** -0.2))
                h = max(h_prop, h * fac) if last else h * fac
            else:
                h *= max(0.2, 0.9 * ratio ** -0.2)
                if h < 1e-13 * max(1.0, abs(t)):
                    return xi, STATUS_STEPSIZE, steps
        if seg_end >= r2:
            break
        # matching conditions at the integer seg_end
        m = math.floor(xi / math.pi)
        th = xi - m * math.pi
        xi = m * math.pi + math.atan2(b * math.sin(th), math.cos(th))
        k1 = _rhs(t, xi, lam, lam0, vsign, kind, par, tx, ty)
        n_next += 1.0
    return xi, STATUS_OK, steps


@njit(cache=True, nogil=True)
def banded_ldl_inertia(ab, rel_tiny):
    """Count negative pivots of a symmetric banded matrix via LDL^T without pivoting.

    ``ab[j, i] = A[i + j, i]`` holds the lower band (``j = 0..p``).  Returns
    ``(negatives, zero_pivot_index)`` where the index is ``-1`` unless some pivot
    is below ``rel_tiny`` times the size of its row.
    """
    p = ab.shape[0] - 1
    n = ab.shape[1]
    # L stored like ab: L[j, i] = L_{i+j, i}
    L = np.zeros_like(ab)
    d = np.zeros(n)
    neg = 0
    for j in range(n):
        s = ab[0, j]
        for k in range(max(0, j - p), j):
            l_jk = L[j - k, k]
            s -= l_jk * l_jk * d[k]
        scale = abs(ab[0, j])
        for i in range(1, p + 1):
            if i < ab.shape[0] and j + i < n:
                scale += abs(ab[i, j])
            if j - i >= 0:
                scale += abs(ab[i, j - i])
        if abs(s) <= rel_tiny * scale:
            return neg, j
        d[j] = s
        if s < 0:
            neg += 1
        for i in range(j + 1, min(n, j + p + 1)):
            v = ab[i - j, j]
            for k in range(max(0, i - p), j):
                v -= L[i - k, k] * L[j - k, k] * d[k]
            L[i - j, j] = v / s
    return neg, -1
