"""Complete elliptic integrals and the Jacobi cn function.

K and E use the arithmetic-geometric mean; cn uses the descending Landen
(Gauss) transformation.  Modulus convention: K(k), E(k), cn(u, k) with
0 <= k <= 1 (not the parameter m = k^2).
"""

import numpy as np

_TOL = 1e-15  # the AGM stalls at ~1 ulp, so do not push below a few ulps
_MAX_ITER = 40


def complete_K(k):
    """Complete elliptic integral of the first kind, K(0) = pi/2."""
    k = float(k)
    if not 0.0 <= k < 1.0:
        raise ValueError(f"K(k) requires 0 <= k < 1, got {k}")
    a, b = 1.0, np.sqrt(1.0 - k * k)
    for _ in range(_MAX_ITER):
        if abs(a - b) <= _TOL * a:
            break
        a, b = 0.5 * (a + b), np.sqrt(a * b)
    return np.pi / (2.0 * a)


def complete_E(k):
    """Complete elliptic integral of the second kind, E(0) = pi/2, E(1) = 1."""
    k = float(k)
    if not 0.0 <= k <= 1.0:
        raise ValueError(f"E(k) requires 0 <= k <= 1, got {k}")
    if k == 1.0:
        return 1.0
    a, b, c = 1.0, np.sqrt(1.0 - k * k), k
    total = 0.5 * c * c
    power = 0.5
    for _ in range(_MAX_ITER):
        if abs(c) <= _TOL:
            break
        a, b, c = 0.5 * (a + b), np.sqrt(a * b), 0.5 * (a - b)
        power *= 2.0
        total += power * c * c
    return np.pi / (2.0 * a) * (1.0 - total)


def cn(u, k):
    """Jacobi elliptic cn(u, k); cn(u, 0) = cos(u), cn(u, 1) = sech(u)."""
    u = np.asarray(u, dtype=float)
    scalar = u.ndim == 0
    out = np.array([_cn_one(float(x), float(k)) for x in np.atleast_1d(u)])
    return float(out[0]) if scalar else out


def _cn_one(u, k):
    if not 0.0 <= k <= 1.0:
        raise ValueError(f"cn(u, k) requires 0 <= k <= 1, got k={k}")
    mc = 1.0 - k * k
    if mc == 0.0:
        return 1.0 / np.cosh(u)
    if k == 0.0:
        return np.cos(u)
    # descending Landen ladder (AGM), then backward recurrence
    ca = 1e-8  # sqrt of double rounding; final error ~ ca^2
    a, dn = 1.0, 1.0
    em, en = [], []
    emc = mc
    for _ in range(13):
        em.append(a)
        emc = np.sqrt(emc)
        en.append(emc)
        c = 0.5 * (a + emc)
        if abs(a - emc) <= ca * a:
            break
        emc = a * emc
        a = c
    u = c * u
    sn, cnv = np.sin(u), np.cos(u)
    if sn != 0.0:
        a = cnv / sn
        c = a * c
        for ai, bi in zip(reversed(em), reversed(en)):
            b = ai
            a = c * a
            c = dn * c
            dn = (bi + a) / (b + a)
            a = c / b
        a = 1.0 / np.sqrt(c * c + 1.0)
        sn = a if sn >= 0.0 else -a
        cnv = c * sn
    return cnv
