# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled integration core: spin equations of motion plus an adaptive
Dormand-Prince 5(4) stepper with cubic-Hermite dense output.

The pure-Python twin lives in ``spincomb.backends.pure`` and implements the
same module-level API with the same arithmetic; keep the two in sync.
"""

from libc.math cimport sin, cos, sqrt, fabs, fmin, fmax, isfinite
from libc.stdlib cimport malloc, free

import numpy as np

BACKEND_NAME = "compiled"

cdef enum:
    _FULL = 0
    _REDUCED = 1
    _GROUP = 2
    _FLOQUET = 3

# system identifiers (shared with the pure backend)
SYS_FULL = _FULL
SYS_REDUCED = _REDUCED
SYS_GROUP = _GROUP
SYS_FLOQUET = _FLOQUET

DEF MIN_SCALE = 0.2
DEF MAX_SCALE = 5.0
DEF SAFETY = 0.9


cdef void _rhs(int system, double* p, double* y, double* f, int dim) noexcept nogil:
    cdef int n, i
    cdef double W, delta, oa, ob
    cdef double lx, ly, sx, sy, sz, qx, qy, qz
    cdef double spA, spB, szA, szB, c2, s2
    if system == _FULL:
        # y = (sx, sy, sz) per ensemble; p = (W, omega_1..omega_n)
        W = p[0]
        n = dim / 3
        lx = 0.0
        ly = 0.0
        for i in range(n):
            lx += y[3 * i]
            ly += y[3 * i + 1]
        for i in range(n):
            sx = y[3 * i]
            sy = y[3 * i + 1]
            sz = y[3 * i + 2]
            f[3 * i] = -p[1 + i] * sy - 0.5 * W * sx + 0.5 * sz * lx
            f[3 * i + 1] = p[1 + i] * sx - 0.5 * W * sy + 0.5 * sz * ly
            f[3 * i + 2] = W * (1.0 - sz) - 0.5 * (sx * lx + sy * ly)
    elif system == _REDUCED:
        # y = (sx, sy, sz); p = (W, delta)
        W = p[0]
        delta = p[1]
        sx = y[0]
        sy = y[1]
        sz = y[2]
        f[0] = -0.5 * delta * sy - 0.5 * W * sx + sz * sx
        f[1] = 0.5 * delta * sx - 0.5 * W * sy
        f[2] = W * (1.0 - sz) - sx * sx
    elif system == _GROUP:
        # y = (s_perp_A, s_perp_B, s_z_A, s_z_B, varphi, Phi); p = (W, omega_A, omega_B)
        W = p[0]
        oa = p[1]
        ob = p[2]
        spA = y[0]
        spB = y[1]
        szA = y[2]
        szB = y[3]
        c2 = cos(2.0 * y[4])
        s2 = sin(2.0 * y[4])
        f[0] = -0.5 * W * spA + 0.5 * szA * (spA + spB * c2)
        f[1] = -0.5 * W * spB + 0.5 * szB * (spA * c2 + spB)
        f[2] = W * (1.0 - szA) - 0.5 * spA * (spA + spB * c2)
        f[3] = W * (1.0 - szB) - 0.5 * spB * (spA * c2 + spB)
        f[4] = 0.5 * (oa - ob) - 0.25 * s2 * (szA * spB / spA + szB * spA / spB)
        f[5] = 0.5 * (oa + ob) + 0.25 * s2 * (szB * spA / spB - szA * spB / spA)
    else:
        # SYS_FLOQUET: y = reduced spin (3) + three tangent columns (9); p = (W, delta)
        W = p[0]
        delta = p[1]
        sx = y[0]
        sy = y[1]
        sz = y[2]
        f[0] = -0.5 * delta * sy - 0.5 * W * sx + sz * sx
        f[1] = 0.5 * delta * sx - 0.5 * W * sy
        f[2] = W * (1.0 - sz) - sx * sx
        for i in range(3):
            qx = y[3 + 3 * i]
            qy = y[4 + 3 * i]
            qz = y[5 + 3 * i]
            f[3 + 3 * i] = -0.5 * delta * qy - 0.5 * W * qx + sx * qz
            f[4 + 3 * i] = 0.5 * delta * qx + (sz - 0.5 * W) * qy
            f[5 + 3 * i] = -W * qz - sx * qx - sy * qy


cdef double _section(int system, double* p, double* y) noexcept nogil:
    """d(s_perp_A)/dt up to a positive factor; + -> - crossings are s_perp maxima."""
    cdef double f[42]
    if system == _GROUP:
        _rhs(system, p, y, f, 6)
        return f[0]
    _rhs(system, p, y, f, 12 if system == _FLOQUET else 6)
    return y[0] * f[0] + y[1] * f[1]


cdef struct Stepper:
    int system
    int dim
    double* p
    double rtol
    double atol
    double max_step
    double t
    double h
    double* y
    double* f      # FSAL derivative at (t, y)
    double* work   # 8*dim scratch: k2..k7, ytmp, yerr
    long naccept
    long nreject


cdef int _step(Stepper* st, double t_limit) except -1 nogil:
    """Advance one accepted DP5(4) step, not stepping past t_limit.

    Leaves the previous state in work[6*dim] (y_old) and its derivative in
    work[7*dim] (f_old) so callers can interpolate across the step.
    """
    cdef int dim = st.dim
    cdef double* y = st.y
    cdef double* f = st.f
    cdef double* k2 = st.work
    cdef double* k3 = st.work + dim
    cdef double* k4 = st.work + 2 * dim
    cdef double* k5 = st.work + 3 * dim
    cdef double* k6 = st.work + 4 * dim
    cdef double* k7 = st.work + 5 * dim
    cdef double* yold = st.work + 6 * dim
    cdef double* fold = st.work + 7 * dim
    cdef double* ytmp
    cdef double h, err, sc, e, ynew, scale
    cdef int i
    ytmp = <double*> malloc(dim * sizeof(double))
    if ytmp == NULL:
        with gil:
            raise MemoryError()
    try:
        while True:
            h = fmin(st.h, t_limit - st.t)
            if h < 1e-14 * fmax(1.0, fabs(st.t)):
                with gil:
                    raise RuntimeError(
                        f"step size underflow at t={st.t!r} (h={h!r})")
            # stage 2
            for i in range(dim):
                ytmp[i] = y[i] + h * (0.2 * f[i])
            _rhs(st.system, st.p, ytmp, k2, dim)
            # stage 3
            for i in range(dim):
                ytmp[i] = y[i] + h * (3.0 / 40.0 * f[i] + 9.0 / 40.0 * k2[i])
            _rhs(st.system, st.p, ytmp, k3, dim)
            # stage 4
            for i in range(dim):
                ytmp[i] = y[i] + h * (44.0 / 45.0 * f[i] - 56.0 / 15.0 * k2[i]
                                      + 32.0 / 9.0 * k3[i])
            _rhs(st.system, st.p, ytmp, k4, dim)
            # stage 5
            for i in range(dim):
                ytmp[i] = y[i] + h * (19372.0 / 6561.0 * f[i] - 25360.0 / 2187.0 * k2[i]
                                      + 64448.0 / 6561.0 * k3[i] - 212.0 / 729.0 * k4[i])
            _rhs(st.system, st.p, ytmp, k5, dim)
            # stage 6
            for i in range(dim):
                ytmp[i] = y[i] + h * (9017.0 / 3168.0 * f[i] - 355.0 / 33.0 * k2[i]
                                      + 46732.0 / 5247.0 * k3[i] + 49.0 / 176.0 * k4[i]
                                      - 5103.0 / 18656.0 * k5[i])
            _rhs(st.system, st.p, ytmp, k6, dim)
            # 5th order solution (stage 7 nodes)
            for i in range(dim):
                ytmp[i] = y[i] + h * (35.0 / 384.0 * f[i] + 500.0 / 1113.0 * k3[i]
                                      + 125.0 / 192.0 * k4[i] - 2187.0 / 6784.0 * k5[i]
                                      + 11.0 / 84.0 * k6[i])
            _rhs(st.system, st.p, ytmp, k7, dim)
            # error estimate via embedded 4th order solution
            err = 0.0
            for i in range(dim):
                ynew = ytmp[i]
                e = h * (71.0 / 57600.0 * f[i] - 71.0 / 16695.0 * k3[i]
                         + 71.0 / 1920.0 * k4[i] - 17253.0 / 339200.0 * k5[i]
                         + 22.0 / 525.0 * k6[i] - 1.0 / 40.0 * k7[i])
                sc = st.atol + st.rtol * fmax(fabs(y[i]), fabs(ynew))
                err += (e / sc) * (e / sc)
            err = sqrt(err / dim)
            if err <= 1.0 and isfinite(err):
                for i in range(dim):
                    yold[i] = y[i]
                    fold[i] = f[i]
                    y[i] = ytmp[i]
                    f[i] = k7[i]
                st.t += h
                st.naccept += 1
                scale = SAFETY * err ** -0.2 if err > 0.0 else MAX_SCALE
                st.h = fmin(h * fmin(MAX_SCALE, fmax(MIN_SCALE, scale)), st.max_step)
                return 0
            st.nreject += 1
            scale = SAFETY * err ** -0.2 if isfinite(err) else MIN_SCALE
            st.h = h * fmin(1.0, fmax(MIN_SCALE, scale))
    finally:
        free(ytmp)


cdef void _hermite(Stepper* st, double h, double theta, double* out) noexcept nogil:
    """Cubic Hermite interpolant over the last accepted step (theta in [0, 1])."""
    cdef int dim = st.dim
    cdef double* y1 = st.y
    cdef double* f1 = st.f
    cdef double* y0 = st.work + 6 * dim
    cdef double* f0 = st.work + 7 * dim
    cdef double a, b, c, d
    cdef int i
    a = 1.0 - theta
    for i in range(dim):
        d = y1[i] - y0[i]
        out[i] = (a * y0[i] + theta * y1[i]
                  + theta * (theta - 1.0) * ((1.0 - 2.0 * theta) * d
                                             + (theta - 1.0) * h * f0[i]
                                             + theta * h * f1[i]))


cdef double _init_step(int system, double* p, double* y0, double* f0, int dim,
                       double rtol, double atol, double span, double max_step) noexcept nogil:
    cdef double d0 = 0.0, d1 = 0.0, sc
    cdef int i
    for i in range(dim):
        sc = atol + rtol * fabs(y0[i])
        d0 += (y0[i] / sc) * (y0[i] / sc)
        d1 += (f0[i] / sc) * (f0[i] / sc)
    d0 = sqrt(d0 / dim)
    d1 = sqrt(d1 / dim)
    cdef double h = 1e-6
    if d1 > 1e-12:
        h = 0.01 * d0 / d1
    if h <= 0.0 or not isfinite(h):
        h = 1e-6
    return fmin(fmin(h, span), max_step)


cdef int _setup(Stepper* st, int system, double[::1] params, double[::1] y0,
                double t0, double span, double rtol, double atol,
                double max_step, double h0) except -1:
    cdef int dim = y0.shape[0]
    st.system = system
    st.dim = dim
    st.rtol = rtol
    st.atol = atol
    st.max_step = max_step if max_step > 0.0 else 1e30
    st.t = t0
    st.naccept = 0
    st.nreject = 0
    st.p = <double*> malloc(params.shape[0] * sizeof(double))
    st.y = <double*> malloc(dim * sizeof(double))
    st.f = <double*> malloc(dim * sizeof(double))
    st.work = <double*> malloc(8 * dim * sizeof(double))
    if st.p == NULL or st.y == NULL or st.f == NULL or st.work == NULL:
        _teardown(st)
        raise MemoryError()
    cdef int i
    for i in range(params.shape[0]):
        st.p[i] = params[i]
    for i in range(dim):
        st.y[i] = y0[i]
    _rhs(system, st.p, st.y, st.f, dim)
    st.h = h0 if h0 > 0.0 else _init_step(system, st.p, st.y, st.f, dim,
                                          rtol, atol, span, st.max_step)
    return 0


cdef void _teardown(Stepper* st) noexcept:
    free(st.p)
    free(st.y)
    free(st.f)
    free(st.work)


def rhs(int system, double[::1] params, double[::1] y):
    """Evaluate the right-hand side once (mainly for tests and benchmarks)."""
    out = np.empty(y.shape[0])
    cdef double[::1] mv = out
    cdef double* p = <double*> malloc(params.shape[0] * sizeof(double))
    cdef double* yy = <double*> malloc(y.shape[0] * sizeof(double))
    cdef double* ff = <double*> malloc(y.shape[0] * sizeof(double))
    if p == NULL or yy == NULL or ff == NULL:
        free(p); free(yy); free(ff)
        raise MemoryError()
    cdef int i
    for i in range(params.shape[0]):
        p[i] = params[i]
    for i in range(y.shape[0]):
        yy[i] = y[i]
    _rhs(system, p, yy, ff, y.shape[0])
    for i in range(y.shape[0]):
        mv[i] = ff[i]
    free(p); free(yy); free(ff)
    return out


cdef void _copy_out(double[::1] dst, double* src, int dim):
    cdef int i
    for i in range(dim):
        dst[i] = src[i]


def integrate_final(int system, double[::1] params, double[::1] y0,
                    double t0, double t1, double rtol, double atol,
                    double max_step=0.0, double h0=0.0):
    """Integrate to t1 and return (y(t1), naccepted, nrejected)."""
    cdef Stepper st
    _setup(&st, system, params, y0, t0, t1 - t0, rtol, atol, max_step, h0)
    try:
        while st.t < t1 - 1e-14 * fmax(1.0, fabs(t1)):
            _step(&st, t1)
        out = np.empty(st.dim)
        _copy_out(out, st.y, st.dim)
        return out, st.naccept, st.nreject
    finally:
        _teardown(&st)


def integrate_sampled(int system, double[::1] params, double[::1] y0,
                      double t0, double t1, double dt, double rtol, double atol,
                      double max_step=0.0, double h0=0.0):
    """Integrate over [t0, t1], sampling every dt via dense output.

    Returns (t_samples, y_samples, naccepted, nrejected); the first sample is
    taken at t0.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    cdef long nsamp = <long> ((t1 - t0) / dt * (1.0 + 1e-12)) + 1
    ts = t0 + dt * np.arange(nsamp)
    ys = np.empty((nsamp, y0.shape[0]))
    cdef double[:, ::1] ymv = ys
    cdef double[::1] tmv = ts
    cdef Stepper st
    _setup(&st, system, params, y0, t0, t1 - t0, rtol, atol, max_step, h0)
    cdef long k = 0
    cdef int i
    cdef double tprev, hstep, theta
    cdef double* interp = <double*> malloc(st.dim * sizeof(double))
    if interp == NULL:
        _teardown(&st)
        raise MemoryError()
    try:
        for i in range(st.dim):
            ymv[0, i] = st.y[i]
        k = 1
        while k < nsamp:
            tprev = st.t
            _step(&st, t1)
            hstep = st.t - tprev
            while k < nsamp and tmv[k] <= st.t + 1e-12 * fmax(1.0, fabs(st.t)):
                theta = (tmv[k] - tprev) / hstep
                if theta > 1.0:
                    theta = 1.0
                _hermite(&st, hstep, theta, interp)
                for i in range(st.dim):
                    ymv[k, i] = interp[i]
                k += 1
        return ts, ys, st.naccept, st.nreject
    finally:
        free(interp)
        _teardown(&st)


def integrate_to_section(int system, double[::1] params, double[::1] y0,
                         double t0, double t_max, int ncross,
                         double rtol, double atol, double max_step=0.0,
                         double skip_time=0.0):
    """Integrate until the ncross-th + -> - crossing of d(s_perp_A)/dt = 0.

    Returns (t_cross, y_cross, found). Crossings before t0 + skip_time are
    ignored.
    """
    cdef Stepper st
    _setup(&st, system, params, y0, t0, t_max - t0, rtol, atol, max_step, 0.0)
    cdef double gprev, gnew, tprev, hstep, lo, hi, mid, glo
    cdef int count = 0, i, it
    cdef double* interp = <double*> malloc(st.dim * sizeof(double))
    if interp == NULL:
        _teardown(&st)
        raise MemoryError()
    try:
        gprev = _section(st.system, st.p, st.y)
        while st.t < t_max:
            tprev = st.t
            _step(&st, t_max)
            hstep = st.t - tprev
            gnew = _section(st.system, st.p, st.y)
            if (gprev > 1e-14 and gnew < -1e-14
                    and tprev >= t0 + skip_time):
                count += 1
                if count == ncross:
                    # bisect on theta within the step
                    lo = 0.0
                    hi = 1.0
                    glo = gprev
                    for it in range(90):
                        mid = 0.5 * (lo + hi)
                        _hermite(&st, hstep, mid, interp)
                        gnew = _section(st.system, st.p, interp)
                        if (glo > 0.0) == (gnew > 0.0):
                            lo = mid
                            glo = gnew
                        else:
                            hi = mid
                        if hi - lo < 1e-15:
                            break
                    mid = 0.5 * (lo + hi)
                    _hermite(&st, hstep, mid, interp)
                    out = np.empty(st.dim)
                    _copy_out(out, interp, st.dim)
                    return tprev + mid * hstep, out, True
            gprev = gnew
        out = np.empty(st.dim)
        _copy_out(out, st.y, st.dim)
        return st.t, out, False
    finally:
        free(interp)
        _teardown(&st)
