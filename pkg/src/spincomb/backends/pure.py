"""Pure-Python fallback for the integration core.

Implements the same module-level API as the compiled ``kernels`` extension
(Dormand-Prince 5(4) with cubic-Hermite dense output) in plain numpy.  It is
two to three orders of magnitude slower and exists so the package works
without a C toolchain; see ``benchmarks/bench_backends.py``.
"""

import numpy as np

BACKEND_NAME = "pure"

SYS_FULL = 0
SYS_REDUCED = 1
SYS_GROUP = 2
SYS_FLOQUET = 3

_MIN_SCALE = 0.2
_MAX_SCALE = 5.0
_SAFETY = 0.9

_A = (
    np.array([0.2]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
)
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_ERR = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920,
                 -17253 / 339200, 22 / 525, -1 / 40])


def rhs(system, params, y):
    """Evaluate the right-hand side once."""
    y = np.asarray(y, dtype=float)
    f = np.empty_like(y)
    if system == SYS_FULL:
        W = params[0]
        n = y.shape[0] // 3
        omega = params[1:1 + n]
        sx = y[0::3]
        sy = y[1::3]
        sz = y[2::3]
        lx = sx.sum()
        ly = sy.sum()
        f[0::3] = -omega * sy - 0.5 * W * sx + 0.5 * sz * lx
        f[1::3] = omega * sx - 0.5 * W * sy + 0.5 * sz * ly
        f[2::3] = W * (1.0 - sz) - 0.5 * (sx * lx + sy * ly)
    elif system == SYS_REDUCED:
        W, delta = params[0], params[1]
        sx, sy, sz = y
        f[0] = -0.5 * delta * sy - 0.5 * W * sx + sz * sx
        f[1] = 0.5 * delta * sx - 0.5 * W * sy
        f[2] = W * (1.0 - sz) - sx * sx
    elif system == SYS_GROUP:
        W, oa, ob = params[0], params[1], params[2]
        spA, spB, szA, szB, phi = y[0], y[1], y[2], y[3], y[4]
        c2 = np.cos(2.0 * phi)
        s2 = np.sin(2.0 * phi)
        f[0] = -0.5 * W * spA + 0.5 * szA * (spA + spB * c2)
        f[1] = -0.5 * W * spB + 0.5 * szB * (spA * c2 + spB)
        f[2] = W * (1.0 - szA) - 0.5 * spA * (spA + spB * c2)
        f[3] = W * (1.0 - szB) - 0.5 * spB * (spA * c2 + spB)
        f[4] = 0.5 * (oa - ob) - 0.25 * s2 * (szA * spB / spA + szB * spA / spB)
        f[5] = 0.5 * (oa + ob) + 0.25 * s2 * (szB * spA / spB - szA * spB / spA)
    elif system == SYS_FLOQUET:
        W, delta = params[0], params[1]
        sx, sy, sz = y[0], y[1], y[2]
        f[0] = -0.5 * delta * sy - 0.5 * W * sx + sz * sx
        f[1] = 0.5 * delta * sx - 0.5 * W * sy
        f[2] = W * (1.0 - sz) - sx * sx
        q = y[3:].reshape(3, 3)
        fq = f[3:].reshape(3, 3)
        fq[:, 0] = -0.5 * delta * q[:, 1] - 0.5 * W * q[:, 0] + sx * q[:, 2]
        fq[:, 1] = 0.5 * delta * q[:, 0] + (sz - 0.5 * W) * q[:, 1]
        fq[:, 2] = -W * q[:, 2] - sx * q[:, 0] - sy * q[:, 1]
    else:
        raise ValueError(f"unknown system id {system}")
    return f


def _section(system, params, y):
    if system == SYS_GROUP:
        return rhs(system, params, y)[0]
    f = rhs(system, params, y)
    return y[0] * f[0] + y[1] * f[1]


class _Stepper:
    def __init__(self, system, params, y0, t0, span, rtol, atol, max_step, h0):
        self.system = system
        self.p = np.asarray(params, dtype=float)
        self.y = np.array(y0, dtype=float)
        self.t = t0
        self.rtol = rtol
        self.atol = atol
        self.max_step = max_step if max_step > 0.0 else 1e30
        self.f = rhs(system, self.p, self.y)
        self.naccept = 0
        self.nreject = 0
        self.y_old = self.y.copy()
        self.f_old = self.f.copy()
        if h0 > 0.0:
            self.h = h0
        else:
            sc = atol + rtol * np.abs(self.y)
            d0 = np.sqrt(np.mean((self.y / sc) ** 2))
            d1 = np.sqrt(np.mean((self.f / sc) ** 2))
            h = 0.01 * d0 / d1 if d1 > 1e-12 else 1e-6
            if not np.isfinite(h) or h <= 0.0:
                h = 1e-6
            self.h = min(h, span, self.max_step)

    def step(self, t_limit):
        while True:
            h = min(self.h, t_limit - self.t)
            if h < 1e-14 * max(1.0, abs(self.t)):
                raise RuntimeError(
                    f"step size underflow at t={self.t!r} (h={h!r})")
            k = [self.f]
            for row in _A:
                yt = self.y + h * (row @ np.array(k[: len(row)])
                                   if len(row) > 1 else row[0] * k[0])
                k.append(rhs(self.system, self.p, yt))
            k = np.array(k)
            y5 = self.y + h * (_B5[:6] @ k)
            k7 = rhs(self.system, self.p, y5)
            kk = np.vstack([k, k7[None, :]])
            e = h * (_ERR @ kk)
            sc = self.atol + self.rtol * np.maximum(np.abs(self.y), np.abs(y5))
            err = np.sqrt(np.mean((e / sc) ** 2))
            if err <= 1.0 and np.isfinite(err):
                self.y_old = self.y
                self.f_old = self.f
                self.y = y5
                self.f = k7
                self.t += h
                self.naccept += 1
                scale = _SAFETY * err ** -0.2 if err > 0.0 else _MAX_SCALE
                self.h = min(h * min(_MAX_SCALE, max(_MIN_SCALE, scale)),
                             self.max_step)
                return h
            self.nreject += 1
            scale = _SAFETY * err ** -0.2 if np.isfinite(err) else _MIN_SCALE
            self.h = h * min(1.0, max(_MIN_SCALE, scale))

    def hermite(self, h, theta):
        d = self.y - self.y_old
        return ((1.0 - theta) * self.y_old + theta * self.y
                + theta * (theta - 1.0) * ((1.0 - 2.0 * theta) * d
                                           + (theta - 1.0) * h * self.f_old
                                           + theta * h * self.f))


def integrate_final(system, params, y0, t0, t1, rtol, atol,
                    max_step=0.0, h0=0.0):
    """Integrate to t1 and return (y(t1), naccepted, nrejected)."""
    st = _Stepper(system, params, y0, t0, t1 - t0, rtol, atol, max_step, h0)
    while st.t < t1 - 1e-14 * max(1.0, abs(t1)):
        st.step(t1)
    return st.y.copy(), st.naccept, st.nreject


def integrate_sampled(system, params, y0, t0, t1, dt, rtol, atol,
                      max_step=0.0, h0=0.0):
    """Integrate over [t0, t1], sampling every dt via dense output."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    nsamp = int((t1 - t0) / dt * (1.0 + 1e-12)) + 1
    ts = t0 + dt * np.arange(nsamp)
    ys = np.empty((nsamp, len(y0)))
    st = _Stepper(system, params, y0, t0, t1 - t0, rtol, atol, max_step, h0)
    ys[0] = st.y
    k = 1
    while k < nsamp:
        tprev = st.t
        h = st.step(t1)
        while k < nsamp and ts[k] <= st.t + 1e-12 * max(1.0, abs(st.t)):
            theta = min((ts[k] - tprev) / h, 1.0)
            ys[k] = st.hermite(h, theta)
            k += 1
    return ts, ys, st.naccept, st.nreject


def integrate_to_section(system, params, y0, t0, t_max, ncross, rtol, atol,
                         max_step=0.0, skip_time=0.0):
    """Integrate until the ncross-th + -> - crossing of d(s_perp_A)/dt = 0."""
    st = _Stepper(system, params, y0, t0, t_max - t0, rtol, atol, max_step, 0.0)
    gprev = _section(system, st.p, st.y)
    count = 0
    while st.t < t_max:
        tprev = st.t
        h = st.step(t_max)
        gnew = _section(system, st.p, st.y)
        if gprev > 1e-14 and gnew < -1e-14 and tprev >= t0 + skip_time:
            count += 1
            if count == ncross:
                lo, hi, glo = 0.0, 1.0, gprev
                for _ in range(90):
                    mid = 0.5 * (lo + hi)
                    g = _section(system, st.p, st.hermite(h, mid))
                    if (glo > 0.0) == (g > 0.0):
                        lo, glo = mid, g
                    else:
                        hi = mid
                    if hi - lo < 1e-15:
                        break
                mid = 0.5 * (lo + hi)
                return tprev + mid * h, st.hermite(h, mid), True
        gprev = gnew
    return st.t, st.y.copy(), False
