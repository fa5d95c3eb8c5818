"""Limit cycles: numerical detection, analytic approximations, Floquet
stability and symmetry diagnostics.

Periodic attractors are located by a Poincare section at the maxima of the
A-ensemble transverse magnitude, a recurrence scan over section crossings,
and Newton refinement of the (state, period) shooting problem.  Cycles that
precess about the z-axis (nonzero offset frequency) are closed modulo a
rotation, with the rotation angle solved alongside.
"""

from dataclasses import dataclass, field

import numpy as np

from . import backends
from .params import (ModelParams, random_state, reduced_to_full,
                     group_from_full)
from .dynamics import rotate_z
from .elliptic import complete_K, cn
from .normalform import _z_ratio

_ZMAX = -1.5045112808  # max of the modulus equation on (1/sqrt2, 1)
_KMAX = 0.9640467470


class TransientNotSettled(RuntimeError):
    """Oscillation amplitude still drifting at the end of the search horizon."""


@dataclass(frozen=True)
class CycleOptions:
    transient: float = 5e3
    horizon: float = 2e4          # crossing search window after the transient
    rtol: float = 1e-10
    atol: float = 1e-12
    match_tol: float = 1e-4       # coarse recurrence threshold
    closure_tol: float = 1e-7
    newton_tol: float = 1e-10
    max_crossings: int = 64
    samples: int = 2048
    z2_tol: float = 0.01
    seed: int = 0


@dataclass
class LimitCycle:
    period: float
    t: np.ndarray                 # samples spanning [0, T]
    y: np.ndarray                 # full-space samples, shape (m+1, 6)
    params: ModelParams
    z2_symmetric: bool
    omega_q: float
    closure: float
    theta: float = 0.0            # rotation over one period
    reduced: np.ndarray = None    # submanifold samples when found there
    meta: dict = field(default_factory=dict)

    @property
    def f0(self):
        return 1.0 / self.period

    def to_dict(self):
        return {"T": self.period, "f0": self.f0,
                "z2_symmetric": bool(self.z2_symmetric),
                "omega_q": self.omega_q, "closure": self.closure}


def _invariants(y):
    """Rotation-invariant signature of a two-ensemble state."""
    spA = np.hypot(y[0], y[1])
    spB = np.hypot(y[3], y[4])
    z = (y[0] + 1j * y[1]) * (y[3] - 1j * y[4])
    sp = spA * spB
    c2, s2 = (z.real / sp, z.imag / sp) if sp > 1e-300 else (1.0, 0.0)
    return np.array([spA, spB, y[2], y[5], c2, s2])


def _advance(system, p, y, dt, o):
    out, _, _ = backends.integrate_final(system, p, y, 0.0, dt, o.rtol, o.atol)
    return out


def _crossings(system, p, y, o, count, t_skip=1e-3):
    """Successive section crossings (s_perp_A maxima) from state y.

    t_skip guards against re-detecting the crossing a refined section state
    sits on; it must stay well below half a period.
    """
    out, t = [], 0.0
    while len(out) < count and t < o.horizon:
        tc, yc, found = backends.integrate_to_section(
            system, p, y, 0.0, min(2e3, o.horizon - t), 1,
            o.rtol, o.atol, skip_time=t_skip)
        if not found:
            break
        t += tc
        y = yc
        out.append((t, yc.copy()))
    return out


def _newton_shoot(system, p, x0, T0, o, theta=None):
    """Newton refinement of the closure problem.

    Unknowns are the section state, the period and (optionally) the rotation
    angle; equations are state closure, the section condition and, with a
    free angle, a rotational phase anchor.
    """
    dim = x0.shape[0]
    rotating = theta is not None
    anchor = np.zeros(dim)
    if rotating:
        anchor = np.array([-x0[1], x0[0], 0.0, -x0[4], x0[3], 0.0])
    x_ref = x0.copy()

    def g_of(x):
        f = backends.rhs(system, p, x)
        return x[0] * f[0] + x[1] * f[1]

    def residual(u):
        x = u[:dim]
        T = u[dim]
        xT = _advance(system, p, x, T, o)
        if rotating:
            xT = rotate_z(xT, -u[dim + 1])
        out = np.empty(dim + 1 + rotating)
        out[:dim] = xT - x
        out[dim] = g_of(x)
        if rotating:
            out[dim + 1] = anchor @ (x - x_ref)
        return out

    u = np.concatenate([x0, [T0] + ([theta] if rotating else [])])
    scale = max(1.0, np.max(np.abs(x0)))
    for _ in range(14):
        F = residual(u)
        if np.max(np.abs(F)) < o.newton_tol:
            break
        m = len(F)
        Jm = np.empty((m, len(u)))
        for j in range(len(u)):
            eps = 1e-7 * max(1.0, abs(u[j]))
            up = u.copy()
            up[j] += eps
            Jm[:, j] = (residual(up) - F) / eps
        try:
            du = np.linalg.solve(Jm, -F)
        except np.linalg.LinAlgError:
            return None
        limit = 0.5 * max(scale, u[dim])
        step = np.max(np.abs(du))
        if step > limit:
            du *= limit / step
        u = u + du
        if u[dim] <= 0:
            return None
    F = residual(u)
    closure = float(np.max(np.abs(F[:dim])))
    if closure > o.closure_tol:
        return None
    x = u[:dim]
    T = float(u[dim])
    th = float(u[dim + 1]) if rotating else 0.0
    return x, T, th, closure


def _settled_start(system, p, y0, o):
    y = _advance(system, p, y0, o.transient, o)
    ts, ys, _, _ = backends.integrate_sampled(system, p, y, 0.0, 200.0, 0.5,
                                              o.rtol, o.atol)
    if np.max(np.ptp(ys, axis=0)) < 1e-8:
        return None  # reached a fixed point
    return ys[-1]


def _recurrence(points, match_tol):
    """Smallest crossing count after which the section state recurs."""
    t0, x0 = points[0]
    scale = max(1.0, np.max(np.abs(x0)))
    dists = [np.max(np.abs(points[m][1] - x0)) / scale
             for m in range(1, len(points))]
    for m, d in enumerate(dists, start=1):
        if d < match_tol:
            return m, dists
    return None, dists


def find_limit_cycle(params, initial=None, options=CycleOptions()):
    """Locate a periodic attractor; returns None when no recurrence is found.

    `initial` of length 3 searches the Z2 submanifold; length 6 (or None,
    seeded random) searches the full space.  Raises TransientNotSettled when
    the section states are still drifting monotonically at the horizon.
    """
    o = options
    if initial is None:
        initial = random_state(2, np.random.default_rng(o.seed))
    y0 = np.asarray(initial, dtype=float)
    if y0.shape[0] == 3:
        return _find_reduced(params, y0, o)
    if y0.shape[0] == 6:
        return _find_full(params, y0, o)
    raise ValueError("initial state must have 3 or 6 components")


def _find_reduced(params, y0, o):
    p = np.array([params.W, params.delta])
    sys_ = backends.SYS_REDUCED
    y = _settled_start(sys_, p, y0, o)
    if y is None:
        return None
    pts = _crossings(sys_, p, y, o, o.max_crossings)
    if len(pts) < 3:
        return None
    m, dists = _recurrence(pts, o.match_tol)
    if m is None:
        if dists[-1] < 0.3 * dists[0]:
            raise TransientNotSettled(
                f"section states still contracting after {o.horizon} time units")
        return None
    t0, x0 = pts[0]
    T0 = pts[m][0] - t0
    ref = _newton_shoot(sys_, p, x0, T0, o)
    if ref is None:
        return None
    x, T, _, closure = ref
    ts, ys, _, _ = backends.integrate_sampled(sys_, p, x, 0.0, T, T / o.samples,
                                              o.rtol, o.atol)
    full = np.apply_along_axis(reduced_to_full, 1, ys)
    return LimitCycle(period=T, t=ts, y=full, params=params,
                      z2_symmetric=True, omega_q=0.0, closure=closure,
                      reduced=ys, meta={"representation": "reduced",
                                        "crossings_per_period": m})


def _find_full(params, y0, o):
    p = params.packed()
    sys_ = backends.SYS_FULL
    y = _settled_start(sys_, p, y0, o)
    if y is None:
        return None
    pts = _crossings(sys_, p, y, o, o.max_crossings)
    if len(pts) < 3:
        return None
    t0, x0 = pts[0]
    v0 = _invariants(x0)
    dists, dfull = [], []
    for tm, xm in pts[1:]:
        dists.append(np.max(np.abs(_invariants(xm) - v0)))
        dfull.append(np.max(np.abs(xm - x0)))
    m = next((i + 1 for i, d in enumerate(dists) if d < o.match_tol), None)
    if m is None:
        if dists and dists[-1] < 0.3 * dists[0]:
            raise TransientNotSettled(
                f"section states still contracting after {o.horizon} time units")
        return None
    T0 = pts[m][0] - t0

    ref = None
    if dfull[m - 1] < 10 * o.match_tol:
        ref = _newton_shoot(sys_, p, x0, T0, o)
    if ref is None:
        # closes only modulo a rotation: solve for the precession angle too
        xT = pts[m][1]
        th0 = np.angle((xT[0] + xT[3]) + 1j * (xT[1] + xT[4])) \
            - np.angle((x0[0] + x0[3]) + 1j * (x0[1] + x0[4]))
        ref = _newton_shoot(sys_, p, x0, T0, o, theta=th0)
    if ref is None:
        return None
    x, T, theta, closure = ref
    ts, ys, _, _ = backends.integrate_sampled(sys_, p, x, 0.0, T, T / o.samples,
                                              o.rtol, o.atol)
    spA = np.hypot(ys[:, 0], ys[:, 1])
    spB = np.hypot(ys[:, 3], ys[:, 4])
    asym = max(np.max(np.abs(spA - spB)), np.max(np.abs(ys[:, 2] - ys[:, 5])))
    symmetric = asym < o.z2_tol
    cycle = LimitCycle(period=T, t=ts, y=ys, params=params,
                       z2_symmetric=symmetric, omega_q=0.0, closure=closure,
                       theta=theta,
                       meta={"representation": "full", "asymmetry": asym,
                             "crossings_per_period": m})
    cycle.omega_q = omega_q(cycle, params)
    return cycle


def omega_q(cycle, params):
    """Offset (precession) frequency: the period mean of the state-dependent
    part of the global-phase rate.  Vanishes for Z2-symmetric cycles and for
    the half-period-swap symmetry class."""
    y = cycle.y[:-1]
    spA = np.hypot(y[:, 0], y[:, 1])
    spB = np.hypot(y[:, 3], y[:, 4])
    z = (y[:, 0] + 1j * y[:, 1]) * (y[:, 3] - 1j * y[:, 4])
    s2phi = z.imag / (spA * spB)
    G = 0.25 * s2phi * (y[:, 5] * spA / spB - y[:, 2] * spB / spA)
    return float(np.mean(G))


def harmonic_validity(params):
    """Small parameters of the near-circular cycle approximation.

    Both ratios must be small: W(1-W)/delta and the frequency correction
    2 W^2 (1-W) / (delta (delta^2 - W^2))."""
    delta, W = abs(params.delta), params.W
    r1 = W * (1.0 - W) / delta
    r2 = 2.0 * W ** 2 * (1.0 - W) / (delta * max(delta ** 2 - W ** 2, 1e-300))
    return max(r1, abs(r2))


def harmonic_solution(params, t):
    """Near-circular analytic cycle for W(1-W) << delta (rotated frame).

    Returns samples of the representative spin; shape (len(t), 3).
    """
    delta, W = params.delta, params.W
    if delta ** 2 <= W ** 2:
        raise ValueError("harmonic cycle needs delta > W")
    t = np.atleast_1d(np.asarray(t, dtype=float))
    omega = 0.5 * np.sqrt(delta ** 2 - W ** 2)
    alpha = np.arctan2(W, 2.0 * omega)
    amp = np.sqrt(2.0 * W * (1.0 - W))
    sx = amp * np.cos(omega * t - alpha)
    sy = amp * np.sin(omega * t)
    sz = W - (W / delta) * (1.0 - W) * np.sin(2.0 * omega * t - alpha)
    return np.column_stack([sx, sy, sz])


@dataclass(frozen=True)
class EllipticParams:
    """Constants of the cn-type cycle near the tricritical point."""

    a: float
    b: float
    k: float
    epsilon: float
    r: float

    @property
    def period(self):
        return 4.0 * complete_K(self.k) / self.b


def elliptic_k(epsilon, r):
    """Modulus of the cn solution from the ratio epsilon/r, or None.

    For r < 0 the admissible branch is 1/sqrt(2) < k < 1 and no solution
    exists once epsilon <= 1.5045 |r| (the wedge closes); with two roots the
    smaller is selected, matching the branch the dynamics follow.
    """
    from scipy.optimize import brentq
    if epsilon <= 0:
        raise ValueError("epsilon = 1 - W must be positive")
    if r == 0:
        raise ValueError("r = delta - 1 must be nonzero")
    target = epsilon / r
    if r > 0:
        lo, hi = 1e-8, 1.0 / np.sqrt(2.0) - 1e-10
        return brentq(lambda k: _z_ratio(k) - target, lo, hi, xtol=1e-14)
    if target >= _ZMAX:
        return None
    lo, hi = 1.0 / np.sqrt(2.0) + 1e-10, _KMAX
    return brentq(lambda k: _z_ratio(k) - target, lo, hi, xtol=1e-14)


def elliptic_params(params):
    """Elliptic-cycle constants at the given point, or None past the wedge."""
    epsilon = 1.0 - params.W
    r = params.delta - 1.0
    k = elliptic_k(epsilon, r)
    if k is None:
        return None
    b = np.sqrt(r / (2.0 * (1.0 - 2.0 * k * k)))
    a = 2.0 * k * b      # a^2 = 2 k^2 r / (1 - 2 k^2) = (2kb)^2
    return EllipticParams(a=a, b=b, k=k, epsilon=epsilon, r=r)


def elliptic_solution(params, t):
    """Anharmonic cn-type cycle near delta = W = 1, or None past the wedge."""
    ep = elliptic_params(params)
    if ep is None:
        return None
    t = np.atleast_1d(np.asarray(t, dtype=float))
    sy = ep.a * cn(ep.b * t, ep.k)
    sx = (params.W / params.delta) * sy
    sz = 1.0 - sx ** 2 / params.W
    return np.column_stack([sx, sy, sz])


def _reduced_rep(cycle, params, o):
    """Submanifold representative of a Z2-symmetric cycle, re-converged."""
    if cycle.reduced is not None:
        return cycle.reduced[0], cycle.period
    y = cycle.y[0]
    g, _ = group_from_full(y)
    spA, _, szA, _, varphi = g
    x = np.array([spA * np.cos(varphi), spA * np.sin(varphi), szA])
    ref = _newton_shoot(backends.SYS_REDUCED,
                        np.array([params.W, params.delta]),
                        x, cycle.period, o)
    if ref is None:
        raise RuntimeError("failed to re-converge the cycle on the submanifold")
    return ref[0], ref[1]


def floquet_multipliers(cycle, params, options=CycleOptions()):
    """Characteristic multipliers of the transverse (symmetry-breaking)
    linearization about a Z2-symmetric cycle.

    Returns (rho_1, rho_2, rho_3): rho_1 is the rotational unit multiplier,
    identified by its eigenvector; the rest are sorted by magnitude.
    """
    if not cycle.z2_symmetric:
        raise ValueError("transverse Floquet problem needs a Z2-symmetric cycle")
    o = options
    x0, T = _reduced_rep(cycle, params, o)
    p = np.array([params.W, params.delta])
    y0 = np.concatenate([x0, np.eye(3).ravel()])
    yT, _, _ = backends.integrate_final(backends.SYS_FLOQUET, p, y0, 0.0, T,
                                        min(o.rtol, 1e-11), min(o.atol, 1e-13))
    M = yT[3:].reshape(3, 3).T   # columns evolve the unit vectors
    cond = np.linalg.cond(M)
    if cond > 1e12:
        raise RuntimeError(f"monodromy matrix ill-conditioned (cond={cond:.2e})")
    vals, vecs = np.linalg.eig(M)
    # the rotation mode (s_y, -s_x, 0) carries multiplier exactly one
    p1 = np.array([x0[1], -x0[0], 0.0])
    p1 /= np.linalg.norm(p1)
    overlaps = [abs(np.vdot(p1, vecs[:, i] / np.linalg.norm(vecs[:, i])))
                for i in range(3)]
    i1 = int(np.argmax(overlaps))
    rest = sorted((abs(vals[i]) for i in range(3) if i != i1), reverse=True)
    return float(abs(vals[i1])), float(rest[0]), float(rest[1])


def detect_symmetry_breaking(params, threshold=0.01, t_min=2e4, window=2e3,
                             seed=0, rtol=1e-9, atol=1e-11, initial=None):
    """Threshold criterion for loss of ensemble-interchange symmetry.

    True when max |s_z^A - s_z^B| over t in (t_min, t_min + window] exceeds
    the threshold, starting from generic initial data.
    """
    if initial is None:
        initial = random_state(2, np.random.default_rng(seed))
    p = params.packed()
    y, _, _ = backends.integrate_final(backends.SYS_FULL, p,
                                       np.asarray(initial, dtype=float),
                                       0.0, t_min, rtol, atol)
    _, ys, _, _ = backends.integrate_sampled(backends.SYS_FULL, p, y, 0.0,
                                             window, 0.5, rtol, atol)
    return bool(np.max(np.abs(ys[:, 2] - ys[:, 5])) > threshold)


def check_weak_z2(cycle, tol=1e-4):
    """Half-period swap symmetry: s_perp and s_z of the two ensembles trade
    places after T/2.  Holds for every Z2-symmetric cycle and for the
    symmetry-broken pair born at the pitchfork, but not for precessing
    cycles."""
    m = len(cycle.t) - 1
    if m % 2:
        raise ValueError("cycle must be sampled an even number of times")
    half = m // 2
    y = cycle.y[:-1]
    spA = np.hypot(y[:, 0], y[:, 1])
    spB = np.hypot(y[:, 3], y[:, 4])
    szA, szB = y[:, 2], y[:, 5]
    dev = max(np.max(np.abs(spA - np.roll(spB, -half))),
              np.max(np.abs(szA - np.roll(szB, -half))))
    return bool(dev < tol)


def time_translation_deviation(cycle):
    """Max deviation from s_xy(t + T/2) = -s_xy(t), s_z(t + T/2) = s_z(t)
    on the submanifold representative."""
    if cycle.reduced is None:
        raise ValueError("needs a cycle found on the Z2 submanifold")
    m = len(cycle.t) - 1
    half = m // 2
    s = cycle.reduced[:-1]
    return float(max(np.max(np.abs(s[:, :2] + np.roll(s[:, :2], -half, axis=0))),
                     np.max(np.abs(s[:, 2] - np.roll(s[:, 2], -half)))))
