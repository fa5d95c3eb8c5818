"""Center-manifold reduction and Poincare-Birkhoff normal form.

On the center manifold near a Hopf bifurcation the radial dynamics reduce to
ds/dt = gamma*s + a1*s^3 + O(s^5); the sign of a1 decides between a
supercritical (a1 < 0) and subcritical (a1 > 0) bifurcation.  The reduction
runs on the three-component submanifold equations, whose spectrum carries
the full stability content of both fixed points.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .params import ModelParams, random_state
from .fixedpoints import ntss_exists, ntss_reduced
from .stability import jacobian_reduced, delta_minus
from .dynamics import IntegrateOptions, integrate
from .elliptic import complete_K, complete_E
from ._parallel import parallel_map

_RES_TOL = 1e-10


class NearResonanceError(ArithmeticError):
    """A denominator of the reduction chain vanished (resonant spectrum)."""


@dataclass
class HopfData:
    """Everything produced by the reduction at one parameter point."""

    which: str
    lambda_r: float
    gamma: float
    omega: float
    v1: np.ndarray
    vr: np.ndarray
    vi: np.ndarray
    R: np.ndarray                # quadratic coefficients, rows R_1..R_3
    h: tuple                     # center-manifold coefficients (h1, h2, h3)
    alpha1: complex
    params: ModelParams = None

    @property
    def a1(self):
        return self.alpha1.real

    def to_dict(self):
        return {"which": self.which, "gamma": self.gamma, "omega": self.omega,
                "lambda_r": self.lambda_r, "a1": self.a1,
                "alpha1": [self.alpha1.real, self.alpha1.imag]}


def _tss_eigensystem(params):
    delta, W = params.delta, params.W
    if delta <= 1.0:
        raise NearResonanceError(
            "TSS characteristic pair is real for delta <= 1; no Hopf frame")
    gamma = 0.5 * (1.0 - W)
    omega = 0.5 * np.sqrt(delta ** 2 - 1.0)
    lam_r = -W
    v1 = np.array([0.0, 0.0, 1.0])
    vr = np.array([1.0, delta, 0.0])
    vi = np.array([np.sqrt(delta ** 2 - 1.0), 0.0, 0.0])
    return (0.0, 0.0, 1.0), lam_r, gamma, omega, v1, vr, vi


def _ntss_eigensystem(params):
    delta, W = params.delta, params.W
    if not ntss_exists(params):
        raise ValueError("NTSS does not exist at these parameters")
    sx0, sy0, sz0 = ntss_reduced(params)[0]
    # roots of the cubic factor of the characteristic equation
    from .stability import ntss_poly_coeffs
    c0, c1, c2 = ntss_poly_coeffs(params)
    roots = np.roots([1.0, c2, c1, c0])
    imag = np.abs(roots.imag)
    if np.max(imag) < 1e-12:
        raise NearResonanceError("NTSS spectrum is entirely real here; no Hopf frame")
    i_real = int(np.argmin(imag))
    lam_r = roots[i_real].real
    pair = np.delete(roots, i_real)
    gamma = float(pair[0].real)
    omega = float(abs(pair[0].imag))
    D = (2.0 * gamma + W) ** 2 + 4.0 * omega ** 2
    v1 = np.array([lam_r + W,
                   delta * (lam_r + W) / (2.0 * lam_r + W),
                   -2.0 * sx0])
    vr = np.array([gamma + W,
                   delta * ((2.0 * gamma + W) * (gamma + W) + 2.0 * omega ** 2) / D,
                   -2.0 * sx0])
    vi = np.array([omega, -W * omega * delta / D, 0.0])
    return (sx0, sy0, sz0), lam_r, gamma, omega, v1, vr, vi


def _quadratic_coeffs(Q, Qi):
    """R_{ij} tables of the transformed quadratic nonlinearity.

    The shifted submanifold equations have quadratic part
    N(s) = (s_z s_x, 0, -s_x^2); in the eigenbasis s = Q s' each component
    R_i(s') is a quadratic form with coefficients ordered
    (x^2, y^2, xy, xz, yz, z^2).
    """
    qx = Q[0, :]
    qz = Q[2, :]
    M1 = 0.5 * (np.outer(qz, qx) + np.outer(qx, qz))
    M3 = -np.outer(qx, qx)
    R = np.empty((3, 6))
    for i in range(3):
        M = Qi[i, 0] * M1 + Qi[i, 2] * M3
        R[i] = (M[0, 0], M[1, 1], 2 * M[0, 1], 2 * M[0, 2], 2 * M[1, 2], M[2, 2])
    return R


def hopf_a1(params, which="NTSS"):
    """Poincare-Birkhoff reduction of the submanifold dynamics at a fixed point.

    Valid in a neighborhood of the bifurcation, not only at criticality.
    Raises NearResonanceError when a denominator of the chain degenerates.
    """
    which = which.upper()
    if which == "TSS":
        fp, lam_r, gamma, omega, v1, vr, vi = _tss_eigensystem(params)
    elif which == "NTSS":
        fp, lam_r, gamma, omega, v1, vr, vi = _ntss_eigensystem(params)
    else:
        raise ValueError(f"which must be TSS or NTSS, got {which!r}")

    J = jacobian_reduced(fp, params)
    for v, lam in ((v1, lam_r), (vr + 1j * vi, gamma + 1j * omega)):
        if np.max(np.abs(J @ v - lam * v)) > 1e-8 * max(1.0, np.max(np.abs(v))):
            raise ArithmeticError("closed-form eigenvectors failed residual check")

    Q = np.column_stack([vr, vi, v1])
    Qi = np.linalg.inv(Q)
    R = _quadratic_coeffs(Q, Qi)
    (R11, R12, R13, R14, R15, _), (R21, R22, R23, R24, R25, _), \
        (R31, R32, R33, _, _, _) = R

    den_h = 2.0 * gamma - lam_r
    den_h2 = den_h ** 2 + 4.0 * omega ** 2
    if abs(den_h) < _RES_TOL or den_h2 < _RES_TOL:
        raise NearResonanceError(
            f"center-manifold denominator 2*gamma - lambda_r = {den_h:.3e}")
    h3 = (2.0 * omega * (R32 - R31) + den_h * R33) / den_h2
    h1 = (h3 * omega + R31) / den_h
    h2 = (-h3 * omega + R32) / den_h

    Rp20 = 0.25 * (R11 - R12 - R23) + 0.25j * (R13 + R21 - R22)
    Rp21 = 0.50 * (R11 + R12) + 0.50j * (R21 + R22)
    Rp22 = 0.25 * (R11 - R12 + R23) + 0.25j * (R21 - R13 - R22)
    Rm22, Rm21, Rm20 = np.conj(Rp20), np.conj(Rp21), np.conj(Rp22)
    Rp32 = (0.125 * (3.0 * (h1 * R14 + h2 * R25) + h2 * R14 + h3 * R15
                     + h3 * R24 + h1 * R25)
            + 0.125j * (3.0 * (h1 * R24 - h2 * R15) + h2 * R24 + h3 * R25
                        - h3 * R14 + h1 * R15))

    def lam_plus(l):
        return -gamma - 1j * omega * (3 - 2 * l)

    def lam_minus(l):
        return -gamma - 1j * omega * (1 - 2 * l)

    lams = [lam_plus(0), lam_plus(1), lam_plus(2),
            lam_minus(0), lam_minus(1), lam_minus(2)]
    if min(abs(z) for z in lams) < _RES_TOL:
        raise NearResonanceError("second-order near-identity transform is resonant")
    php20, php21, php22 = Rp20 / lam_plus(0), Rp21 / lam_plus(1), Rp22 / lam_plus(2)
    phm20, phm21, phm22 = Rm20 / lam_minus(0), Rm21 / lam_minus(1), Rm22 / lam_minus(2)

    alpha1 = (Rp32
              + Rp21 * (php22 - phm21)
              + php21 * (Rm21 - Rp22)
              + 2.0 * (Rm22 * php20 - Rp20 * phm22)
              + gamma * (2.0 * phm22 * php20 + php21 * (phm21 + 3.0 * php22))
              + 1j * omega * (php21 * (php22 - phm21) - 6.0 * phm22 * php20))

    return HopfData(which=which, lambda_r=lam_r, gamma=gamma, omega=omega,
                    v1=v1, vr=vr, vi=vi, R=R, h=(h1, h2, h3), alpha1=alpha1,
                    params=params)


def classify_hopf(params, which="NTSS", atol=1e-8):
    """'supercritical' (a1 < 0), 'subcritical' (a1 > 0) or 'indeterminate'."""
    a1 = hopf_a1(params, which).a1
    if abs(a1) < atol:
        return "indeterminate"
    return "supercritical" if a1 < 0 else "subcritical"


def delta_a1_zero(W, bracket=None):
    """Detuning where the NTSS normal-form coefficient crosses zero.

    a1 is positive at the Hopf line (the bifurcation is subcritical) and
    decreases moving into the synchronized phase; the crossing nearest the
    line is returned.
    """

    def f(d):
        return hopf_a1(ModelParams.two_ensemble(d, W), "NTSS").a1

    if bracket is not None:
        return brentq(f, *bracket, xtol=1e-10)
    dH = float(delta_minus(W))
    hi = 0.999 * dH
    fhi = f(hi)
    step = dH / 50.0
    lo = hi - step
    while lo > 0.1 * dH:
        flo = f(lo)
        if flo == 0.0:
            return lo
        if np.sign(flo) != np.sign(fhi):
            return brentq(f, lo, hi, xtol=1e-10)
        hi, fhi = lo, flo
        lo -= step
    raise ValueError(f"no sign change of a1 found below delta_H({W})")


def pitchfork_coeff(delta):
    """Cubic coefficient of the 1D normal form on the upper fixed-point arc.

    Equals -(1 + sqrt(1-delta^2))^2 / (2 delta^2 sqrt(1-delta^2)), negative
    throughout 0 < delta < 1: the transition is a supercritical pitchfork in
    the submanifold picture.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError(f"pitchfork coefficient needs 0 < delta < 1, got {delta}")
    root = np.sqrt(1.0 - delta ** 2)
    return -(1.0 + root) ** 2 / (2.0 * delta ** 2 * root)


def _z_ratio(k):
    K, E = complete_K(k), complete_E(k)
    k2 = k * k
    Y = (5.0 * k2 * ((2.0 * k2 - 1.0) * E + (1.0 - k2) * K)
         / (2.0 * (k2 * k2 - k2 + 1.0) * E - (2.0 - k2) * (1.0 - k2) * K))
    return 4.0 * k2 / ((1.0 - 2.0 * k2) * Y)


def taper_slopes():
    """Tangent slopes (right, left) of the coexistence wedge at its tip.

    The right boundary linearizes to slope exactly 2; the left boundary is
    where the cn-type cycle solution ceases to exist, at minus the maximum of
    the modulus equation over 1/sqrt(2) < k < 1 (about 1.50).
    """
    res = minimize_scalar(lambda k: -_z_ratio(k),
                          bounds=(1.0 / np.sqrt(2.0) + 1e-9, 1.0 - 1e-9),
                          method="bounded", options={"xatol": 1e-12})
    return 2.0, -(-res.fun)


def taper_angle_deg():
    """Opening angle of the coexistence wedge in degrees (about 7)."""
    tr, tl = taper_slopes()
    return np.degrees(np.arctan(tr) - np.arctan(tl))


@dataclass(frozen=True)
class CoexistOptions:
    step: float = 1e-3           # detuning decrement
    horizon: float = 2e4         # convergence test horizon per probe
    ntss_tol: float = 1e-4       # proximity threshold in group-variable norm
    n_probes: int = 10
    transient: float = 5e3
    harvest_window: float = 500.0
    seed: int = 0
    start_offset: float = 1e-3   # extra grid steps above the Hopf line
    workers: int = 0             # 0 = SPINCOMB_WORKERS or cpu count
    rtol: float = 1e-9
    atol: float = 1e-11


@dataclass
class CoexistResult:
    W: float
    delta_H: float
    delta_end: float
    deltas_tested: list = field(default_factory=list)
    survivors: list = field(default_factory=list)

    def to_dict(self):
        return {"W": self.W, "delta_H": self.delta_H, "delta_end": self.delta_end}


def _ntss_signature(params):
    from .fixedpoints import ntss
    fp = ntss(params)
    if fp is None:
        return None
    return np.array([fp.info["s_perp"], fp.info["s_perp"],
                     fp.state[2], fp.state[2], fp.info["varphi"]])


def ntss_distance(state, params, signature=None):
    """Euclidean distance of a state to the NTSS circle in group variables."""
    from .params import group_from_full
    sig = signature if signature is not None else _ntss_signature(params)
    if sig is None:
        return np.inf
    g, _ = group_from_full(state)
    d = g - sig
    d[4] = (d[4] + np.pi / 2.0) % np.pi - np.pi / 2.0   # varphi mod pi
    return float(np.linalg.norm(d))


def _probe_converges(args):
    """True if one initial condition relaxes onto the NTSS within the horizon."""
    y, delta, W, horizon, tol, rtol, atol = args
    from . import backends
    params = ModelParams.two_ensemble(delta, W)
    sig = _ntss_signature(params)
    if sig is None:
        return False
    p = params.packed()
    t, chunk = 0.0, 1000.0
    y = np.asarray(y, dtype=float)
    while t < horizon:
        y, _, _ = backends.integrate_final(backends.SYS_FULL, p, y, 0.0,
                                           chunk, rtol, atol)
        t += chunk
        if ntss_distance(y, params, sig) < tol:
            return True
    return False


def _harvest(y, params, opts, rng):
    """Random on-attractor states sampled from a settled trajectory window."""
    traj = integrate(y, params, opts.harvest_window,
                     IntegrateOptions(rtol=opts.rtol, atol=opts.atol,
                                      dt_sample=0.5))
    idx = rng.integers(0, len(traj.t), size=opts.n_probes)
    return [traj.y[i].copy() for i in idx], traj


def coexistence_left_boundary(W, options=CoexistOptions()):
    """Locate where monochromatic superradiance stops coexisting with the
    time-dependent attractor, scanning the detuning downward from the
    subcritical Hopf line.

    Follows the hysteresis protocol: settle on the attractor just right of
    the bifurcation, harvest random on-attractor states, decrease the
    detuning stepwise, and record the first value where every probe relaxes
    onto the NTSS.
    """
    opts = options
    rng = np.random.default_rng(opts.seed)
    dH = float(delta_minus(W))
    ndig = max(0, int(round(-np.log10(opts.step))))
    delta = round(np.ceil(dH / opts.step) * opts.step + opts.start_offset, ndig)

    params = ModelParams.two_ensemble(delta, W)
    y = random_state(2, rng)
    from .dynamics import advance
    y = advance(y, params, opts.transient, rtol=opts.rtol, atol=opts.atol)
    states, traj = _harvest(y, params, opts, rng)
    if np.ptp(traj.y[:, 2]) < 100 * opts.ntss_tol:
        raise RuntimeError(
            f"no time-dependent attractor found right of delta_H({W}) = {dH:.4f}")

    result = CoexistResult(W=W, delta_H=dH, delta_end=np.nan)
    while True:
        delta = round(delta - opts.step, ndig)
        if delta <= 0:
            raise RuntimeError("walked past delta = 0 without losing the attractor")
        jobs = [(s, delta, W, opts.horizon, opts.ntss_tol, opts.rtol, opts.atol)
                for s in states]
        converged = parallel_map(_probe_converges, jobs, workers=opts.workers)
        survivors = [i for i, c in enumerate(converged) if not c]
        result.deltas_tested.append(delta)
        result.survivors.append(len(survivors))
        if not survivors:
            result.delta_end = delta
            return result
        # re-harvest from the surviving attractor at the current detuning
        params = ModelParams.two_ensemble(delta, W)
        y = advance(states[survivors[0]], params, opts.transient,
                    rtol=opts.rtol, atol=opts.atol)
        states, _ = _harvest(y, params, opts, rng)
