"""Closed-form fixed points: the trivial and nontrivial steady states, the
pump-free attractors, and the single-ensemble special case."""

from dataclasses import dataclass, field

import numpy as np

from .params import ModelParams, tss_state, total_spin, spin_lengths


@dataclass(frozen=True)
class FixedPoint:
    kind: str                 # "TSS" | "NTSS" | "NoPump" | "Origin"
    state: np.ndarray
    Phi: float = 0.0
    info: dict = field(default_factory=dict)


def tss(params):
    """Trivial steady state: all atoms maximally pumped, no radiation."""
    return FixedPoint(kind="TSS", state=tss_state(params.n_ensembles))


def ntss_exists(params):
    """The synchronized steady state exists strictly inside the semicircle
    delta^2 + (W-1)^2 = 1."""
    return params.delta ** 2 + (params.W - 1.0) ** 2 < 1.0


def ntss(params, Phi=0.0):
    """Nontrivial steady state (monochromatic superradiance) or None.

    A circle of fixed points parameterized by the global phase Phi.  Raises
    for W = 0 where the closed form s_z = (delta^2 + W^2) / (2W) is singular;
    the pump-free attractors are handled by :func:`no_pump_classify`.
    """
    delta, W = params.delta, params.W
    if W == 0:
        raise ValueError("NTSS is singular at W=0; see no_pump_classify")
    if not ntss_exists(params):
        return None
    lperp = np.sqrt(2.0 * (1.0 - (W - 1.0) ** 2 - delta ** 2))
    sperp = 0.5 * lperp * np.sqrt(1.0 + (delta / W) ** 2)
    sz = (delta ** 2 + W ** 2) / (2.0 * W)
    varphi = np.arctan2(delta, W)
    phiA = Phi + varphi
    phiB = Phi - varphi
    state = np.array([sperp * np.cos(phiA), sperp * np.sin(phiA), sz,
                      sperp * np.cos(phiB), sperp * np.sin(phiB), sz])
    return FixedPoint(kind="NTSS", state=state, Phi=Phi,
                      info={"l_perp": lperp, "varphi": varphi, "s_perp": sperp})


def ntss_reduced(params):
    """The two NTSS representatives of the reduced equations (Phi = 0, pi).

    Returns a pair of (sx, sy, sz) arrays, or None outside the semicircle.
    """
    delta, W = params.delta, params.W
    if W <= 0:
        raise ValueError("NTSS is singular at W=0; see no_pump_classify")
    if not ntss_exists(params):
        return None
    lperp = np.sqrt(2.0 * (1.0 - (W - 1.0) ** 2 - delta ** 2))
    sx = 0.5 * lperp
    sz = (delta ** 2 + W ** 2) / (2.0 * W)
    plus = np.array([sx, (delta / W) * sx, sz])
    minus = np.array([-sx, -(delta / W) * sx, sz])
    return plus, minus


def single_clock_attractor(W):
    """Asymptotic state of one ensemble: TSS for W >= 1, synchronized below.

    The single-ensemble problem maps onto the delta = 0 axis of the
    two-ensemble phase diagram.
    """
    if W < 0:
        raise ValueError("W must be >= 0")
    if W >= 1.0:
        return FixedPoint(kind="TSS", state=np.array([0.0, 0.0, 1.0]))
    sperp = np.sqrt(2.0 * W * (1.0 - W))
    return FixedPoint(kind="NTSS", state=np.array([sperp, 0.0, W]),
                      info={"s_perp": sperp})


def toda_lperp(t, C1, C2):
    """Transverse total-spin magnitude at delta = W = 0.

    The pump-free dynamics of the total spin reduce to an integrable Toda
    oscillator; l_perp^2(t) = 2 C1^2 / (1 + cosh(C1 t + C2)) -> 0 as t -> inf.
    """
    half = 0.5 * np.abs(C1 * np.asarray(t, dtype=float) + C2)
    # |C1| sech(u/2), written to avoid cosh overflow at large |u|
    return np.abs(C1) * 2.0 * np.exp(-half) / (1.0 + np.exp(-2.0 * half))


def toda_fit_constants(state):
    """(C1, C2) of the Toda solution matching a state at t = 0.

    C1 is the conserved total-spin magnitude; C2 follows from l_perp(0) and
    the sign of l_z(0) (d log l_perp^2 / dt = l_z at delta = W = 0).
    """
    l = total_spin(state)
    C1 = np.linalg.norm(l)
    lperp2 = l[0] ** 2 + l[1] ** 2
    if lperp2 <= 0:
        raise ValueError("transverse total spin vanishes; C2 undefined")
    coshC2 = 2.0 * C1 ** 2 / lperp2 - 1.0
    C2 = np.arccosh(max(coshC2, 1.0))
    if l[2] > 0:
        C2 = -C2
    return C1, C2


def no_pump_classify(final_state, params, transverse_tol=1e-6):
    """Stability verdict for a pump-free (W = 0) asymptotic state.

    For delta != 0 the stable family has both spins on the negative z-axis;
    on the delta = 0 axis any configuration with vanishing transverse total
    spin is a fixed point, stable iff l_z < 0.
    """
    if params.W != 0:
        raise ValueError("classification applies to W = 0 only")
    y = np.asarray(final_state, dtype=float)
    l = total_spin(y)
    if params.delta != 0:
        szs = y[2::3]
        on_axis = np.all(np.hypot(y[0::3], y[1::3]) < transverse_tol)
        return bool(on_axis and np.all(szs < 0))
    if np.hypot(l[0], l[1]) > transverse_tol:
        return False
    return bool(l[2] < 0)


def residual(fp, params):
    """Max component of the equations of motion at a fixed point."""
    from .dynamics import eom_full
    state = fp.state if isinstance(fp, FixedPoint) else np.asarray(fp)
    if state.shape[0] == 3 and params.n_ensembles == 1:
        p = ModelParams(omega=params.omega, W=params.W)
        return float(np.max(np.abs(eom_full(state, p))))
    return float(np.max(np.abs(eom_full(state, params))))
