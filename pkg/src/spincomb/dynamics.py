"""Mean-field equations of motion, symmetry transforms and time integration.

Three equivalent formulations are provided:

* the full equations for n ensembles in Cartesian spin components,
* the five group variables (s_perp_A, s_perp_B, s_z_A, s_z_B, varphi) plus
  the decoupled global phase Phi, valid for two ensembles,
* the closed three-component equations on the Z2-symmetric submanifold.

Integration uses an adaptive embedded Runge-Kutta pair (Dormand-Prince 5(4))
with cubic-Hermite dense output; the hot loop lives in the compiled backend.
"""

from dataclasses import dataclass, field

import numpy as np

from . import backends
from .params import ModelParams, group_from_full

EPS_DEGENERATE = 1e-12

DEFAULT_RTOL = 1e-9
DEFAULT_ATOL = 1e-11


class DegenerateGroupStateError(ValueError):
    """Group variables are singular when a transverse magnitude vanishes."""


@dataclass(frozen=True)
class IntegrateOptions:
    rtol: float = DEFAULT_RTOL
    atol: float = DEFAULT_ATOL
    max_step: float = 0.0        # 0 = unlimited
    dt_sample: float = 0.5       # output stride

    def replace(self, **kw):
        d = self.__dict__ | kw
        return IntegrateOptions(**d)


@dataclass
class Trajectory:
    """Time-sampled solution with integrator metadata."""

    t: np.ndarray
    y: np.ndarray
    params: ModelParams
    kind: str                    # "full" | "reduced" | "group"
    rtol: float
    atol: float
    naccepted: int = 0
    nrejected: int = 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.t) < 2:
            raise ValueError("a trajectory needs at least two samples")
        if np.any(np.diff(self.t) <= 0):
            raise ValueError("sample times must be strictly increasing")

    @property
    def final(self):
        return self.y[-1]

    def l_minus(self):
        """Complex radiated amplitude l_-(t) = sum_tau (s_x - i s_y)."""
        if self.kind == "reduced":
            return 2.0 * (self.y[:, 0] - 1j * self.y[:, 1])
        sx = self.y[:, 0::3].sum(axis=1)
        sy = self.y[:, 1::3].sum(axis=1)
        return sx - 1j * sy

    def to_csv(self, path):
        """Write `t,sxA,syA,szA,sxB,syB,szB` rows at 17 significant digits."""
        if self.kind == "full" and self.y.shape[1] == 6:
            header = "t,sxA,syA,szA,sxB,syB,szB"
        elif self.kind == "reduced":
            header = "t,sx,sy,sz"
        else:
            header = "t," + ",".join(f"y{i}" for i in range(self.y.shape[1]))
        data = np.column_stack([self.t, self.y])
        np.savetxt(path, data, delimiter=",", header=header, comments="",
                   fmt="%.17g")


def eom_full(state, params):
    """Time derivative of every spin component for n ensembles."""
    y = np.asarray(state, dtype=float)
    if y.shape[0] != 3 * params.n_ensembles:
        raise ValueError(
            f"state has {y.shape[0]} components, expected {3 * params.n_ensembles}")
    return backends.rhs(backends.SYS_FULL, params.packed(), y)


def eom_reduced(state, params):
    """Time derivative of the representative spin on the Z2 submanifold."""
    y = np.asarray(state, dtype=float)
    p = np.array([params.W, params.delta])
    return backends.rhs(backends.SYS_REDUCED, p, y)


def eom_group(gstate, params):
    """Derivative of the five group variables plus the global phase rate.

    Returns (dg/dt, dPhi/dt); the group derivatives do not depend on Phi.
    """
    g = np.asarray(gstate, dtype=float)
    if g.shape[0] != 5:
        raise ValueError("group state has five components (Phi is separate)")
    if min(g[0], g[1]) < EPS_DEGENERATE:
        raise DegenerateGroupStateError(
            f"transverse magnitude below {EPS_DEGENERATE}; varphi undefined")
    params._require_two()
    p = np.array([params.W, params.omega[0], params.omega[1]])
    f = backends.rhs(backends.SYS_GROUP, p, np.append(g, 0.0))
    return f[:5], f[5]


def rotate_z(state, phi):
    """Rotate all transverse spin components by phi about the z-axis."""
    y = np.asarray(state, dtype=float).copy()
    c, s = np.cos(phi), np.sin(phi)
    x = y[0::3].copy()
    yy = y[1::3].copy()
    y[0::3] = c * x - s * yy
    y[1::3] = c * yy + s * x
    return y


def z2_transform(state, phi0=0.0):
    """Interchange the two ensembles (with y-reflection) after a z-rotation.

    Applies Sigma . R(phi0); the equations of motion for two ensembles are
    equivariant under this map for any phi0.
    """
    y = np.asarray(state, dtype=float)
    if y.shape[0] != 6:
        raise ValueError("the ensemble-interchange symmetry needs exactly 2 ensembles")
    r = rotate_z(y, phi0)
    return np.array([r[3], -r[4], r[5], r[0], -r[1], r[2]])


def z2_matrix(phi0=0.0):
    """6x6 matrix of the interchange map composed with R(phi0)."""
    m = np.zeros((6, 6))
    for i, j, v in [(0, 3, 1), (1, 4, -1), (2, 5, 1),
                    (3, 0, 1), (4, 1, -1), (5, 2, 1)]:
        m[i, j] = v
    c, s = np.cos(phi0), np.sin(phi0)
    r = np.eye(6)
    for k in (0, 3):
        r[k, k] = c
        r[k, k + 1] = -s
        r[k + 1, k] = s
        r[k + 1, k + 1] = c
    return m @ r


def _run(system, packed, y0, t_end, options, t0=0.0, kind="full", params=None):
    ts, ys, na, nr = backends.integrate_sampled(
        system, packed, np.asarray(y0, dtype=float), t0, t_end,
        options.dt_sample, options.rtol, options.atol, options.max_step)
    return Trajectory(t=ts, y=ys, params=params, kind=kind,
                      rtol=options.rtol, atol=options.atol,
                      naccepted=na, nrejected=nr)


def integrate(initial, params, t_end, options=IntegrateOptions()):
    """Integrate the full equations from `initial` up to t_end.

    Deterministic for identical inputs and options.  Raises RuntimeError with
    the failure time on step-size underflow.
    """
    if t_end <= 0:
        raise ValueError("t_end must be positive")
    y0 = np.asarray(initial, dtype=float)
    if y0.shape[0] != 3 * params.n_ensembles:
        raise ValueError(
            f"state has {y0.shape[0]} components, expected {3 * params.n_ensembles}")
    return _run(backends.SYS_FULL, params.packed(), y0, t_end, options,
                kind="full", params=params)


def integrate_reduced(initial, params, t_end, options=IntegrateOptions()):
    """Integrate the reduced Z2-submanifold equations."""
    if t_end <= 0:
        raise ValueError("t_end must be positive")
    p = np.array([params.W, params.delta])
    return _run(backends.SYS_REDUCED, p, initial, t_end, options,
                kind="reduced", params=params)


def integrate_group(initial, params, t_end, Phi0=0.0,
                    options=IntegrateOptions()):
    """Integrate the five group variables together with the global phase.

    `initial` holds the five group variables; the trajectory carries six
    columns with Phi last.
    """
    if t_end <= 0:
        raise ValueError("t_end must be positive")
    g = np.asarray(initial, dtype=float)
    if min(g[0], g[1]) < EPS_DEGENERATE:
        raise DegenerateGroupStateError(
            f"transverse magnitude below {EPS_DEGENERATE}")
    p = np.array([params.W, params.omega[0], params.omega[1]])
    return _run(backends.SYS_GROUP, p, np.append(g, Phi0), t_end, options,
                kind="group", params=params)


def advance(state, params, dt, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL,
            max_step=0.0, system="full"):
    """Propagate a state by dt and return only the final state."""
    if system == "full":
        sid, p = backends.SYS_FULL, params.packed()
    elif system == "reduced":
        sid, p = backends.SYS_REDUCED, np.array([params.W, params.delta])
    else:
        raise ValueError(f"unknown system {system!r}")
    y, _, _ = backends.integrate_final(sid, p, np.asarray(state, dtype=float),
                                       0.0, dt, rtol, atol, max_step)
    return y


def phi_rate_series(traj):
    """G(t): the state-dependent part of dPhi/dt along a full trajectory."""
    out = np.empty(len(traj.t))
    for i, y in enumerate(traj.y):
        g, _ = group_from_full(y)
        spA, spB, szA, szB, varphi = g
        out[i] = 0.25 * np.sin(2 * varphi) * (szB * spA / spB - szA * spB / spA)
    return out
