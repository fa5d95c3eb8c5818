"""Linear stability: Jacobians, characteristic values, Routh-Hurwitz regions
and the analytic boundaries of the fixed-point phases."""

from dataclasses import dataclass, field

import numpy as np

from .params import spins_of
from .fixedpoints import ntss_exists

EPS_MARGIN = 1e-9


@dataclass
class StabilityReport:
    eigenvalues: np.ndarray          # complex, sorted by real part (descending)
    stable: bool
    marginal: np.ndarray             # indices with |Re| < margin
    margin: float = EPS_MARGIN
    poly_coeffs: tuple = None        # (c0, c1, c2) where the closed form applies
    kind: str = ""

    def to_dict(self):
        return {
            "kind": self.kind,
            "stable": bool(self.stable),
            "eigenvalues": [{"re": float(z.real), "im": float(z.imag)}
                            for z in self.eigenvalues],
            "marginal": [int(i) for i in self.marginal],
        }


def mean_field_jacobian(state, params):
    """Jacobian of the full equations at `state`, any ensemble count."""
    y = np.asarray(state, dtype=float)
    n = params.n_ensembles
    if y.shape[0] != 3 * n:
        raise ValueError(f"state length {y.shape[0]} != 3n = {3 * n}")
    s = spins_of(y)
    lx = s[:, 0].sum()
    ly = s[:, 1].sum()
    W = params.W
    J = np.zeros((3 * n, 3 * n))
    for a in range(n):
        sx, sy, sz = s[a]
        wa = params.omega[a]
        for b in range(n):
            blk = J[3 * a:3 * a + 3, 3 * b:3 * b + 3]
            if a == b:
                blk[0, 0] = 0.5 * (sz - W)
                blk[0, 1] = -wa
                blk[0, 2] = 0.5 * lx
                blk[1, 0] = wa
                blk[1, 1] = 0.5 * (sz - W)
                blk[1, 2] = 0.5 * ly
                blk[2, 0] = -0.5 * (lx + sx)
                blk[2, 1] = -0.5 * (ly + sy)
                blk[2, 2] = -W
            else:
                blk[0, 0] = 0.5 * sz
                blk[1, 1] = 0.5 * sz
                blk[2, 0] = -0.5 * sx
                blk[2, 1] = -0.5 * sy
    return J


def jacobian_full(state, params):
    """6x6 Jacobian for two ensembles, block form [[D^A, X^A], [X^B, D^B]]."""
    params._require_two()
    return mean_field_jacobian(state, params)


def jacobian_reduced(state, params):
    """3x3 Jacobian of the Z2-submanifold equations."""
    sx, sy, sz = np.asarray(state, dtype=float)
    W, delta = params.W, params.delta
    return np.array([
        [sz - 0.5 * W, -0.5 * delta, sx],
        [0.5 * delta, -0.5 * W, 0.0],
        [-2.0 * sx, 0.0, -W],
    ])


def tss_char_values(params):
    """The six characteristic values of the maximally pumped state.

    {-W, (1-W)/2 +- sqrt(1-delta^2)/2}, each doubly degenerate; the pair is
    complex for delta > 1.
    """
    delta, W = params.delta, params.W
    root = np.sqrt(complex(1.0 - delta ** 2))
    lam = np.array([-W, 0.5 * ((1.0 - W) + root), 0.5 * ((1.0 - W) - root)],
                   dtype=complex)
    return np.repeat(lam, 2)


def ntss_poly_coeffs(params):
    """(c0, c1, c2) of the cubic factor of the NTSS characteristic equation.

    Returns None when the NTSS does not exist at these parameters.
    """
    if not ntss_exists(params):
        return None
    delta, W = params.delta, params.W
    c0 = W * (W - 0.5 * (W ** 2 + delta ** 2))
    c1 = 2.0 * W - 0.5 * (W ** 2 + 3.0 * delta ** 2)
    c2 = (3.0 * W ** 2 - delta ** 2) / (2.0 * W)
    return c0, c1, c2


def ntss_char_values(params):
    """All six characteristic values of the synchronized steady state.

    {0} from the rotational mode, the roots of the cubic factor (the
    interchange-symmetric block, same spectrum as the submanifold equations),
    and the roots of lambda^2 + c2*lambda + (W - delta^2) from the
    interchange-antisymmetric block.  Returns None outside the semicircle.
    """
    coeffs = ntss_poly_coeffs(params)
    if coeffs is None:
        return None
    c0, c1, c2 = coeffs
    delta, W = params.delta, params.W
    return np.concatenate([
        [0.0],
        np.roots([1.0, c2, W - delta ** 2]),
        np.roots([1.0, c2, c1, c0]),
    ])


def tss_stable(params):
    """All TSS characteristic values strictly negative (real parts)."""
    lam = tss_char_values(params)
    return bool(np.max(lam.real) < -EPS_MARGIN)


def ntss_stable(params):
    """Routh-Hurwitz verdict for the synchronized steady state.

    Stable iff (W-1)^2 + delta^2 < 1, W > delta/sqrt(3) and
    3 delta^4 - (6W^2 + 4W) delta^2 + W^3 (8 - W) > 0.
    """
    delta, W = abs(params.delta), params.W
    if W <= 0:
        return False
    if (W - 1.0) ** 2 + delta ** 2 >= 1.0:
        return False
    if W <= delta / np.sqrt(3.0):
        return False
    hurwitz = 3.0 * delta ** 4 - (6.0 * W ** 2 + 4.0 * W) * delta ** 2 \
        + W ** 3 * (8.0 - W)
    return bool(hurwitz > 0.0)


def delta_pm(W):
    """Both branches (delta_minus, delta_plus) of the Hopf boundary curve."""
    W = np.asarray(W, dtype=float)
    root = np.sqrt(3.0 * W ** 2 - 3.0 * W + 1.0)
    base = 2.0 * W / 3.0
    dmin2 = base * (1.5 * W + 1.0 - root)
    dplus2 = base * (1.5 * W + 1.0 + root)
    return np.sqrt(np.maximum(dmin2, 0.0)), np.sqrt(dplus2)


def delta_minus(W):
    """Lower branch delta_-(W): the Hopf line bounding monochromatic
    superradiance from below in detuning, for W < 1."""
    return delta_pm(W)[0]


def delta_plus(W):
    return delta_pm(W)[1]


def classify_fixed_point(state, params, margin=EPS_MARGIN, residual_tol=1e-8):
    """Numeric characteristic values and verdict for a candidate fixed point.

    Eigenvalues with |Re| below the margin are reported as marginal and
    excluded from the verdict; the NTSS rotational zero mode is thereby
    ignored by construction.
    """
    from .fixedpoints import residual as fp_residual
    res = fp_residual(state, params)
    if res > residual_tol:
        raise ValueError(f"not a fixed point: residual {res:.3e} > {residual_tol}")
    y = state.state if hasattr(state, "state") else np.asarray(state, dtype=float)
    lam = np.linalg.eigvals(mean_field_jacobian(y, params))
    order = np.argsort(-lam.real)
    lam = lam[order]
    marginal = np.flatnonzero(np.abs(lam.real) < margin)
    decisive = np.delete(lam.real, marginal)
    stable = bool(decisive.size and np.max(decisive) < 0.0) or decisive.size == 0
    coeffs = None
    kind = getattr(state, "kind", "")
    if kind == "NTSS":
        coeffs = ntss_poly_coeffs(params)
    return StabilityReport(eigenvalues=lam, stable=stable, marginal=marginal,
                           margin=margin, poly_coeffs=coeffs, kind=kind)
