"""System-size-expansion coefficients for quantum fluctuations.

At order N^0 the fluctuation distribution obeys a Fokker-Planck equation
whose drift is linear in the fluctuations (nu_tau, nu*_tau, mu_tau) about
the mean-field state; the drift coefficient matrix is the Jacobian of the
mean-field flow in those variables.  The diffusion matrix, assembled from
the second-derivative terms of the generator, derives from a
Glauber-Sudarshan representation and need not be positive semidefinite.
"""

from dataclasses import dataclass

import numpy as np

from .params import spins_of


@dataclass
class FluctuationCoefficients:
    """Drift and diffusion at one mean-field state.

    Ordering is per-ensemble triples: drift acts on (nu, nu*, mu) per
    ensemble (complex matrix); diffusion is the real symmetric matrix over
    (Re nu, Im nu, mu) per ensemble, defined so the second-order generator is
    sum_ij D_ij d_i d_j.
    """

    drift: np.ndarray
    diffusion: np.ndarray

    @property
    def diffusion_eigenvalues(self):
        return np.linalg.eigvalsh(self.diffusion)

    @property
    def diffusion_definite(self):
        """True when diffusion is positive semidefinite (sampleable)."""
        return bool(self.diffusion_eigenvalues.min() > -1e-12)

    def to_dict(self):
        return {
            "drift_re": self.drift.real.tolist(),
            "drift_im": self.drift.imag.tolist(),
            "diffusion": self.diffusion.tolist(),
            "diffusion_eigenvalues": self.diffusion_eigenvalues.tolist(),
        }


def _uuw(state):
    """Half-spin variables (u, u*, w) = (s_-/2, s_+/2, s_z/2) per ensemble."""
    s = spins_of(state)
    u = 0.5 * (s[:, 0] - 1j * s[:, 1])
    w = 0.5 * s[:, 2]
    return u, w


def fp_drift(state, params):
    """Linear drift coefficient matrix of the fluctuation equation.

    Equals the mean-field Jacobian expressed in (nu, nu*, mu) variables;
    complex, shape (3n, 3n), per-ensemble triples.
    """
    n = params.n_ensembles
    u, w = _uuw(state)
    usum = u.sum()
    W = params.W
    A = np.zeros((3 * n, 3 * n), dtype=complex)
    for a in range(n):
        ia = 3 * a
        wa = params.omega[a]
        for b in range(n):
            ib = 3 * b
            diag = a == b
            A[ia, ib] = (-1j * wa - 0.5 * W) * diag + w[a]
            A[ia + 1, ib + 1] = (1j * wa - 0.5 * W) * diag + w[a]
            if diag:
                A[ia, ib + 2] = usum
                A[ia + 1, ib + 2] = np.conj(usum)
                A[ia + 2, ib + 2] = -W
            A[ia + 2, ib] = -0.5 * (np.conj(u[a]) + diag * np.conj(usum))
            A[ia + 2, ib + 1] = -0.5 * (u[a] + diag * usum)
    return A


def fp_diffusion(state, params):
    """Real symmetric diffusion matrix over (Re nu, Im nu, mu) triples.

    Per-ensemble second-derivative coefficients, with complex-conjugate
    closure: a = s_-^tau l_- / 4 on nu^2, b = [2W(1 - 2 s_z^tau) +
    s_-^tau l_+]/64 on mu^2, W/2 on nu nu*, and c = W s_-^tau / 4 on nu mu.
    May be indefinite; see `FluctuationCoefficients.diffusion_definite`.
    """
    n = params.n_ensembles
    s = spins_of(state)
    W = params.W
    lm = (s[:, 0] - 1j * s[:, 1]).sum()
    D = np.zeros((3 * n, 3 * n))
    for t in range(n):
        i = 3 * t
        sm = s[t, 0] - 1j * s[t, 1]
        a = 0.25 * sm * lm
        b = (2.0 * W * (1.0 - 2.0 * s[t, 2]) + sm * np.conj(lm)) / 64.0
        c = 0.25 * W * sm
        D[i, i] = 0.5 * a.real + 0.25 * W
        D[i + 1, i + 1] = -0.5 * a.real + 0.25 * W
        D[i, i + 1] = D[i + 1, i] = 0.5 * a.imag
        D[i + 2, i + 2] = 2.0 * b.real
        D[i, i + 2] = D[i + 2, i] = 0.5 * c.real
        D[i + 1, i + 2] = D[i + 2, i + 1] = 0.5 * c.imag
    return D


def fluctuation_coefficients(state, params):
    return FluctuationCoefficients(drift=fp_drift(state, params),
                                   diffusion=fp_diffusion(state, params))


def complex_basis_map(n):
    """Block-diagonal map from (x, y, z) to (nu, nu*, mu) fluctuations."""
    m = np.array([[0.5, -0.5j, 0.0],
                  [0.5, 0.5j, 0.0],
                  [0.0, 0.0, 0.5]])
    T = np.zeros((3 * n, 3 * n), dtype=complex)
    for a in range(n):
        T[3 * a:3 * a + 3, 3 * a:3 * a + 3] = m
    return T


def sample_fluctuations(coeffs, n_steps, dt=1e-3, rng=None, experimental=False):
    """Euler-Maruyama sampling of the linear fluctuation process.

    Gated: refuses to run unless explicitly marked experimental and the
    diffusion matrix is positive semidefinite (the Glauber-Sudarshan
    representation does not guarantee positivity, and sampling an indefinite
    diffusion would be silently wrong).
    """
    if not experimental:
        raise RuntimeError("fluctuation sampling is experimental; "
                           "pass experimental=True to acknowledge")
    if not coeffs.diffusion_definite:
        raise ValueError("diffusion matrix is not positive semidefinite; "
                         "refusing to sample")
    rng = np.random.default_rng(rng)
    n3 = coeffs.diffusion.shape[0]
    # drift in the real basis
    n = n3 // 3
    T = complex_basis_map(n)
    A = np.real(np.linalg.solve(T, coeffs.drift @ T))
    w, V = np.linalg.eigh(coeffs.diffusion)
    B = V @ np.diag(np.sqrt(np.maximum(2.0 * w, 0.0)))
    x = np.zeros(n3)
    out = np.empty((n_steps + 1, n3))
    out[0] = x
    for i in range(n_steps):
        x = x + dt * (A @ x) + np.sqrt(dt) * (B @ rng.standard_normal(n3))
        out[i + 1] = x
    return out
