"""Model parameters and classical spin state helpers.

Units: time and energy are measured in the collective decay rate of the full
N-atom ensemble, i.e. N*Gamma_c = 1 with Gamma_c = Omega^2/kappa.  A state is
a flat float array of length 3n holding (s_x, s_y, s_z) per ensemble; for two
ensembles the layout is (sxA, syA, szA, sxB, syB, szB).
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters of n atomic ensembles in a heavily damped cavity.

    Parameters
    ----------
    omega : tuple of float
        Per-ensemble level splittings in the rotating frame.
    W : float
        Incoherent repump rate, >= 0.
    """

    omega: tuple
    W: float

    def __post_init__(self):
        if self.W < 0:
            raise ValueError(f"repump rate W must be >= 0, got {self.W}")
        if len(self.omega) < 1:
            raise ValueError("need at least one ensemble")
        object.__setattr__(self, "omega", tuple(float(w) for w in self.omega))

    @classmethod
    def two_ensemble(cls, delta, W, omega_sum=0.0):
        """Two ensembles at detuning delta; canonical frame has omega_sum=0."""
        half = 0.5 * float(delta)
        mid = 0.5 * float(omega_sum)
        return cls(omega=(mid + half, mid - half), W=float(W))

    @property
    def n_ensembles(self):
        return len(self.omega)

    @property
    def delta(self):
        """Detuning omega_A - omega_B (two ensembles only)."""
        self._require_two()
        return self.omega[0] - self.omega[1]

    @property
    def omega_sum(self):
        self._require_two()
        return self.omega[0] + self.omega[1]

    def _require_two(self):
        if self.n_ensembles != 2:
            raise ValueError(
                f"operation requires exactly 2 ensembles, got {self.n_ensembles}")

    def packed(self):
        """Parameter vector consumed by the integration backends."""
        return np.array([self.W, *self.omega])


def tss_state(n_ensembles=2):
    """Maximally pumped configuration: every spin along +z."""
    y = np.zeros(3 * n_ensembles)
    y[2::3] = 1.0
    return y


def state_from_spins(*spins):
    """Flatten per-ensemble (sx, sy, sz) triples into a state vector."""
    y = np.concatenate([np.asarray(s, dtype=float) for s in spins])
    if y.shape[0] % 3:
        raise ValueError("each spin needs exactly three components")
    return y


def spins_of(state):
    """View a state vector as an (n, 3) array of spins."""
    y = np.asarray(state, dtype=float)
    if y.shape[-1] % 3:
        raise ValueError(f"state length {y.shape[-1]} is not a multiple of 3")
    return y.reshape(*y.shape[:-1], -1, 3)


def total_spin(state):
    """Total classical spin l = sum over ensembles."""
    return spins_of(state).sum(axis=-2)


def spin_lengths(state):
    """Per-ensemble |s^tau|."""
    return np.linalg.norm(spins_of(state), axis=-1)


def random_state(n_ensembles=2, rng=None, radius=1.0):
    """Random state with each spin drawn uniformly on a sphere of |s|=radius."""
    rng = np.random.default_rng(rng)
    z = rng.uniform(-1.0, 1.0, n_ensembles)
    phi = rng.uniform(0.0, 2.0 * np.pi, n_ensembles)
    r = np.sqrt(1.0 - z * z)
    return radius * np.column_stack([r * np.cos(phi), r * np.sin(phi), z]).ravel()


def group_from_full(state):
    """Map a two-ensemble state to group variables.

    Returns ((s_perp_A, s_perp_B, s_z_A, s_z_B, varphi), Phi) with
    varphi = (phi_A - phi_B)/2 and the global phase Phi = (phi_A + phi_B)/2.
    """
    y = np.asarray(state, dtype=float)
    if y.shape[0] != 6:
        raise ValueError("group variables are defined for two ensembles")
    spA = np.hypot(y[0], y[1])
    spB = np.hypot(y[3], y[4])
    phiA = np.arctan2(y[1], y[0])
    phiB = np.arctan2(y[4], y[3])
    varphi = 0.5 * (phiA - phiB)
    Phi = 0.5 * (phiA + phiB)
    return np.array([spA, spB, y[2], y[5], varphi]), Phi


def full_from_group(gstate, Phi=0.0):
    """Inverse of :func:`group_from_full`."""
    spA, spB, szA, szB, varphi = np.asarray(gstate, dtype=float)
    phiA = Phi + varphi
    phiB = Phi - varphi
    return np.array([spA * np.cos(phiA), spA * np.sin(phiA), szA,
                     spB * np.cos(phiB), spB * np.sin(phiB), szB])


def reduced_to_full(state):
    """Embed a representative spin of the Z2 submanifold into two ensembles.

    The image satisfies sxA = sxB, syA = -syB, szA = szB and is invariant
    under the ensemble-interchange map.
    """
    sx, sy, sz = np.asarray(state, dtype=float)
    return np.array([sx, sy, sz, sx, -sy, sz])
