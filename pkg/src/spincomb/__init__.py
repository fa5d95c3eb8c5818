"""Driven-dissipative mean-field dynamics of atomic ensembles in a bad cavity.

Simulation and analysis toolkit: spin equations of motion, fixed points and
their stability, Hopf normal forms, limit cycles with Floquet analysis,
radiated power spectra (frequency combs), fluctuation coefficients and
phase-diagram scans.
"""

from .backends import BACKEND
from .params import (ModelParams, tss_state, random_state, state_from_spins,
                     spins_of, total_spin, spin_lengths, group_from_full,
                     full_from_group, reduced_to_full)
from .dynamics import (eom_full, eom_group, eom_reduced, rotate_z,
                       z2_transform, integrate, integrate_reduced,
                       integrate_group, advance, IntegrateOptions, Trajectory,
                       DegenerateGroupStateError)
from .fixedpoints import (FixedPoint, tss, ntss, ntss_exists, ntss_reduced,
                          single_clock_attractor, toda_lperp,
                          toda_fit_constants, no_pump_classify)
from .stability import (StabilityReport, jacobian_full, jacobian_reduced,
                        ntss_char_values,
                        mean_field_jacobian, tss_char_values,
                        ntss_poly_coeffs, tss_stable, ntss_stable,
                        delta_minus, delta_plus, classify_fixed_point)
from .normalform import (HopfData, hopf_a1, classify_hopf, delta_a1_zero,
                         pitchfork_coeff, taper_slopes, taper_angle_deg,
                         coexistence_left_boundary, CoexistOptions,
                         NearResonanceError, ntss_distance)
from .cycles import (LimitCycle, CycleOptions, find_limit_cycle,
                     harmonic_solution, harmonic_validity, elliptic_k,
                     elliptic_params, elliptic_solution, EllipticParams,
                     floquet_multipliers, detect_symmetry_breaking,
                     check_weak_z2, omega_q, TransientNotSettled)
from .spectra import (CombSpectrum, CombLadder, power_spectrum, extract_comb,
                      find_peaks, reflection_symmetry, mirror_asymmetry,
                      predicted_f0, to_si, collective_unit_hz)
from .fluctuations import (FluctuationCoefficients, fp_drift, fp_diffusion,
                           fluctuation_coefficients, sample_fluctuations)
from .phasescan import PhasePoint, ScanOptions, GridSpec, classify_point, scan

__version__ = "0.1.0"
