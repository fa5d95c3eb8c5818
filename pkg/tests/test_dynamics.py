"""Equations of motion, symmetry transforms and the integrator."""

import numpy as np
import pytest

import spincomb as sc
from spincomb.dynamics import (eom_full, eom_group, eom_reduced, rotate_z,
                               z2_transform, z2_matrix, integrate,
                               integrate_reduced, integrate_group,
                               IntegrateOptions, DegenerateGroupStateError)
from spincomb.params import (ModelParams, tss_state, random_state,
                             group_from_full, full_from_group,
                             reduced_to_full, spin_lengths)


def eom_oracle(state, omega, W):
    """Independent component-by-component evaluation of the spin equations."""
    n = len(omega)
    lx = sum(state[3 * i] for i in range(n))
    ly = sum(state[3 * i + 1] for i in range(n))
    out = []
    for i in range(n):
        sx, sy, sz = state[3 * i], state[3 * i + 1], state[3 * i + 2]
        out.append(-omega[i] * sy - W / 2 * sx + sz * lx / 2)
        out.append(omega[i] * sx - W / 2 * sy + sz * ly / 2)
        out.append(W * (1 - sz) - sx * lx / 2 - sy * ly / 2)
    return np.array(out)


def group_rate_oracle(gstate, Phi, params):
    """Chain rule through the full equations: d/dt of the polar variables."""
    y = full_from_group(gstate, Phi)
    dy = eom_full(y, params)
    sxA, syA, _, sxB, syB, _ = y
    spA2 = sxA ** 2 + syA ** 2
    spB2 = sxB ** 2 + syB ** 2
    dspA = (sxA * dy[0] + syA * dy[1]) / np.sqrt(spA2)
    dspB = (sxB * dy[3] + syB * dy[4]) / np.sqrt(spB2)
    dphiA = (sxA * dy[1] - syA * dy[0]) / spA2
    dphiB = (sxB * dy[4] - syB * dy[3]) / spB2
    dg = np.array([dspA, dspB, dy[2], dy[5], 0.5 * (dphiA - dphiB)])
    return dg, 0.5 * (dphiA + dphiB)


class TestEomFull:
    def test_tss_is_fixed_point(self):
        for delta, W in [(0.5, 0.5), (1.7, 0.2), (0.0, 1.3)]:
            params = ModelParams.two_ensemble(delta, W)
            assert np.all(eom_full(tss_state(2), params) == 0.0)

    def test_w0_spins_up_is_fixed_point(self):
        params = ModelParams.two_ensemble(0.8, 0.0)
        assert np.all(eom_full(tss_state(2), params) == 0.0)

    def test_matches_hand_coded_components(self, rng):
        params = ModelParams.two_ensemble(0.5, 0.3)
        for _ in range(20):
            y = rng.normal(size=6)
            np.testing.assert_allclose(eom_full(y, params),
                                       eom_oracle(y, params.omega, params.W),
                                       rtol=0, atol=1e-14)

    def test_arbitrary_ensemble_count(self, rng):
        params = ModelParams(omega=(0.1, -0.4, 0.3), W=0.7)
        y = rng.normal(size=9)
        np.testing.assert_allclose(eom_full(y, params),
                                   eom_oracle(y, params.omega, params.W),
                                   atol=1e-14)

    def test_dimension_mismatch(self):
        params = ModelParams.two_ensemble(0.5, 0.3)
        with pytest.raises(ValueError, match="components"):
            eom_full(np.zeros(9), params)


class TestEomGroup:
    def test_z2_symmetric_phi_rate_vanishes(self):
        params = ModelParams.two_ensemble(0.9, 0.4)   # omega_sum = 0
        g = np.array([0.6, 0.6, 0.3, 0.3, 0.7])
        _, phi_rate = eom_group(g, params)
        assert abs(phi_rate) < 1e-15

    def test_ntss_is_fixed_point(self):
        params = ModelParams.two_ensemble(0.5, 0.5)
        fp = sc.ntss(params)
        g, _ = group_from_full(fp.state)
        dg, phi_rate = eom_group(g, params)
        assert np.max(np.abs(dg)) < 1e-14
        assert abs(phi_rate) < 1e-14

    def test_chain_rule_oracle(self, rng):
        params = ModelParams.two_ensemble(0.7, 0.6)
        for _ in range(20):
            y = random_state(2, rng)
            g, Phi = group_from_full(y)
            dg, dPhi = eom_group(g, params)
            dg_ref, dPhi_ref = group_rate_oracle(g, Phi, params)
            np.testing.assert_allclose(dg, dg_ref, atol=1e-12)
            assert abs(dPhi - dPhi_ref) < 1e-12

    def test_degenerate_transverse_raises(self):
        params = ModelParams.two_ensemble(0.5, 0.5)
        with pytest.raises(DegenerateGroupStateError):
            eom_group(np.array([0.0, 0.5, 0.1, 0.1, 0.2]), params)


class TestEomReduced:
    def test_tss_on_w1_line(self):
        params = ModelParams.two_ensemble(0.7, 1.0)
        assert np.all(eom_reduced(np.array([0.0, 0.0, 1.0]), params) == 0.0)

    def test_ntss_branch_is_fixed_point(self):
        params = ModelParams.two_ensemble(0.3, 0.6)
        for branch in sc.ntss_reduced(params):
            assert np.max(np.abs(eom_reduced(branch, params))) < 1e-14

    def test_embedding_equivalence(self, rng):
        params = ModelParams.two_ensemble(0.8, 0.45)
        for _ in range(100):
            s = rng.normal(size=3)
            dy = eom_full(reduced_to_full(s), params)
            np.testing.assert_allclose(eom_reduced(s, params), dy[:3],
                                       atol=1e-13)
            # the image stays on the submanifold
            np.testing.assert_allclose(dy[3:], [dy[0], -dy[1], dy[2]],
                                       atol=1e-13)


class TestSymmetries:
    def test_rotate_identity(self, rng):
        y = random_state(2, rng)
        np.testing.assert_allclose(rotate_z(y, 0.0), y, atol=0)
        np.testing.assert_allclose(rotate_z(y, 2 * np.pi), y, atol=1e-12)

    def test_axial_equivariance(self, rng):
        params = ModelParams.two_ensemble(0.9, 0.7)
        for _ in range(100):
            y = rng.normal(size=6)
            phi = rng.uniform(0, 2 * np.pi)
            lhs = eom_full(rotate_z(y, phi), params)
            rhs = rotate_z(eom_full(y, params), phi)
            np.testing.assert_allclose(lhs, rhs, atol=1e-12)

    def test_z2_involution(self, rng):
        y = random_state(2, rng)
        np.testing.assert_allclose(z2_transform(z2_transform(y)), y, atol=1e-15)

    def test_z2_fixes_symmetric_states(self):
        y = reduced_to_full(np.array([0.3, -0.4, 0.5]))
        np.testing.assert_allclose(z2_transform(y), y, atol=1e-15)

    def test_z2_equivariance(self, rng):
        params = ModelParams.two_ensemble(1.1, 0.35)
        for _ in range(100):
            y = rng.normal(size=6)
            phi0 = rng.uniform(0, 2 * np.pi)
            lhs = eom_full(z2_transform(y, phi0), params)
            rhs = z2_transform(eom_full(y, params), phi0)
            np.testing.assert_allclose(lhs, rhs, atol=1e-12)

    def test_z2_matrix_matches_map(self, rng):
        y = random_state(2, rng)
        phi0 = 0.83
        np.testing.assert_allclose(z2_matrix(phi0) @ y,
                                   z2_transform(y, phi0), atol=1e-14)

    def test_z2_requires_two_ensembles(self):
        with pytest.raises(ValueError):
            z2_transform(np.zeros(9))


class TestIntegrate:
    def test_tss_trajectory_constant(self):
        params = ModelParams.two_ensemble(0.5, 0.8)
        traj = integrate(tss_state(2), params, 50.0)
        assert np.max(np.abs(traj.y - tss_state(2))) < 1e-12

    def test_w0_conserves_spin_lengths(self):
        params = ModelParams.two_ensemble(0.7, 0.0)
        y0 = random_state(2, np.random.default_rng(3), radius=0.8)
        opts = IntegrateOptions(rtol=1e-11, atol=1e-13, dt_sample=0.5)
        traj = integrate(y0, params, 100.0, opts)
        lengths = spin_lengths(traj.y)
        drift = np.max(np.abs(lengths - lengths[0]))
        assert drift < 1e-9

    def test_toda_solution_at_origin(self):
        params = ModelParams.two_ensemble(0.0, 0.0)
        y0 = random_state(2, np.random.default_rng(7), radius=0.9)
        C1, C2 = sc.toda_fit_constants(y0)
        opts = IntegrateOptions(rtol=1e-12, atol=1e-14, dt_sample=0.05)
        traj = integrate(y0, params, 12.0 / C1, opts)
        lperp = np.hypot(traj.y[:, 0] + traj.y[:, 3],
                         traj.y[:, 1] + traj.y[:, 4])
        ana = sc.toda_lperp(traj.t, C1, C2)
        mask = ana > 1e-5
        rel = np.abs(lperp[mask] - ana[mask]) / ana[mask]
        assert rel.max() < 1e-6

    def test_group_full_consistency(self):
        params = ModelParams.two_ensemble(0.7, 0.3)
        y0 = random_state(2, np.random.default_rng(5))
        g0, Phi0 = group_from_full(y0)
        opts = IntegrateOptions(rtol=1e-11, atol=1e-13, dt_sample=0.5)
        full = integrate(y0, params, 100.0, opts)
        grp = integrate_group(g0, params, 100.0, Phi0=Phi0, options=opts)
        rec = np.array([full_from_group(g[:5], g[5]) for g in grp.y])
        assert np.max(np.abs(rec - full.y)) < 1e-6

    def test_submanifold_closure(self):
        params = ModelParams.two_ensemble(1.2, 0.45)
        y0 = reduced_to_full(np.array([0.4, -0.25, 0.55]))
        opts = IntegrateOptions(rtol=1e-10, atol=1e-12, dt_sample=1.0)
        traj = integrate(y0, params, 200.0, opts)
        spA = np.hypot(traj.y[:, 0], traj.y[:, 1])
        spB = np.hypot(traj.y[:, 3], traj.y[:, 4])
        assert np.max(np.abs(spA - spB)) < 1e-8
        assert np.max(np.abs(traj.y[:, 2] - traj.y[:, 5])) < 1e-8

    def test_reduced_vs_full_integration(self):
        params = ModelParams.two_ensemble(0.9, 0.3)
        s0 = np.array([0.4, -0.25, 0.55])
        opts = IntegrateOptions(rtol=1e-11, atol=1e-13, dt_sample=0.5)
        red = integrate_reduced(s0, params, 100.0, opts)
        full = integrate(reduced_to_full(s0), params, 100.0, opts)
        assert np.max(np.abs(red.y - full.y[:, :3])) < 1e-7

    def test_determinism(self):
        params = ModelParams.two_ensemble(0.8, 0.4)
        y0 = random_state(2, np.random.default_rng(1))
        a = integrate(y0, params, 30.0)
        b = integrate(y0, params, 30.0)
        assert np.array_equal(a.y, b.y)

    def test_rejects_nonpositive_t_end(self):
        params = ModelParams.two_ensemble(0.8, 0.4)
        with pytest.raises(ValueError):
            integrate(tss_state(2), params, 0.0)

    def test_csv_export(self, tmp_path):
        params = ModelParams.two_ensemble(0.8, 0.4)
        traj = integrate(random_state(2, np.random.default_rng(2)), params, 5.0)
        path = tmp_path / "traj.csv"
        traj.to_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "t,sxA,syA,szA,sxB,syB,szB"
        data = np.loadtxt(path, delimiter=",", skiprows=1)
        np.testing.assert_allclose(data[:, 1:], traj.y, rtol=1e-15)
        # 17 significant digits survive the round trip exactly
        assert np.array_equal(data[:, 0], traj.t)
