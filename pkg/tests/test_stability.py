"""Jacobians, characteristic values and the analytic stability regions."""

import numpy as np
import pytest

import spincomb as sc
from spincomb.params import ModelParams, random_state
from spincomb.dynamics import eom_full, eom_reduced, z2_matrix
from spincomb.stability import (jacobian_full, jacobian_reduced,
                                ntss_char_values,
                                mean_field_jacobian, tss_char_values,
                                ntss_poly_coeffs, tss_stable, ntss_stable,
                                delta_minus, delta_plus, classify_fixed_point)


def fd_jacobian(fun, y, eps=1e-6):
    """Central-difference Jacobian, the independent oracle."""
    n = len(y)
    J = np.empty((n, n))
    for j in range(n):
        up, dn = y.copy(), y.copy()
        up[j] += eps
        dn[j] -= eps
        J[:, j] = (fun(up) - fun(dn)) / (2 * eps)
    return J


def assert_spectra_close(a, b, atol):
    """Multiset comparison of eigenvalue lists (sorting-free)."""
    b = list(b)
    for z in a:
        dists = [abs(z - w) for w in b]
        i = int(np.argmin(dists))
        assert dists[i] < atol, f"eigenvalue {z} unmatched (best {dists[i]:.2e})"
        b.pop(i)


class TestJacobians:
    def test_full_matches_finite_differences(self, rng):
        params = ModelParams.two_ensemble(0.8, 0.45)
        for _ in range(20):
            y = rng.normal(size=6)
            ref = fd_jacobian(lambda s: eom_full(s, params), y)
            np.testing.assert_allclose(jacobian_full(y, params), ref,
                                       atol=1e-6)

    def test_full_any_n(self, rng):
        params = ModelParams(omega=(0.2, -0.1, 0.45), W=0.6)
        y = rng.normal(size=9)
        ref = fd_jacobian(lambda s: eom_full(s, params), y)
        np.testing.assert_allclose(mean_field_jacobian(y, params), ref,
                                   atol=1e-6)

    def test_reduced_matches_finite_differences(self, rng):
        params = ModelParams.two_ensemble(0.8, 0.45)
        for _ in range(20):
            s = rng.normal(size=3)
            ref = fd_jacobian(lambda x: eom_reduced(x, params), s)
            np.testing.assert_allclose(jacobian_reduced(s, params), ref,
                                       atol=1e-6)

    def test_tss_jacobian_commutes_with_interchange(self):
        params = ModelParams.two_ensemble(1.2, 0.7)
        J = jacobian_full(sc.tss(params).state, params)
        S = z2_matrix(0.0)
        np.testing.assert_allclose(J @ S - S @ J, 0.0, atol=1e-14)

    def test_ntss_zero_mode(self, rng):
        count = 0
        while count < 100:
            delta = rng.uniform(0, 1)
            W = rng.uniform(0.05, 2)
            params = ModelParams.two_ensemble(delta, W)
            fp = sc.ntss(params)
            if fp is None:
                continue
            lam = np.linalg.eigvals(jacobian_full(fp.state, params))
            assert np.min(np.abs(lam)) < 1e-9
            count += 1


class TestCharacteristicValues:
    def test_tss_reference_point(self):
        lam = tss_char_values(ModelParams.two_ensemble(1.5, 1.0))
        lam = np.sort_complex(lam)
        expect = np.sort_complex(np.array(
            [-1, -1, 0.5590169943749475j, 0.5590169943749475j,
             -0.5590169943749475j, -0.5590169943749475j]))
        np.testing.assert_allclose(lam, expect, atol=1e-12)

    def test_all_negative_outside_arc(self, rng):
        for _ in range(200):
            delta = rng.uniform(0, 0.999)
            W = rng.uniform(0, 2)
            if (W - 1) ** 2 + delta ** 2 <= 1:
                continue
            lam = tss_char_values(ModelParams.two_ensemble(delta, W))
            if W > 1:
                assert lam.real.max() < 0
            else:
                assert lam.real.max() > 0  # lower branch: TSS unstable

    def test_matches_numeric_spectrum(self, rng):
        for _ in range(50):
            params = ModelParams.two_ensemble(rng.uniform(0, 2),
                                              rng.uniform(0, 2))
            lam = tss_char_values(params)
            num = np.linalg.eigvals(jacobian_full(sc.tss(params).state, params))
            assert_spectra_close(lam, num, atol=1e-10)

    def test_reduced_char_polys(self):
        # TSS: Q3; NTSS: P3
        params = ModelParams.two_ensemble(0.6, 0.8)
        delta, W = params.delta, params.W
        J = jacobian_reduced([0.0, 0.0, 1.0], params)
        q3 = np.polymul([1.0, W], [1.0, W - 1.0, (W ** 2 + delta ** 2 - 2 * W) / 4])
        np.testing.assert_allclose(np.poly(J), q3, atol=1e-12)
        c0, c1, c2 = ntss_poly_coeffs(params)
        Jn = jacobian_reduced(sc.ntss_reduced(params)[0], params)
        np.testing.assert_allclose(np.poly(Jn), [1.0, c2, c1, c0], atol=1e-12)


class TestNTSSPolynomial:
    def test_coefficients_reference(self):
        c0, c1, c2 = ntss_poly_coeffs(ModelParams.two_ensemble(0.3, 0.6))
        assert c0 == pytest.approx(0.6 * (0.6 - (0.36 + 0.09) / 2))
        assert c0 == pytest.approx(0.225)

    def test_c0_vanishes_on_semicircle(self):
        W = 0.7
        delta = np.sqrt(1 - (W - 1) ** 2) * (1 - 1e-14)
        c0, _, _ = ntss_poly_coeffs(ModelParams.two_ensemble(delta, W))
        assert abs(c0) < 1e-13

    def test_factorization_matches_full_spectrum(self, rng):
        count = 0
        while count < 30:
            delta = rng.uniform(0.05, 1)
            W = rng.uniform(0.1, 1.9)
            params = ModelParams.two_ensemble(delta, W)
            fp = sc.ntss(params)
            if fp is None:
                continue
            closed = ntss_char_values(params)
            num = np.linalg.eigvals(jacobian_full(fp.state, params))
            assert_spectra_close(closed, num, atol=1e-8)
            count += 1


class TestRouthHurwitz:
    def test_reference_points(self):
        assert ntss_stable(ModelParams.two_ensemble(0.2, 0.5))
        assert not ntss_stable(ModelParams.two_ensemble(0.7, 0.5))

    def test_grid_agreement_with_root_signs(self):
        deltas = np.linspace(0.02, 1.0, 50)
        ws = np.linspace(0.02, 1.98, 50)
        for delta in deltas:
            for W in ws:
                params = ModelParams.two_ensemble(delta, W)
                coeffs = ntss_poly_coeffs(params)
                if coeffs is None:
                    assert not ntss_stable(params)
                    continue
                c0, c1, c2 = coeffs
                roots_ok = np.roots([1, c2, c1, c0]).real.max() < 0
                if abs(delta - delta_minus(W)) < 1e-3:
                    continue  # numerically marginal at the boundary
                assert ntss_stable(params) == roots_ok


class TestHopfBoundary:
    def test_table_row_values(self):
        table = {0.30: 0.410, 0.45: 0.592, 0.65: 0.782, 0.95: 0.974}
        for W, dexp in table.items():
            assert delta_minus(W) == pytest.approx(dexp, abs=1e-3)

    def test_tricritical(self):
        assert delta_minus(1.0) == pytest.approx(1.0, abs=1e-14)

    def test_branch_ordering(self, rng):
        for _ in range(100):
            W = rng.uniform(0.01, 2)
            lo, hi = delta_minus(W), delta_plus(W)
            assert 0 <= lo <= hi


class TestClassify:
    def test_tss_stable_point(self):
        params = ModelParams.two_ensemble(0.5, 2.0)
        rep = classify_fixed_point(sc.tss(params), params)
        assert rep.stable and rep.kind == "TSS"

    def test_point_inside_semicircle_is_phase_ii(self):
        # (0.5, 1.5) lies inside (W-1)^2 + delta^2 = 1: synchronized phase
        params = ModelParams.two_ensemble(0.5, 1.5)
        assert not tss_stable(params)
        assert ntss_stable(params)

    def test_tss_unstable_hopf_side(self):
        params = ModelParams.two_ensemble(1.5, 0.9)
        rep = classify_fixed_point(sc.tss(params), params)
        assert not rep.stable

    def test_ntss_zero_mode_marginal_and_excluded(self):
        params = ModelParams.two_ensemble(0.3, 0.7)
        rep = classify_fixed_point(sc.ntss(params), params)
        assert rep.stable
        assert len(rep.marginal) == 1
        assert rep.poly_coeffs is not None

    def test_rejects_non_fixed_point(self):
        params = ModelParams.two_ensemble(0.3, 0.7)
        with pytest.raises(ValueError, match="residual"):
            classify_fixed_point(random_state(2, np.random.default_rng(0)),
                                 params)

    def test_quarter_circle_boundary_resolution(self):
        # I/II boundary at grid resolution 1e-3
        for delta in np.linspace(0.05, 0.99, 40):
            Wb = 1.0 + np.sqrt(1.0 - delta ** 2)
            outside = ModelParams.two_ensemble(delta, Wb + 1e-3)
            inside = ModelParams.two_ensemble(delta, Wb - 1e-3)
            assert tss_stable(outside) and not ntss_stable(outside)
            assert ntss_stable(inside) and not tss_stable(inside)
