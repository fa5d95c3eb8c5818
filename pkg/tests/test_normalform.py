"""Poincare-Birkhoff reduction, pitchfork coefficient, wedge taper and the
coexistence probe."""

import numpy as np
import pytest

import spincomb as sc
from spincomb.params import ModelParams
from spincomb.normalform import (hopf_a1, classify_hopf, delta_a1_zero,
                                 pitchfork_coeff, taper_slopes,
                                 taper_angle_deg, coexistence_left_boundary,
                                 CoexistOptions, NearResonanceError,
                                 ntss_distance, _z_ratio)


class TestHopfA1:
    def test_ntss_value_at_hopf_point(self):
        # at the W = 0.95 bifurcation point (delta_H = 0.9744)
        dH = float(sc.delta_minus(0.95))
        data = hopf_a1(ModelParams.two_ensemble(dH, 0.95), "NTSS")
        assert data.a1 == pytest.approx(0.46, abs=0.02)
        assert abs(data.gamma) < 1e-10  # criticality

    def test_tss_negative_at_reference(self):
        data = hopf_a1(ModelParams.two_ensemble(1.5, 1.0), "TSS")
        assert data.a1 < 0
        assert data.gamma == pytest.approx(0.0)
        assert data.omega == pytest.approx(np.sqrt(1.25) / 2)

    def test_zero_crossing_table(self):
        for W, dexp in [(0.30, 0.358), (0.45, 0.520), (0.65, 0.687),
                        (0.95, 0.820)]:
            assert delta_a1_zero(W) == pytest.approx(dexp, abs=0.005)

    def test_continuity_along_transect(self):
        W = 0.95
        ds = np.linspace(0.90, 0.974, 40)
        a1s = np.array([hopf_a1(ModelParams.two_ensemble(d, W)).a1
                        for d in ds])
        jumps = np.abs(np.diff(a1s))
        slope = np.median(jumps)
        assert jumps.max() < 10 * max(slope, 1e-6)

    def test_tss_real_spectrum_rejected(self):
        with pytest.raises(NearResonanceError):
            hopf_a1(ModelParams.two_ensemble(0.5, 1.0), "TSS")

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            hopf_a1(ModelParams.two_ensemble(1.5, 1.0), "nope")


class TestClassifyHopf:
    def test_tss_supercritical_on_w1_line(self):
        for delta in (1.2, 1.5, 2.0):
            assert classify_hopf(ModelParams.two_ensemble(delta, 1.0),
                                 "TSS") == "supercritical"

    def test_ntss_subcritical_on_hopf_line(self):
        for W in (0.45, 0.65, 0.95):
            dH = float(sc.delta_minus(W))
            assert classify_hopf(ModelParams.two_ensemble(dH, W),
                                 "NTSS") == "subcritical"

    def test_indeterminate_band(self):
        d0 = delta_a1_zero(0.30)
        out = classify_hopf(ModelParams.two_ensemble(d0, 0.30), "NTSS",
                            atol=1e-3)
        assert out == "indeterminate"

    def test_supercritical_amplitude_scaling(self):
        # just past the TSS bifurcation the cycle radius follows the normal
        # form, and the physical amplitude grows as sqrt(2(1-W))
        delta = 1.5
        for W in (0.999, 0.99):
            params = ModelParams.two_ensemble(delta, W)
            hd = hopf_a1(params, "TSS")
            cyc = sc.find_limit_cycle(params, np.array([0.01, 0.0, 0.99]),
                                      sc.CycleOptions(transient=2e4))
            Q = np.column_stack([hd.vr, hd.vi, hd.v1])
            sp = np.linalg.solve(Q, (cyc.reduced - [0, 0, 1.0]).T)
            r_meas = np.hypot(sp[0], sp[1]).mean()
            r_nf = np.sqrt(-hd.gamma / hd.a1)
            assert r_meas == pytest.approx(r_nf, rel=0.20)
            amp = np.max(np.abs(cyc.reduced[:, 0]))
            assert amp == pytest.approx(np.sqrt(2 * (1 - W)), rel=0.15)
            # the onset period tracks the critical eigenfrequency
            assert cyc.period == pytest.approx(2 * np.pi / hd.omega, rel=0.05)


class TestPitchfork:
    def test_reference_value(self):
        assert pitchfork_coeff(0.6) == pytest.approx(-5.625)

    def test_negative_throughout(self, rng):
        for _ in range(100):
            assert pitchfork_coeff(rng.uniform(1e-3, 1 - 1e-3)) < 0

    def test_divergence_near_one(self):
        assert pitchfork_coeff(1 - 1e-9) < -1e3

    def test_domain(self):
        for bad in (0.0, 1.0, 1.2, -0.5):
            with pytest.raises(ValueError):
                pitchfork_coeff(bad)


class TestTaper:
    def test_slopes(self):
        tr, tl = taper_slopes()
        assert tr == 2.0
        assert tl == pytest.approx(1.50, abs=0.01)

    def test_angle_about_seven_degrees(self):
        assert taper_angle_deg() == pytest.approx(7.0, abs=0.5)

    def test_z_ratio_anchors(self):
        assert _z_ratio(1 - 1e-9) == pytest.approx(-1.6, abs=1e-6)
        ks = np.linspace(1 / np.sqrt(2) + 1e-6, 1 - 1e-9, 20001)
        zmax = max(_z_ratio(k) for k in ks)
        assert zmax == pytest.approx(-1.50, abs=0.01)
        # small-modulus limit: Z ~ k^2
        assert _z_ratio(0.02) == pytest.approx(4e-4, rel=0.01)


class TestCoexistenceProbe:
    def test_w095_boundary(self):
        res = coexistence_left_boundary(
            0.95, CoexistOptions(seed=1, workers=0))
        assert res.delta_end == pytest.approx(0.967, abs=0.01)
        assert res.delta_H == pytest.approx(0.974, abs=1e-3)
        # coexistence ends after the naive normal-form estimate
        assert delta_a1_zero(0.95) < res.delta_end < res.delta_H

    def test_deterministic_given_seed(self):
        a = coexistence_left_boundary(0.95, CoexistOptions(seed=3, workers=1))
        b = coexistence_left_boundary(0.95, CoexistOptions(seed=3, workers=2))
        assert a.delta_end == b.delta_end

    def test_no_attractor_error_deep_in_phase_ii(self):
        # starting the walk inside Phase I: the trajectory lands on the TSS
        with pytest.raises(RuntimeError, match="no time-dependent attractor"):
            coexistence_left_boundary(
                1.8, CoexistOptions(seed=0, workers=1, start_offset=0.0))


class TestNTSSDistance:
    def test_zero_on_the_circle(self, rng):
        params = ModelParams.two_ensemble(0.4, 0.7)
        for _ in range(10):
            fp = sc.ntss(params, Phi=rng.uniform(0, 2 * np.pi))
            assert ntss_distance(fp.state, params) < 1e-12

    def test_positive_off_circle(self):
        params = ModelParams.two_ensemble(0.4, 0.7)
        y = sc.ntss(params).state + 0.01
        assert ntss_distance(y, params) > 1e-3
