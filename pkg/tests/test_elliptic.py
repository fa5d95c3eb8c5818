"""AGM elliptic integrals and the Landen-ladder cn, against scipy oracles."""

import numpy as np
import pytest
from scipy import special

from spincomb.elliptic import complete_K, complete_E, cn


def test_exact_anchor_values():
    assert complete_K(0.0) == np.pi / 2
    assert complete_E(0.0) == np.pi / 2
    assert complete_E(1.0) == 1.0


def test_k_against_scipy():
    for k in np.linspace(0.0, 0.9999, 101):
        assert complete_K(k) == pytest.approx(special.ellipk(k * k), abs=1e-13)


def test_e_against_scipy():
    for k in np.linspace(0.0, 1.0, 101):
        assert complete_E(k) == pytest.approx(special.ellipe(k * k), abs=1e-13)


def test_domain_errors():
    with pytest.raises(ValueError):
        complete_K(1.0)
    with pytest.raises(ValueError):
        complete_E(1.5)
    with pytest.raises(ValueError):
        cn(0.3, -0.1)


def test_cn_reduces_to_cosine():
    u = np.linspace(-20, 20, 201)
    assert np.max(np.abs(cn(u, 0.0) - np.cos(u))) < 1e-12


def test_cn_at_unit_modulus_is_sech():
    u = np.linspace(-5, 5, 51)
    np.testing.assert_allclose(cn(u, 1.0), 1 / np.cosh(u), atol=1e-12)


@pytest.mark.parametrize("k", [0.1, 0.5, 0.9, 0.96, 0.9999])
def test_cn_against_scipy(k):
    u = np.linspace(-30, 30, 301)
    _, cn_ref, _, _ = special.ellipj(u, k * k)
    assert np.max(np.abs(cn(u, k) - cn_ref)) < 1e-11


def test_cn_periodicity():
    k = 0.8
    K = complete_K(k)
    u = np.linspace(0, 4 * K, 64)
    np.testing.assert_allclose(cn(u + 4 * K, k), cn(u, k), atol=1e-10)
    np.testing.assert_allclose(cn(u + 2 * K, k), -cn(u, k), atol=1e-10)


def test_cn_scalar_input():
    out = cn(1.3, 0.7)
    assert isinstance(out, float)
