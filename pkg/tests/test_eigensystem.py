import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pseudoherm.eigensystem import (
    biorthonormality_check,
    build_phi,
    build_psi,
    delta_weight,
    inner_wavenumbers,
    wronskian,
)
from pseudoherm.exceptions import DomainError

ks = st.floats(0.2, 5.0)
Zs = st.floats(0.0, 1.0)
branches = st.sampled_from([1, -1])


@settings(max_examples=60, deadline=None)
@given(ks, Zs, branches)
def test_matching_and_ode(k, Z, b):
    x = np.linspace(-3, 3, 41)
    for f in (build_psi(k, Z, b), build_phi(k, Z, b)):
        assert f.matching_residuals().max() < 1e-10
        assert np.abs(f.ode_residual(x)).max() < 1e-10


@settings(max_examples=30, deadline=None)
@given(ks, Zs, branches)
def test_pt_symmetry(k, Z, b):
    # psi(x) = conj(psi(-x))
    f = build_psi(k, Z, b)
    x = np.linspace(-2.5, 2.5, 23)
    np.testing.assert_allclose(f(x), np.conj(f(-x)), atol=1e-13)


@settings(max_examples=30, deadline=None)
@given(ks, Zs, branches)
def test_phi_is_psi_at_minus_Z(k, Z, b):
    x = np.linspace(-3, 3, 31)
    np.testing.assert_allclose(build_phi(k, Z, b)(x), build_psi(k, -Z, b)(x), atol=1e-13)


def test_inner_wavenumbers():
    kp, km = inner_wavenumbers(2.0, 0.5)
    assert kp**2 == pytest.approx(4 + 0.5j)
    assert km**2 == pytest.approx(4 - 0.5j)
    assert kp.real > 0 and km.real > 0


@pytest.mark.parametrize("b", [1, -1])
def test_free_limit(b):
    x = np.linspace(-2, 2, 9)
    f = build_psi(1.3, 0.0, b)
    np.testing.assert_allclose(f(x), np.exp(1j * b * 1.3 * x) / np.sqrt(2 * np.pi), atol=1e-15)


def test_plane_wave_limit_is_first_order():
    x = np.linspace(-3, 3, 121)
    Zs = np.array([1e-3, 2e-3, 4e-3, 8e-3])
    for k in (0.5, 2.0, 4.0):
        err = [np.abs(build_psi(k, Z, 1)(x) - np.exp(1j * k * x) / np.sqrt(2 * np.pi)).max() for Z in Zs]
        slope = np.polyfit(np.log(Zs), np.log(err), 1)[0]
        assert abs(slope - 1) < 0.1


def test_wronskian_is_constant():
    f, g = build_psi(1.7, 0.4, 1), build_psi(1.7, 0.4, -1)
    vals = [wronskian(f, g, x) for x in (-2.5, -0.5, 0.5, 2.5)]
    np.testing.assert_allclose(vals, vals[0], atol=1e-13)
    assert abs(vals[0]) > 0.1  # the two branches are independent


@pytest.mark.parametrize("k", [0.0, -1.0, np.inf])
def test_bad_wavenumber(k):
    with pytest.raises(DomainError):
        build_psi(k, 0.1, 1)


def test_bad_branch():
    with pytest.raises(ValueError):
        build_psi(1.0, 0.1, 0)


def test_delta_weight_diagonal_is_first_order_exact():
    for a in (1, -1):
        d = (delta_weight(2.0, 1e-4, a, a) - delta_weight(2.0, -1e-4, a, a)) / 2e-4
        assert abs(d) < 1e-8


def test_delta_weight_cross_term():
    # first-order cross weight is -+Z sin(2k) / (2k^2)
    for k in (0.7, 2.0, 3.3):
        d = (delta_weight(k, 1e-4, 1, -1) - delta_weight(k, -1e-4, 1, -1)) / 2e-4
        assert d == pytest.approx(-np.sin(2 * k) / (2 * k * k), rel=1e-6)


def test_smeared_biorthonormality_matches_delta_weights():
    r = biorthonormality_check(2.0)
    assert r.deviation(1, 1) < 1e-3 and r.deviation(-1, -1) < 1e-3
    for a, b in [(1, 1), (-1, -1)]:
        assert abs(r.first_order[(a, b)]) < 1e-5
    for a, b in [(1, -1), (-1, 1)]:
        exact = (delta_weight(2.0, 1e-4, a, b) - delta_weight(2.0, -1e-4, a, b)) / 2e-4
        assert r.first_order[(a, b)].real == pytest.approx(exact, abs=1e-4)


def test_window_must_resolve_k0():
    with pytest.raises(DomainError):
        biorthonormality_check(0.5, width=0.3)
