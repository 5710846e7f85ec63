import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pseudoherm.exceptions import ConvergenceError
from pseudoherm.metric import eta1_kernel
from pseudoherm.observables import (
    grid_commutator_correction,
    localized_gram_matrix,
    localized_state,
    metric_matrix,
    momentum_matrix,
    observable_transform,
    p_kernel,
    p_kernel_physical,
    physical_density,
    position_matrix,
    pseudo_hermiticity_defect,
    uniform_grid,
    x_kernel,
    x_kernel_physical,
    xi_kernel,
)
from pseudoherm.params import PhysicalParams

coords = st.floats(-6, 6, allow_nan=False)
ZS = np.array([0.05, 0.1, 0.2])


def _slope(values):
    return np.polyfit(np.log(ZS), np.log(values), 1)[0]


@given(coords, coords)
def test_x_kernel_is_commutator(x, y):
    # -(1/2)[x, Q1] = -(1/2)(x - y) Q1(x, y)
    assert x_kernel(x, y) == pytest.approx(0.5 * (x - y) * eta1_kernel(x, y), abs=1e-12)


@given(coords, coords)
def test_p_kernel_is_real_symmetric(x, y):
    assert p_kernel(x, y) == pytest.approx(-p_kernel(y, x), abs=0)
    assert isinstance(p_kernel(x, y), float)


@given(coords, coords)
def test_xi_is_half_eta(x, y):
    assert xi_kernel(x, y) == -0.5 * eta1_kernel(x, y)


def test_x_physical_closed_form():
    p = PhysicalParams(m=0.7, hbar=1.3, L=3.0, zeta=0.2)
    x, y = 0.4, -1.1
    L, s = p.L, 0.4 - 1.1
    expected = 1j * p.m * p.zeta / (8 * p.hbar**2) * (2 * L + 2 * abs(s) - abs(s + L) - abs(s - L)) * abs(x - y)
    assert complex(x_kernel_physical(x, y, p)) == pytest.approx(expected, abs=1e-14)


def test_p_physical_scaling():
    p = PhysicalParams(m=1.0, hbar=1.0, L=4.0, zeta=0.1)
    # kernel picks up 2/L, momentum 2 hbar/L, and the overall Z
    expected = p.scale().Z * (2 / p.L) * (2 * p.hbar / p.L) * p_kernel(0.5, 1.0)
    assert float(p_kernel_physical(1.0, 2.0, p)) == pytest.approx(expected)


def test_grid_commutator_matches_p_kernel():
    g = uniform_grid(-4, 4, 801)
    h = g[1] - g[0]
    C = grid_commutator_correction(momentum_matrix(g), g) / h
    K = p_kernel(g[:, None], g[None, :])
    X, Y = np.meshgrid(g, g, indexing="ij")
    s = np.abs(X + Y)
    inner = (np.abs(X) < 2) & (np.abs(Y) < 2)
    away = (np.abs(X - Y) > 0.2) & (s > 0.1) & (np.abs(s - 2) > 0.1)
    assert np.abs(C - K)[inner & away].max() < 1e-12


@pytest.mark.parametrize("base", ["x", "p"])
def test_pseudo_hermiticity_is_second_order(base):
    g = uniform_grid(-5, 5, 401)
    out = []
    for Z in ZS:
        if base == "x":
            O = observable_transform("x").matrix(g, Z)
        else:
            o = momentum_matrix(g)
            O = o + Z * grid_commutator_correction(o, g)
        out.append(pseudo_hermiticity_defect(O, metric_matrix(g, Z)))
    assert abs(_slope(out) - 2) < 0.3


def test_untransformed_x_is_first_order():
    g = uniform_grid(-5, 5, 201)
    out = [pseudo_hermiticity_defect(position_matrix(g), metric_matrix(g, Z)) for Z in ZS]
    assert abs(_slope(out) - 1) < 0.1


def test_identity_transform_is_trivial():
    g = uniform_grid(-1, 1, 11)
    np.testing.assert_array_equal(observable_transform("identity").matrix(g, 0.3), np.eye(11))


def test_generic_path_agrees_with_closed_form_x():
    g = uniform_grid(-4, 4, 201)
    C = observable_transform(position_matrix, g)
    h = g[1] - g[0]
    np.testing.assert_allclose(C, x_kernel(g[:, None], g[None, :]) * h, atol=1e-14)


def test_generic_path_detects_unresolved_operator():
    # an operator that changes sign with every grid refinement has no limit
    def wild(grid):
        return np.diag(np.cos(np.pi * np.arange(len(grid)) * 0.5) * len(grid))

    with pytest.raises(ConvergenceError):
        observable_transform(wild, uniform_grid(-4, 4, 161))


def test_unknown_base():
    with pytest.raises(ValueError):
        observable_transform("q")
    with pytest.raises(ValueError):
        observable_transform(position_matrix)


def test_localized_gram_is_identity_to_second_order():
    g = uniform_grid(-5, 5, 401)
    out = [np.linalg.norm(localized_gram_matrix(g, Z) - np.eye(len(g))) for Z in ZS]
    assert abs(_slope(out) - 2) < 0.3


def test_localized_state_regular_part():
    s = localized_state(0.5, 0.2)
    x = np.linspace(-3, 3, 13)
    np.testing.assert_allclose(s(x), 0.2 * xi_kernel(x, 0.5))
    assert np.all(np.real(s(x)) == 0)


def test_density_integrates_to_one():
    g = uniform_grid(-12, 12, 801)
    psi = np.exp(-(g**2) / 4 + 1j * g)
    rho = physical_density(psi, g, 0.2)
    w = np.full(len(g), g[1] - g[0])
    w[[0, -1]] /= 2
    assert np.sum(w * rho) == pytest.approx(1.0, abs=1e-12)
    assert np.all(rho >= 0)


def test_density_at_zero_Z_is_born_rule():
    g = uniform_grid(-12, 12, 801)
    psi = np.exp(-(g**2) / 4)
    rho = physical_density(psi, g, 0.0)
    w = np.full(len(g), g[1] - g[0])
    w[[0, -1]] /= 2
    np.testing.assert_allclose(rho, np.abs(psi) ** 2 / np.sum(w * np.abs(psi) ** 2), atol=1e-14)


def test_density_input_validation():
    g = uniform_grid(-1, 1, 5)
    with pytest.raises(ValueError):
        physical_density(np.zeros(5), g, 0.1)
    with pytest.raises(ValueError):
        physical_density(np.ones(4), g, 0.1)
