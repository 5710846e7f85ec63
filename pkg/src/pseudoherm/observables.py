"""Pseudo-Hermitian observables ``O = rho^-1 o rho`` to first order in ``Z``.

With ``rho^{+-1} = exp(-+Q/2)`` the similarity map reads
``O = o - (Z/2)[o, Q1] + O(Z^2)``. For ``o = x`` and ``o = p`` the commutator
is done by hand:

    [x, Q1](x, y) = (x - y) Q1(x, y) = -i g(x+y) |x - y|
    [p, Q1](x, y) = -i (d_x + d_y) Q1(x, y) = -2 g'(x+y) sign(x - y)

Kernels are discretised on a uniform grid as ``K(x_i, x_j) h``; the delta
function becomes the identity matrix.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .exceptions import ConvergenceError
from .metric import Kernel, eta1_kernel, g_profile, g_profile_derivative, q1_kernel
from .params import PhysicalParams


def x_kernel(x, y):
    """``O(Z)`` part of ``<x|X|y>``: ``(i/2) g(x+y) |x-y|``."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    out = 0.5j * g_profile(x + y) * np.abs(x - y)
    return out if np.ndim(out) else complex(out)


def p_kernel(x, y):
    """``O(Z)`` part of ``<x|P|y>``: ``g'(x+y) sign(x-y)`` (real)."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    out = g_profile_derivative(x + y) * np.sign(x - y)
    return out if np.ndim(out) else float(out)


def xi_kernel(x, y):
    """``O(Z)`` part of ``<x|xi^(y)>``: ``-(1/2) eta1(x, y)``."""
    out = -0.5 * np.asarray(eta1_kernel(x, y))
    return out if np.ndim(out) else complex(out)


# -- physical units -----------------------------------------------------------


def x_kernel_physical(x, y, params: PhysicalParams):
    """``O(zeta)`` part of ``<x|X|y>`` in physical units.

    Equals ``(i m zeta / 8 hbar^2)(2L + 2|x+y| - |x+y+L| - |x+y-L|)|x-y|``.
    """
    xt, yt = params.to_dimless_x(x), params.to_dimless_x(y)
    Z = params.scale().Z
    # X = (L/2) X~ and each delta-normalised argument carries 2/L
    return Z * np.asarray(x_kernel(xt, yt))


def p_kernel_physical(x, y, params: PhysicalParams):
    """``O(zeta)`` part of ``<x|P|y>`` in physical units."""
    xt, yt = params.to_dimless_x(x), params.to_dimless_x(y)
    Z = params.scale().Z
    return Z * params.momentum_scale * params.kernel_to_physical(p_kernel(xt, yt))


def xi_kernel_physical(x, y, params: PhysicalParams):
    """``O(zeta)`` part of ``<x|xi^(y)>`` in physical units."""
    xt, yt = params.to_dimless_x(x), params.to_dimless_x(y)
    Z = params.scale().Z
    return Z * params.kernel_to_physical(xi_kernel(xt, yt))


# -- grid discretisation --------------------------------------------------------


def uniform_grid(lo: float, hi: float, n: int) -> np.ndarray:
    if n < 3 or not hi > lo:
        raise ValueError("need n >= 3 points on a non-empty interval")
    return np.linspace(lo, hi, n)


def grid_step(grid) -> float:
    grid = np.asarray(grid, dtype=float)
    h = np.diff(grid)
    if not np.allclose(h, h[0], rtol=1e-10, atol=0):
        raise ValueError("grid must be uniform")
    return float(h[0])


def kernel_matrix(kernel: Callable, grid) -> np.ndarray:
    """``K(x_i, x_j) h`` for a regular kernel."""
    grid = np.asarray(grid, dtype=float)
    return np.asarray(kernel(grid[:, None], grid[None, :])) * grid_step(grid)


def momentum_matrix(grid) -> np.ndarray:
    """``-i d/dx`` by central differences with zero Dirichlet ends (Hermitian)."""
    n, h = len(grid), grid_step(grid)
    D = (np.eye(n, k=1) - np.eye(n, k=-1)) / (2 * h)
    return -1j * D


def position_matrix(grid) -> np.ndarray:
    return np.diag(np.asarray(grid, dtype=complex))


def metric_matrix(grid, Z: float) -> np.ndarray:
    """Discretised ``eta_+ = 1 + Z eta1``."""
    return np.eye(len(grid)) + Z * kernel_matrix(eta1_kernel, grid)


def rho_inverse_matrix(grid, Z: float) -> np.ndarray:
    """``rho^-1 = 1 + Z Q1 / 2``."""
    return np.eye(len(grid)) + 0.5 * Z * kernel_matrix(q1_kernel, grid)


def rho_matrix(grid, Z: float) -> np.ndarray:
    """``rho = 1 - Z Q1 / 2``."""
    return np.eye(len(grid)) - 0.5 * Z * kernel_matrix(q1_kernel, grid)


# -- the similarity map -------------------------------------------------------


@dataclass(frozen=True)
class ObservableKernel:
    """``O = base + Z correction`` with a symbolic base and a regular correction."""

    name: str
    base: str
    correction: Kernel

    def matrix(self, grid, Z: float) -> np.ndarray:
        """Discretised ``O`` on ``grid``."""
        if self.base == "x":
            o = position_matrix(grid)
        elif self.base == "p":
            o = momentum_matrix(grid)
        elif self.base == "identity":
            o = np.eye(len(grid), dtype=complex)
        else:
            raise ValueError(f"no matrix for base {self.base!r}")
        return o + Z * kernel_matrix(self.correction.regular, grid)


def _zero_kernel(x, y):
    return np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape, dtype=complex)


def grid_commutator_correction(o: np.ndarray, grid) -> np.ndarray:
    """``-(1/2)[o, Q1]`` on the grid, returned as a matrix (kernel times h)."""
    Q = kernel_matrix(q1_kernel, grid)
    return -0.5 * (o @ Q - Q @ o)


def observable_transform(o, grid=None, tol: float = 0.05):
    """``o -> o - (Z/2)[o, Q1]``.

    Parameters
    ----------
    o : {"x", "p", "identity"} or callable
        Symbolic base operator, or a function ``grid -> matrix`` giving the
        discretised Hermitian operator on any uniform grid.
    grid : array_like, optional
        Needed for the generic path.
    tol : float
        Generic path only: relative change of the correction allowed when the
        grid is coarsened by two.

    Returns
    -------
    ObservableKernel or ndarray
        Closed-form kernels for the symbolic bases, else the ``O(Z)``
        correction matrix on ``grid``.
    """
    if isinstance(o, str):
        if o == "x":
            return ObservableKernel("X", "x", Kernel(_zero_kernel, x_kernel, 1, "X"))
        if o == "p":
            return ObservableKernel("P", "p", Kernel(_zero_kernel, p_kernel, 1, "P"))
        if o == "identity":
            return ObservableKernel("1", "identity", Kernel(_zero_kernel, _zero_kernel, 1, "1"))
        raise ValueError(f"unknown base operator {o!r}")
    if grid is None:
        raise ValueError("generic operators need a grid")
    grid = np.asarray(grid, dtype=float)
    fine = grid_commutator_correction(o(grid), grid) / grid_step(grid)
    coarse_grid = grid[::2]
    coarse = grid_commutator_correction(o(coarse_grid), coarse_grid) / grid_step(coarse_grid)
    # compare kernels on the shared points, away from the box ends
    sub = fine[::2, ::2]
    m = max(2, len(coarse_grid) // 8)
    inner = (slice(m, -m), slice(m, -m))
    # RMS rather than max: jump lines of the kernel move by one cell
    scale = np.sqrt(np.mean(np.abs(sub[inner]) ** 2))
    if scale > 0:
        change = np.sqrt(np.mean(np.abs(sub[inner] - coarse[inner]) ** 2)) / scale
        if change > tol:
            raise ConvergenceError(f"commutator not resolved on this grid (change {change:.2e})")
    return fine * grid_step(grid)


def pseudo_hermiticity_defect(O: np.ndarray, eta: np.ndarray) -> float:
    """Frobenius norm of ``eta O - O^dagger eta``."""
    return float(np.linalg.norm(eta @ O - O.conj().T @ eta))


# -- localized states and density ---------------------------------------------


@dataclass(frozen=True)
class LocalizedState:
    """``<x|xi^(y)> = delta(x - y) + Z * regular(x)``."""

    center: float
    Z: float

    def regular(self, x):
        return xi_kernel(x, self.center)

    def __call__(self, x):
        """``O(Z)`` part times ``Z``; purely imaginary."""
        return self.Z * np.asarray(self.regular(x))


def localized_state(y: float, Z: float = 0.0) -> LocalizedState:
    return LocalizedState(float(y), float(Z))


def localized_gram_matrix(grid, Z: float) -> np.ndarray:
    """``(rho^-1)^dagger eta_+ rho^-1`` on the grid; identity up to ``O(Z^2)``."""
    R = rho_inverse_matrix(grid, Z)
    return R.conj().T @ metric_matrix(grid, Z) @ R


def eta_inner(phi, psi, grid, Z: float) -> complex:
    """``<phi|eta_+ psi>`` by trapezoid quadrature."""
    grid = np.asarray(grid, dtype=float)
    w = np.full(len(grid), grid_step(grid))
    w[[0, -1]] *= 0.5
    E = eta1_kernel(grid[:, None], grid[None, :])
    eta_psi = psi + Z * (E @ (w * psi))
    return complex(np.sum(w * np.conj(phi) * eta_psi))


def physical_density(psi, grid, Z: float, normalize: bool = True) -> np.ndarray:
    """``|<x|rho|psi>|^2 / <psi, psi>_+`` with ``rho = 1 + Z eta1 / 2``.

    With ``normalize`` the result is rescaled to unit integral, which removes
    the ``O(Z^2)`` mismatch of the truncated ``rho``.
    """
    psi = np.asarray(psi, dtype=complex)
    grid = np.asarray(grid, dtype=float)
    if psi.shape != grid.shape:
        raise ValueError("psi and grid must have the same shape")
    w = np.full(len(grid), grid_step(grid))
    w[[0, -1]] *= 0.5
    if not np.any(psi):
        raise ValueError("zero state has no density")
    E = eta1_kernel(grid[:, None], grid[None, :])
    rho_psi = psi + 0.5 * Z * (E @ (w * psi))
    norm = eta_inner(psi, psi, grid, Z).real
    rho_density = np.abs(rho_psi) ** 2 / norm
    if normalize:
        rho_density = rho_density / np.sum(w * rho_density)
    return rho_density
