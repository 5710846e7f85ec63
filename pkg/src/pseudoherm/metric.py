"""First-order metric operator ``eta_+ = 1 + Z eta1 + O(Z^2)``.

The closed form is

    <x|eta1|y> = i g(x + y) sign(x - y),   g(s) = (4 + 2|s| - |s+2| - |s-2|) / 8

with ``Q1 = -eta1``. The sixteen region-by-region formulas are kept as a
cross-check table, and :func:`eta1_spectral_oracle` rebuilds the kernel
from the biorthonormal eigenfunctions by numerical ``k``-integration.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .eigensystem import evaluate_many
from .exceptions import ConvergenceError, DomainError

INTERVALS = {
    "1": (-np.inf, -1.0),
    "-": (-1.0, 0.0),
    "+": (0.0, 1.0),
    "2": (1.0, np.inf),
}


def g_profile(s):
    """``(4 + 2|s| - |s+2| - |s-2|) / 8``, i.e. ``|s|/4`` for ``|s| <= 2`` and 1/2 beyond."""
    s = np.asarray(s, dtype=float)
    out = (4.0 + 2.0 * np.abs(s) - np.abs(s + 2.0) - np.abs(s - 2.0)) / 8.0
    return out if out.ndim else float(out)


def g_profile_derivative(s):
    """Piecewise derivative ``g'(s) = (2 sign s - sign(s+2) - sign(s-2)) / 8``."""
    s = np.asarray(s, dtype=float)
    out = (2.0 * np.sign(s) - np.sign(s + 2.0) - np.sign(s - 2.0)) / 8.0
    return out if out.ndim else float(out)


def _as_complex(out):
    return out if np.ndim(out) else complex(out)


def eta1_kernel(x, y):
    """Regular ``O(Z)`` kernel ``i g(x+y) sign(x-y)``; zero on the diagonal."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    return _as_complex(1j * g_profile(x + y) * np.sign(x - y))


def q1_kernel(x, y):
    """``<x|Q1|y> = -<x|eta1|y>``."""
    return _as_complex(-np.asarray(eta1_kernel(x, y)))


@dataclass(frozen=True)
class Kernel:
    """Operator kernel ``delta_coeff(x) delta(x-y) + Z^order regular(x, y)``.

    The delta part is kept symbolic; only ``regular`` is ever sampled.
    """

    delta_coeff: Callable
    regular: Callable
    order_in_Z: int = 1
    name: str = ""

    def __call__(self, x, y):
        return self.regular(x, y)

    def matrix(self, grid) -> np.ndarray:
        """Regular part sampled on ``grid x grid`` (diagonal included as sampled)."""
        grid = np.asarray(grid, dtype=float)
        return np.asarray(self.regular(grid[:, None], grid[None, :]), dtype=complex)

    def is_hermitian(self, x, y, atol: float = 1e-14) -> bool:
        a = np.asarray(self.regular(x, y))
        b = np.asarray(self.regular(y, x))
        return bool(np.all(np.abs(a - np.conj(b)) <= atol))


ETA1 = Kernel(lambda x: np.ones_like(np.asarray(x, dtype=float)), eta1_kernel, 1, "eta1")
Q1 = Kernel(lambda x: np.zeros_like(np.asarray(x, dtype=float)), q1_kernel, 1, "Q1")


# -- block table --------------------------------------------------------------


def _tail(s):
    return 2.0 - s - np.abs(s + 2.0)


def _head(s):
    return 2.0 + s - np.abs(s - 2.0)


def _full(s):
    return 4.0 + 2.0 * np.abs(s) - np.abs(s + 2.0) - np.abs(s - 2.0)


# O(Z) coefficients of E_{mu,nu}(x, y), region by region
_BLOCKS = {
    ("1", "1"): lambda x, y: 0.5j * np.sign(x - y),
    ("-", "1"): lambda x, y: 0.125j * _tail(x + y),
    ("+", "1"): lambda x, y: 0.125j * _tail(x + y),
    ("2", "1"): lambda x, y: 0.125j * _full(x + y),
    ("1", "-"): lambda x, y: -0.125j * _tail(x + y),
    ("-", "-"): lambda x, y: -0.25j * np.sign(x - y) * (x + y),
    ("+", "-"): lambda x, y: 0.25j * np.abs(x + y),
    ("2", "-"): lambda x, y: 0.125j * _head(x + y),
    ("1", "+"): lambda x, y: -0.125j * _tail(x + y),
    ("-", "+"): lambda x, y: -0.25j * np.abs(x + y),
    ("+", "+"): lambda x, y: 0.25j * np.sign(x - y) * (x + y),
    ("2", "+"): lambda x, y: 0.125j * _head(x + y),
    ("1", "2"): lambda x, y: -0.125j * _full(x + y),
    ("-", "2"): lambda x, y: -0.125j * _head(x + y),
    ("+", "2"): lambda x, y: -0.125j * _head(x + y),
    ("2", "2"): lambda x, y: 0.5j * np.sign(x - y),
}

#: Region labels in the order used throughout.
BLOCK_LABELS = ("1", "-", "+", "2")


def _in_interval(v, label):
    lo, hi = INTERVALS[label]
    return np.all((v > lo) & (v < hi))


def block_kernel(mu: str, nu: str, x, y):
    """Literal ``O(Z)`` formula of the ``(mu, nu)`` block.

    Raises
    ------
    DomainError
        If some ``x`` is outside ``I_mu`` or some ``y`` outside ``I_nu``.
    """
    if (mu, nu) not in _BLOCKS:
        raise DomainError(f"unknown block ({mu!r}, {nu!r})")
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if not (_in_interval(x, mu) and _in_interval(y, nu)):
        raise DomainError(f"point outside block I_{mu} x I_{nu}")
    return _as_complex(_BLOCKS[(mu, nu)](x, y))


class BlockTable:
    """The sixteen block formulas, indexable as ``table[mu, nu](x, y)``."""

    labels = BLOCK_LABELS

    def __getitem__(self, key):
        mu, nu = key
        return lambda x, y: block_kernel(mu, nu, x, y)

    def __iter__(self):
        return iter(_BLOCKS)

    def __len__(self):
        return len(_BLOCKS)

    @staticmethod
    def sample(mu: str, nu: str, n: int, rng, far: float = 6.0):
        """Draw ``n`` points from ``I_mu x I_nu`` (half-lines cut at ``far``)."""
        out = []
        for label in (mu, nu):
            lo, hi = INTERVALS[label]
            lo, hi = max(lo, -far), min(hi, far)
            out.append(rng.uniform(lo, hi, size=n))
        return out[0], out[1]


# -- spectral oracle -----------------------------------------------------------

#: Twenty ``(x, y)`` pairs touching all sixteen blocks, kinks of ``g`` included.
ORACLE_PAIRS = (
    (2.0, 1.5), (0.8, 0.1), (-3.0, -4.0), (0.5, -0.25), (-0.25, 0.5),
    (-1.5, 1.2), (0.3, -2.5), (-0.5, -2.0), (2.5, -0.7), (1.4, 0.6),
    (-0.6, -0.3), (-2.2, -1.6), (-2.5, -0.4), (3.5, -3.2), (-0.9, 0.9),
    (0.2, 1.7), (-1.7, 0.4), (-0.4, 2.5), (-0.1, -3.0), (0.7, -1.3),
)


@dataclass
class SpectralEstimate:
    value: complex
    per_eps: np.ndarray
    eps: tuple
    extrapolation_error: float


def _eta_integrand(k, x, y, Z):
    """``sum_a conj(phi_a(y)) phi_a(x)`` at wavenumbers ``k``."""
    total = 0.0
    for branch in (1, -1):
        fx = evaluate_many(k, Z, branch, x, operator="H-dagger")
        fy = evaluate_many(k, Z, branch, y, operator="H-dagger")
        total = total + np.conj(fy) * fx
    return total


def _damping_basis(eps, n, with_logs):
    eps = np.asarray(eps, dtype=float)
    if not with_logs:
        return np.vander(eps, n, increasing=True)
    cols = [np.ones_like(eps), eps * np.log(eps), eps, eps**2 * np.log(eps), eps**2, eps**3]
    return np.stack(cols[:n], axis=1)


def eta1_spectral_oracle(
    x: float,
    y: float,
    dZ: float = 1e-4,
    eps=(0.2, 0.1, 0.05, 0.025, 0.0125),
    dk: float | None = None,
    tol: float = 5e-3,
) -> SpectralEstimate:
    """First-order metric kernel from the spectral integral over ``k``.

    The ``Z``-derivative of ``int_0^inf sum_a conj(phi_a(y)) phi_a(x) dk`` is
    taken by a central difference; the ``k``-integral is damped by
    ``exp(-eps k)``, cut where the damping reaches ``e^-40`` and evaluated by
    the midpoint rule. The damping is removed by fitting
    ``c0 + c1 eps log(eps) + c2 eps + ...``: kinks of the kernel in ``x + y``
    make the integrand decay like ``1/k^2``, which produces the log terms.

    ``extrapolation_error`` is the gap to a pure polynomial fit.

    Raises
    ------
    ConvergenceError
        If that gap exceeds ``tol``.
    """
    if x == y:
        raise DomainError("the diagonal carries the delta term; need x != y")
    if len(eps) < 2:
        raise ValueError("need at least two damping levels")
    if dk is None:
        # resolve the fastest phase exp(i k (|x| + |y| + 2))
        dk = min(0.01, 0.1 / (abs(x) + abs(y) + 2.0))
    k = np.arange(dk / 2, 40.0 / min(eps), dk)
    G = (_eta_integrand(k, x, y, dZ) - _eta_integrand(k, x, y, -dZ)) / (2 * dZ)
    per_eps = np.array([np.sum((G * np.exp(-e * k))[k < 40.0 / e]) * dk for e in eps])
    n = len(eps)
    value = np.linalg.solve(_damping_basis(eps, n, True), per_eps)[0]
    poly = np.linalg.solve(_damping_basis(eps, n, False), per_eps)[0]
    err = float(abs(value - poly))
    if err > tol:
        raise ConvergenceError(f"damping extrapolation did not settle at ({x}, {y}): {err:.2e}")
    return SpectralEstimate(complex(value), per_eps, tuple(eps), err)
