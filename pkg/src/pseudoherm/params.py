"""Parameter sets, the imaginary step potential, and unit conversions.

Everything downstream works in dimensionless variables::

    x~ = 2 x / L,   p~ = L p / (2 hbar),   Z = m L^2 zeta / (2 hbar^2),
    H~ = m L^2 H / (2 hbar^2)

and only the CLI converts back to physical units.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: Discontinuities of the potential in dimensionless position.
BREAKPOINTS = (-1.0, 0.0, 1.0)


def theta(x):
    """Heaviside step with ``theta(0) = 1/2``."""
    x = np.asarray(x, dtype=float)
    out = np.where(x > 0, 1.0, np.where(x < 0, 0.0, 0.5))
    return out if out.ndim else float(out)


def nu(x):
    """Step profile ``theta(x+1) + theta(x-1) - 2 theta(x)``.

    +1 on (-1, 0), -1 on (0, 1), 0 for |x| > 1 and at x = 0; +-1/2 at x = -+1.
    """
    x = np.asarray(x, dtype=float)
    out = theta(x + 1.0) + theta(x - 1.0) - 2.0 * theta(x)
    return out if np.ndim(out) else float(out)


def potential(x, Z):
    """Dimensionless potential ``i Z nu(x)``."""
    if Z < 0:
        raise ValueError(f"Z must be non-negative, got {Z}")
    return 1j * Z * np.asarray(nu(x))


@dataclass(frozen=True)
class PhysicalParams:
    """Mass, Planck constant, support width ``L`` and non-Hermiticity ``zeta``."""

    m: float = 0.5
    hbar: float = 1.0
    L: float = 2.0
    zeta: float = 1.0 / 3.0

    def __post_init__(self):
        for name in ("m", "hbar", "L"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if not self.zeta >= 0:
            raise ValueError(f"zeta must be non-negative, got {self.zeta}")

    # length / momentum / energy scales of the dimensionless problem
    @property
    def length_scale(self) -> float:
        return self.L / 2.0

    @property
    def momentum_scale(self) -> float:
        return 2.0 * self.hbar / self.L

    @property
    def energy_scale(self) -> float:
        return 2.0 * self.hbar**2 / (self.m * self.L**2)

    def scale(self) -> "ScaledParams":
        return ScaledParams(Z=self.m * self.L**2 * self.zeta / (2.0 * self.hbar**2))

    def to_dimless_x(self, x):
        return np.asarray(x, dtype=float) / self.length_scale

    def to_physical_x(self, x):
        return np.asarray(x, dtype=float) * self.length_scale

    def to_dimless_p(self, p):
        return np.asarray(p, dtype=float) / self.momentum_scale

    def to_physical_p(self, p):
        return np.asarray(p, dtype=float) * self.momentum_scale

    def to_dimless_energy(self, E):
        return np.asarray(E) / self.energy_scale

    def to_physical_energy(self, E):
        return np.asarray(E) * self.energy_scale

    def kernel_to_physical(self, K):
        """Map a delta-normalised operator kernel <x~|A|y~> to <x|A|y>.

        ``|x> = (2/L)^(1/2) |x~>`` on each side, so the kernel picks up one
        factor 2/L. Operators that themselves carry units (X, P, H) must be
        rescaled separately.
        """
        return np.asarray(K) / self.length_scale

    def kernel_to_dimless(self, K):
        return np.asarray(K) * self.length_scale


@dataclass(frozen=True)
class ScaledParams:
    """Dimensionless non-Hermiticity strength ``Z``."""

    Z: float

    def __post_init__(self):
        if not self.Z >= 0:
            raise ValueError(f"Z must be non-negative, got {self.Z}")

    def zeta(self, m: float, hbar: float, L: float) -> float:
        """Invert ``Z = m L^2 zeta / (2 hbar^2)`` for given m, hbar, L."""
        return 2.0 * hbar**2 * self.Z / (m * L**2)
