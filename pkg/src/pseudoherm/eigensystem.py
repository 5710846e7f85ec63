"""Continuum eigenfunctions of ``H = p^2 + i Z nu(x)`` and of its adjoint.

For each wavenumber ``k > 0`` the eigenvalue ``k^2`` is doubly degenerate.
Solutions are plane waves on the four regions

    I_1 = (-inf, -1],  I_- = [-1, 0],  I_+ = [0, 1],  I_2 = [1, inf)

with wavenumbers ``k`` outside and ``k_-/k_+ = sqrt(k^2 -+ i Z)`` inside.
The branch label ``+1``/``-1`` selects the degenerate solution that reduces
to ``exp(+-ikx)/sqrt(2 pi)`` at ``Z = 0``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from .exceptions import ConvergenceError, DomainError

SQRT_2PI = np.sqrt(2.0 * np.pi)
SQRT_8PI = np.sqrt(8.0 * np.pi)

REGIONS = ("1", "-", "+", "2")


def inner_wavenumbers(k, Z):
    """Return ``(k_+, k_-)`` with the principal square root.

    Both stay close to the positive real axis as long as ``Z < k^2``.
    """
    k2 = np.asarray(k, dtype=float) ** 2
    return np.sqrt(k2 + 1j * Z), np.sqrt(k2 - 1j * Z)


def _L_minus(k, kp, km):
    return 0.5 * (np.cos(km) - 1j * km * np.sin(km) / k)


def _K_minus(k, kp, km):
    return 0.5 * np.sqrt(kp / km) * (km * np.cos(km) / k - 1j * np.sin(km))


@dataclass(frozen=True)
class EigenSolution:
    """Piecewise plane-wave eigenfunction.

    ``coeffs[j] = (A, B)`` for region ``REGIONS[j]`` so that the function is
    ``A exp(i q x) + B exp(-i q x)`` with ``q = wavenumbers[j]`` there.
    """

    k: float
    Z: float
    operator: str
    branch: int
    kplus: complex
    kminus: complex
    coeffs: np.ndarray = field(repr=False)

    @property
    def energy(self) -> float:
        return self.k**2

    @property
    def wavenumbers(self) -> tuple:
        if self.operator == "H":
            return (self.k, self.kminus, self.kplus, self.k)
        return (self.k, self.kplus, self.kminus, self.k)

    def piece(self, region: str, x, derivative: int = 0):
        """Evaluate the analytic formula of one region at any ``x``."""
        j = REGIONS.index(region)
        q = self.wavenumbers[j]
        A, B = self.coeffs[j]
        x = np.asarray(x, dtype=float)
        return (1j * q) ** derivative * A * np.exp(1j * q * x) + (
            -1j * q
        ) ** derivative * B * np.exp(-1j * q * x)

    def __call__(self, x, derivative: int = 0):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=complex)
        masks = (x <= -1.0, (x > -1.0) & (x <= 0.0), (x > 0.0) & (x <= 1.0), x > 1.0)
        for region, mask in zip(REGIONS, masks):
            if np.any(mask):
                out[mask] = self.piece(region, x[mask], derivative)
        return out if out.ndim else complex(out)

    evaluate = __call__

    def matching_residuals(self) -> np.ndarray:
        """Value and slope mismatches at x = -1, 0, 1 (six numbers)."""
        res = []
        for left, right, xb in (("1", "-", -1.0), ("-", "+", 0.0), ("+", "2", 1.0)):
            for d in (0, 1):
                res.append(abs(self.piece(left, xb, d) - self.piece(right, xb, d)))
        return np.array(res)

    def ode_residual(self, x):
        """``-f'' + V f - k^2 f`` with ``f''`` taken analytically on each piece.

        Each point is differentiated on the piece that owns it; the check is
        that every region's wavenumber solves its local dispersion relation.
        """
        x = np.atleast_1d(np.asarray(x, dtype=float))
        sign = 1.0 if self.operator == "H" else -1.0
        out = np.empty(x.shape, dtype=complex)
        for i, xi in enumerate(x):
            region = _region_of(xi)
            v = sign * 1j * self.Z * {"1": 0.0, "-": 1.0, "+": -1.0, "2": 0.0}[region]
            f = self.piece(region, xi)
            out[i] = -self.piece(region, xi, 2) + (v - self.k**2) * f
        return out


def _region_of(x: float) -> str:
    if x <= -1.0:
        return "1"
    if x <= 0.0:
        return "-"
    if x <= 1.0:
        return "+"
    return "2"


def _check_k(k):
    if not np.isfinite(k) or k <= 0:
        raise DomainError(f"wavenumber must be positive, got {k}")


def coefficient_arrays(k, Z: float, branch: int, operator: str = "H"):
    """Region coefficients for an array of wavenumbers.

    Returns ``(coeffs, wavenumbers)`` with shapes ``k.shape + (4, 2)`` and
    ``k.shape + (4,)``; see :class:`EigenSolution` for the layout.
    """
    k = np.asarray(k, dtype=float)
    if branch not in (1, -1):
        raise ValueError("branch must be +1 or -1")
    if operator not in ("H", "H-dagger"):
        raise ValueError(f"unknown operator {operator!r}")
    u, v = 1.0, float(branch)
    kp, km = inner_wavenumbers(k, Z)
    ratio = np.sqrt(kp / km)
    if operator == "H":
        A1 = np.exp(1j * k) / SQRT_2PI * (_L_minus(k, kp, km) * u + _K_minus(k, kp, km) * v)
        B1 = np.exp(-1j * k) / SQRT_2PI * (_L_minus(-k, kp, km) * u + _K_minus(-k, kp, km) * v)
        # (-1, 0) carries sqrt(k+/k-) and (0, 1) its inverse; the opposite
        # assignment breaks continuity of psi' at x = 0.
        inner = [(u + ratio * v, u - ratio * v), (u + v / ratio, u - v / ratio)]
        wn = [k, km, kp, k]
    else:
        # L_+(k) = L_-(-k)^*,  K_+(k) = -K_-(-k)^*
        A1 = np.exp(1j * k) / SQRT_2PI * (
            np.conj(_L_minus(-k, kp, km)) * u - np.conj(_K_minus(-k, kp, km)) * v
        )
        B1 = np.exp(-1j * k) / SQRT_2PI * (
            np.conj(_L_minus(k, kp, km)) * u - np.conj(_K_minus(k, kp, km)) * v
        )
        inner = [(u + v / ratio, u - v / ratio), (u + ratio * v, u - ratio * v)]
        wn = [k, kp, km, k]
    coeffs = np.empty(k.shape + (4, 2), dtype=complex)
    coeffs[..., 0, 0], coeffs[..., 0, 1] = A1, B1
    coeffs[..., 1, 0], coeffs[..., 1, 1] = inner[0][0] / SQRT_8PI, inner[0][1] / SQRT_8PI
    coeffs[..., 2, 0], coeffs[..., 2, 1] = inner[1][0] / SQRT_8PI, inner[1][1] / SQRT_8PI
    # PT invariance: psi(x) = conj(psi(-x)) ties the right region to the left one
    coeffs[..., 3, 0], coeffs[..., 3, 1] = np.conj(A1), np.conj(B1)
    wavenumbers = np.stack(np.broadcast_arrays(*[np.asarray(w, dtype=complex) for w in wn]), axis=-1)
    return coeffs, wavenumbers


def evaluate_many(k, Z: float, branch: int, x: float, operator: str = "H"):
    """Eigenfunction values at a single point ``x`` for many wavenumbers."""
    coeffs, wn = coefficient_arrays(k, Z, branch, operator)
    j = REGIONS.index(_region_of(float(x)))
    q = wn[..., j]
    return coeffs[..., j, 0] * np.exp(1j * q * x) + coeffs[..., j, 1] * np.exp(-1j * q * x)


def _build(k, Z, branch, operator):
    _check_k(k)
    coeffs, _ = coefficient_arrays(k, Z, branch, operator)
    kp, km = inner_wavenumbers(k, Z)
    return EigenSolution(float(k), float(Z), operator, branch, complex(kp), complex(km), coeffs)


def build_psi(k: float, Z: float, branch: int) -> EigenSolution:
    """Eigenfunction of ``H`` with ``u = 1, v = branch``."""
    return _build(k, Z, branch, "H")


def build_phi(k: float, Z: float, branch: int) -> EigenSolution:
    """Eigenfunction of ``H^dagger`` with ``r = 1, s = branch``.

    Built from its own coefficient formulas; agrees with
    ``build_psi(k, -Z, branch)`` since ``H^dagger = H`` at ``-Z``.
    """
    return _build(k, Z, branch, "H-dagger")


def wronskian(f: EigenSolution, g: EigenSolution, x=2.0) -> complex:
    """``f g' - f' g``; constant in x for two solutions at the same energy."""
    return complex(f(x) * g(x, 1) - f(x, 1) * g(x))


# -- biorthonormality ---------------------------------------------------------


def _region_integral(lam, eps, region):
    """Integral of ``exp(i lam x - eps |x|)`` over one region, in closed form."""
    if region == "1":
        mu = 1j * lam + eps
        return np.exp(-mu) / mu
    if region == "2":
        mu = 1j * lam - eps
        return -np.exp(mu) / mu
    mu = 1j * lam + eps if region == "-" else 1j * lam - eps
    # int_{-1}^{0} e^{mu x} = (1 - e^{-mu})/mu ; int_0^1 e^{mu x} = (e^{mu} - 1)/mu
    z = -mu if region == "-" else mu
    small = np.abs(z) < 1e-6
    zs = np.where(small, 1.0, z)
    val = np.where(small, 1.0 + z / 2 + z * z / 6, np.expm1(zs) / zs)
    return val


def damped_overlap(phi: EigenSolution, ls, branch: int, eps: float) -> np.ndarray:
    """``int exp(-eps|x|) conj(phi(x)) psi_l(x) dx`` for each wavenumber in ``ls``.

    ``psi_l`` is the ``H`` eigenfunction with the given branch at ``phi.Z``.
    """
    coeffs, wn = coefficient_arrays(np.asarray(ls, dtype=float), phi.Z, branch, "H")
    out = np.zeros(len(ls), dtype=complex)
    for j, region in enumerate(REGIONS):
        qc = np.conj(phi.wavenumbers[j])
        C, D = phi.coeffs[j]
        kap = wn[:, j]
        # conj(C e^{iqx} + D e^{-iqx}) = C* e^{-iq* x} + D* e^{iq* x}
        for c_phi, s_phi in ((np.conj(C), -1.0), (np.conj(D), 1.0)):
            for c_psi, s_psi in ((coeffs[:, j, 0], 1.0), (coeffs[:, j, 1], -1.0)):
                lam = s_psi * kap + s_phi * qc
                out += c_phi * c_psi * _region_integral(lam, eps, region)
    return out


def delta_weight(k: float, Z: float, a: int, b: int) -> float:
    """Coefficient of ``delta(k - l)`` in ``<phi_k,a|psi_l,b>``.

    Only the outer plane waves produce the singular part; each half line
    contributes ``pi`` times the product of matching amplitudes.
    """
    phi, psi = build_phi(k, Z, a), build_psi(k, Z, b)
    total = 0.0
    for j in (0, 3):
        total += np.conj(phi.coeffs[j, 0]) * psi.coeffs[j, 0] + np.conj(phi.coeffs[j, 1]) * psi.coeffs[j, 1]
    return float(np.real(np.pi * total))


@dataclass
class BiorthonormalityReport:
    k0: float
    Z: float
    width: float
    values: dict
    first_order: dict
    eps: tuple
    extrapolation_error: float

    def deviation(self, a: int, b: int) -> float:
        target = 1.0 if a == b else 0.0
        return abs(self.values[(a, b)] - target)


def _richardson(eps, vals):
    eps = np.asarray(eps, dtype=float)
    V = np.vander(eps, len(eps), increasing=True)
    coef = np.linalg.solve(V, np.asarray(vals))
    return coef[0]


def _smeared(k0, Z, a, b, width, eps, n_per_eps=40):
    phi = build_phi(k0, Z, a)
    lo = max(k0 - 8 * width, 1e-3)
    hi = k0 + 8 * width
    dl = min(eps, width) / n_per_eps
    ls = np.arange(lo, hi + dl / 2, dl)
    w = np.exp(-0.5 * ((ls - k0) / width) ** 2)
    ov = damped_overlap(phi, ls, b, eps)
    # the Gaussian window is normalised so that w(k0) = 1
    return trapezoid(w * ov, ls)


def biorthonormality_check(
    k0: float,
    width: float = 0.3,
    Z: float = 0.1,
    eps=(0.08, 0.04, 0.02, 0.01),
    dZ: float = 1e-4,
    tol: float = 5e-3,
) -> BiorthonormalityReport:
    """Smeared test of ``<phi_k,a|psi_l,b> = delta_ab delta(k - l)``.

    Computes ``int dl w(l) <phi_k0,a|psi_l,b>`` for a Gaussian window ``w``
    centred at ``k0`` (``w(k0) = 1``), with spatial damping ``exp(-eps|x|)``
    removed by Richardson extrapolation in ``eps``. Reports the full value at
    ``Z`` and its ``Z``-derivative at 0, which vanishes when the relation holds
    to first order.
    """
    _check_k(k0)
    if k0 - 4 * width <= 0:
        raise DomainError("window must resolve k0 (k0 > 4 * width)")
    values, first, spread = {}, {}, 0.0
    for a in (1, -1):
        for b in (1, -1):
            per_eps = [_smeared(k0, Z, a, b, width, e) for e in eps]
            est = _richardson(eps, per_eps)
            est_coarse = _richardson(eps[:-1], per_eps[:-1])
            spread = max(spread, abs(est - est_coarse))
            values[(a, b)] = est
            plus = _richardson(eps, [_smeared(k0, dZ, a, b, width, e) for e in eps])
            minus = _richardson(eps, [_smeared(k0, -dZ, a, b, width, e) for e in eps])
            first[(a, b)] = (plus - minus) / (2 * dZ)
    if spread > tol:
        raise ConvergenceError(f"damping extrapolation did not settle (spread {spread:.2e})")
    return BiorthonormalityReport(k0, Z, width, values, first, tuple(eps), spread)
