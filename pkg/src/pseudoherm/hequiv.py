"""The equivalent Hermitian Hamiltonian ``h = p^2 + Z^2 h2 + O(Z^3)``.

``h1 = i nu + [p^2, Q1]/2`` vanishes and ``h2 = (i/4)[eta1, nu]`` has the
real symmetric kernel

    <x|h2|y> = (1/4) g(x+y) sign(x-y) (nu(x) - nu(y)).

For fixed ``x`` this is piecewise linear in ``y`` with constant tails
``c_+- = -+nu(x)/8``, so its Fourier transform in ``y`` is available in closed
form up to a ``1/p`` pole with residue ``-i nu(x)/4`` (times ``(2 pi)^-1/2``).
Taylor coefficients of the pole-free remainder give ``omega_n(x)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial

import numpy as np

from .exceptions import ConvergenceError, DomainError
from .metric import eta1_kernel, g_profile, q1_kernel
from .params import BREAKPOINTS, PhysicalParams, nu

SQRT_2PI = np.sqrt(2.0 * np.pi)


# -- weak-form operator identities --------------------------------------------


def gaussian(x0: float, sigma: float, k0: float = 0.0):
    """Test function ``exp(-(x-x0)^2 / 2 sigma^2 + i k0 x)`` and its second derivative."""

    def f(x):
        return np.exp(-0.5 * ((x - x0) / sigma) ** 2 + 1j * k0 * x)

    def f2(x):
        u = -(x - x0) / sigma**2 + 1j * k0
        return (u * u - 1.0 / sigma**2) * f(x)

    return f, f2


def bump(a: float, b: float):
    """Smooth bump supported on ``(a, b)`` and its second derivative."""
    c, r = 0.5 * (a + b), 0.5 * (b - a)

    def f(x):
        t = (np.asarray(x, dtype=float) - c) / r
        u = 1.0 - t * t
        out = np.zeros_like(t)
        inside = u > 0
        out[inside] = np.exp(-1.0 / u[inside])
        return out

    def f2(x):
        t = (np.asarray(x, dtype=float) - c) / r
        u = 1.0 - t * t
        out = np.zeros_like(t)
        m = u > 1e-3  # exp(-1/u) underflows long before
        tm, um = t[m], u[m]
        out[m] = np.exp(-1.0 / um) * (4 * tm**2 / um**4 - 8 * tm**2 / um**3 - 2 / um**2) / r**2
        return out

    return f, f2


def default_battery():
    """Gaussians around the support of ``nu``, one with a phase."""
    return [
        gaussian(0.0, 0.5),
        gaussian(-0.6, 0.4),
        gaussian(0.7, 0.35),
        gaussian(0.2, 0.45, k0=1.5),
        gaussian(-1.0, 0.3),
    ]


@dataclass
class WeakFormReport:
    """Residuals of a weak-form identity over a battery of test-function pairs."""

    n_points: int
    residuals: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray

    @property
    def max_residual(self) -> float:
        return float(np.max(self.residuals))


def _trap_weights(x):
    w = np.full(len(x), x[1] - x[0])
    w[[0, -1]] *= 0.5
    return w


def _commutator_forms(battery, N: int, box: float, block: int = 512):
    """``<f|[p^2, Q1]|g>`` and ``-2i <f|nu g>`` for all battery pairs.

    Moves both derivatives onto the test functions:
    ``<f|[p^2,Q1]|g> = int int (-f''^* Q1 g + f^* Q1 g'')``.
    """
    x = np.linspace(-box, box, N + 1)
    w = _trap_weights(x)
    fs = np.array([f(x) for f, _ in battery])
    f2s = np.array([f2(x) for _, f2 in battery])
    # Q1 g and Q1 g'' by row blocks; Q1 = -i g(x+y) sign(x-y)
    Qg = np.empty_like(fs, dtype=complex)
    Qg2 = np.empty_like(fs, dtype=complex)
    for s in range(0, len(x), block):
        xb = x[s : s + block, None]
        Qb = q1_kernel(xb, x[None, :])
        Qg[:, s : s + block] = (Qb @ (w * fs).T).T
        Qg2[:, s : s + block] = (Qb @ (w * f2s).T).T
    lhs = -np.conj(f2s) @ (w * Qg).T + np.conj(fs) @ (w * Qg2).T
    nu_x = nu(x)
    rhs = -2j * np.conj(fs) @ (w * nu_x * fs).T
    norms = np.sqrt(np.real(np.sum(w * np.abs(fs) ** 2, axis=1)))
    scale = norms[:, None] * norms[None, :]
    return lhs, rhs, scale, fs, x, w


def check_p2_Q1_commutator(N: int = 4000, battery=None, box: float = 5.0) -> WeakFormReport:
    """Weak-form test of ``[p^2, Q1] = -2 i nu(x)``.

    Residuals are ``|lhs - rhs| / (||f|| ||g||)`` for every ordered pair of
    test functions; ``N`` is the number of trapezoid cells on ``[-box, box]``.
    Choose ``N`` so that ``-1, 0, 1`` are grid points.
    """
    battery = default_battery() if battery is None else battery
    lhs, rhs, scale, *_ = _commutator_forms(battery, N, box)
    return WeakFormReport(N, (np.abs(lhs - rhs) / scale).ravel(), lhs.ravel(), rhs.ravel())


def h1_is_zero(N: int = 4000, battery=None, box: float = 5.0) -> WeakFormReport:
    """Weak-form test of ``h1 = i nu + [p^2, Q1]/2 = 0``."""
    battery = default_battery() if battery is None else battery
    lhs, rhs, scale, *_ = _commutator_forms(battery, N, box)
    h1 = 0.5 * lhs - 0.5 * rhs  # i nu = -(1/2)(-2 i nu)
    return WeakFormReport(N, (np.abs(h1) / scale).ravel(), h1.ravel(), np.zeros(h1.size))


def refinement_slope(check, Ns=(1000, 2000, 4000), **kwargs) -> tuple[float, list]:
    """Log-log slope of the max residual against the grid step.

    Raises
    ------
    ConvergenceError
        If the residual does not decrease under refinement.
    """
    res = [check(N, **kwargs).max_residual for N in Ns]
    slope = -np.polyfit(np.log(Ns), np.log(res), 1)[0]
    if not res[-1] < res[0]:
        raise ConvergenceError(f"weak-form residual did not decrease: {res}")
    return float(slope), res


# -- h2 kernel ----------------------------------------------------------------


def h2_kernel(x, y):
    """``(1/32)(4 + 2|s| - |s+2| - |s-2|) sign(x-y) (nu(x) - nu(y))`` with ``s = x + y``."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    s = x + y
    out = (4.0 + 2.0 * np.abs(s) - np.abs(s + 2.0) - np.abs(s - 2.0)) / 32.0
    out = out * np.sign(x - y) * (nu(x) - nu(y))
    return out if np.ndim(out) else float(out)


def h2_commutator_kernel(x, y):
    """``(i/4)[eta1, nu]`` evaluated as ``(i/4) eta1(x, y)(nu(y) - nu(x))``."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    out = 0.25j * np.asarray(eta1_kernel(x, y)) * (nu(y) - nu(x))
    return out if np.ndim(out) else complex(out)


def h2_tail_constants(x):
    """Limits ``(c_-, c_+)`` of ``<x|h2|y>`` as ``y -> -inf, +inf``."""
    n = np.asarray(nu(x))
    return n / 8.0, -n / 8.0


def _y_breakpoints(x: float, extra=()) -> np.ndarray:
    pts = [-1.0, 0.0, 1.0, x, -x - 2.0, -x, -x + 2.0, *extra]
    return np.unique(np.asarray(pts, dtype=float))


def _cells(x: float, func, extra=()):
    """Linear pieces ``(a, b, alpha, beta)`` of ``func(y)`` between breakpoints."""
    bp = _y_breakpoints(x, extra)
    a, b = bp[:-1], bp[1:]
    keep = b - a > 1e-13
    a, b = a[keep], b[keep]
    t1, t2 = a + (b - a) / 3.0, a + 2.0 * (b - a) / 3.0
    r1, r2 = func(t1), func(t2)
    beta = (r2 - r1) / (t2 - t1)
    alpha = r1 - beta * t1
    return a, b, alpha, beta


def _linear_moments(a, b, alpha, beta, n: int):
    """``int_a^b (alpha + beta y) y^n dy`` summed over cells."""
    m0 = (b ** (n + 1) - a ** (n + 1)) / (n + 1)
    m1 = (b ** (n + 2) - a ** (n + 2)) / (n + 2)
    return float(np.sum(alpha * m0 + beta * m1))


def _cell_transform(a, b, alpha, beta, p):
    """``int_a^b (alpha + beta y) exp(i p y) dy`` for complex ``p``, summed over cells."""
    p = complex(p)
    if abs(p) * max(np.max(np.abs(a)), np.max(np.abs(b)), 1.0) < 1e-2:
        # Taylor series; 12 terms give full double precision here
        return sum((1j * p) ** n / factorial(n) * _linear_moments(a, b, alpha, beta, n) for n in range(14))
    ea, eb = np.exp(1j * p * a), np.exp(1j * p * b)
    i0 = (eb - ea) / (1j * p)
    i1 = (b * eb - a * ea) / (1j * p) + (eb - ea) / p**2
    return complex(np.sum(alpha * i0 + beta * i1))


@dataclass
class MomentumRepr:
    """``<x|h2|p>`` split as ``(2 pi)^-1/2 [regular(p) + pole_residue / p]``."""

    x: float
    p: complex
    value: complex
    regular: complex
    pole_residue: complex


def h2_momentum_repr(x: float, p, eps: float = 0.0) -> MomentumRepr:
    """``(2 pi)^-1/2 int <x|h2|y> exp(i p y) dy`` in closed form.

    Finite cells are transformed exactly and undamped. The constant tails
    beyond the outermost breakpoints are damped by ``exp(-eps |y|)``; at
    ``eps = 0`` they are taken as the Abel limit, which
    leaves the explicit pole ``-i nu(x) / (4 p)``. The reported ``regular``
    part is the full bracket minus that pole and is entire in ``p``.
    """
    if eps < 0:
        raise ValueError("eps must be non-negative")
    x = float(x)
    p = complex(p)
    a, b, alpha, beta = _cells(x, lambda y: h2_kernel(x, y))
    lo, hi = a[0], b[-1]
    cm, cp = (float(c) for c in h2_tail_constants(x))
    inner = _cell_transform(a, b, alpha, beta, p)
    residue = 1j * (cp - cm)
    if eps > 0:
        tails = cp * np.exp((1j * p - eps) * hi) / (eps - 1j * p) + cm * np.exp((1j * p + eps) * lo) / (
            1j * p + eps
        )
        value = (inner + tails) / SQRT_2PI
        return MomentumRepr(x, p, complex(value), complex(inner + tails), 0.0j)
    if p == 0:
        if residue != 0:
            raise DomainError("p = 0 is the pole; use the regular part")
        return MomentumRepr(x, p, inner / SQRT_2PI, inner, 0.0j)
    # (i/p) c+ e^{ip hi} - (i/p) c- e^{ip lo} = residue/p + entire remainder
    def phase_minus_one(z):
        return np.expm1(z) if abs(z) > 1e-8 else z + z * z / 2

    remainder = 1j * (cp * phase_minus_one(1j * p * hi) - cm * phase_minus_one(1j * p * lo)) / p
    regular = inner + remainder
    value = (regular + residue / p) / SQRT_2PI
    return MomentumRepr(x, p, complex(value), complex(regular), complex(residue))


# -- coefficient extraction -----------------------------------------------------

CONVENTIONS = ("origin", "symbol")


def _subtracted_kernel(x: float, convention: str):
    """``<x|h2|y>`` minus the step that carries the ``1/p`` pole.

    ``origin``: subtract ``-(nu(x)/8) sign(y)``, whose transform is the pole
    itself. ``symbol``: subtract ``-(nu(x)/8) sign(y - x)``, the same pole
    after the phase ``exp(-i p x)`` is stripped. Both leave a compactly
    supported function of ``y``.
    """
    c = float(nu(x)) / 8.0
    if convention == "origin":
        return lambda y: h2_kernel(x, y) + c * np.sign(y)
    if convention == "symbol":
        return lambda y: h2_kernel(x, y) + c * np.sign(y - x)
    raise ValueError(f"unknown convention {convention!r}")


def omega_at(x: float, n_max: int = 5, convention: str = "origin") -> np.ndarray:
    """``omega_0 .. omega_n_max`` at one point.

    ``omega_n = int R(y) (i u)^n / n! dy`` with ``R`` the pole-subtracted
    kernel and ``u = y`` (origin) or ``u = y - x`` (symbol).
    """
    x = float(x)
    R = _subtracted_kernel(x, convention)
    a, b, alpha, beta = _cells(x, R)
    if convention == "symbol":
        # shift to u = y - x: alpha + beta y = (alpha + beta x) + beta u
        a, b, alpha = a - x, b - x, alpha + beta * x
    out = np.empty(n_max + 1, dtype=complex)
    for n in range(n_max + 1):
        out[n] = (1j) ** n / factorial(n) * _linear_moments(a, b, alpha, beta, n)
    return out


def omega_cauchy(x: float, n_max: int = 5, radius: float = 1.0, n_nodes: int = 64) -> np.ndarray:
    """Origin-convention ``omega_n`` from a Cauchy integral of the regular transform.

    Independent of :func:`omega_at`: the Taylor coefficients of the entire
    function ``regular(p)`` are read off by FFT on a circle ``|p| = radius``.
    """
    theta = 2 * np.pi * np.arange(n_nodes) / n_nodes
    ps = radius * np.exp(1j * theta)
    vals = np.array([h2_momentum_repr(x, p).regular for p in ps])
    coef = np.fft.fft(vals) / n_nodes
    return coef[: n_max + 1] / radius ** np.arange(n_max + 1)


def _sided_derivatives(f, x: float, breaks, delta: float = 1e-5):
    """Left and right derivatives of ``f`` at ``x`` by differences of step ``delta``.

    Centred when no break is within ``2 delta``; otherwise second-order
    one-sided stencils that stay on one side of the break. On a break the
    stencil anchors at ``f(b -+ 1e-12)``, i.e. the one-sided limits.
    """
    near = [b for b in breaks if abs(x - b) < 2 * delta]
    if not near:
        c = (f(x + delta) - f(x - delta)) / (2 * delta)
        return c, c
    b = near[0]

    def back(x0):
        return (3 * f(x0) - 4 * f(x0 - delta) + f(x0 - 2 * delta)) / (2 * delta)

    def fwd(x0):
        return (-3 * f(x0) + 4 * f(x0 + delta) - f(x0 + 2 * delta)) / (2 * delta)

    if abs(x - b) <= 1e-12:
        return back(b - 1e-12), fwd(b + 1e-12)
    d = back(x) if x < b else fwd(x)
    return d, d


#: Points where omega_n(x) and a_n(x) jump.
JUMPS = BREAKPOINTS
SUPPORT = 3.0  # a_n vanish for |x| >= 3 (dimensionless)
#: Kinks of omega_n without a jump; differences must not straddle them.
KINKS = (-3.0, -2.0, 2.0, 3.0)


@dataclass
class CoeffTable:
    """Sampled ``omega_n``, ``a_n`` and, given physical parameters, ``alpha_n``.

    ``a`` holds the regular part of ``a_n = omega_2n + i omega'_2n+1``; the
    jumps of ``omega_2n+1`` at ``x = -1, 0, 1`` add ``delta_weights[n][b]
    delta(x - b)`` on top.
    """

    grid: np.ndarray
    omega: np.ndarray
    a: np.ndarray
    convention: str
    delta_weights: dict
    pole_residues: np.ndarray
    metadata: dict = field(default_factory=dict)

    @property
    def n_max(self) -> int:
        return self.omega.shape[0] - 1

    def alpha(self, params: PhysicalParams):
        """``(x_phys, alpha)`` with ``alpha_n(x) = 2m (L/2hbar)^(2n+2) a_n(2x/L)``."""
        n = np.arange(self.a.shape[0])[:, None]
        factor = 2 * params.m * (params.L / (2 * params.hbar)) ** (2 * (n + 1))
        return params.to_physical_x(self.grid), factor * self.a


def extract_coeffs(grid=None, n_max: int = 5, convention: str = "origin", tol: float = 1e-8) -> CoeffTable:
    """Build the coefficient table on ``grid`` (default 801 points on [-4, 4]).

    Raises
    ------
    DomainError
        If the grid leaves ``[-4, 4]``, is not uniform, or the reality and
        parity structure fails beyond ``tol`` (the offending points are
        listed in the message).
    """
    grid = np.linspace(-4.0, 4.0, 801) if grid is None else np.asarray(grid, dtype=float)
    if np.any(np.abs(grid) > 4.0 + 1e-12):
        raise DomainError("grid must lie in [-4, 4]")
    h = np.diff(grid)
    if not np.allclose(h, h[0], rtol=1e-9):
        raise DomainError("grid must be uniform")
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    omega = np.array([omega_at(x, n_max, convention) for x in grid]).T
    even, odd = omega[0::2], omega[1::2]
    bad_even = np.max(np.abs(even.imag), axis=0) > tol
    bad_odd = np.max(np.abs(odd.real), axis=0) > tol
    if np.any(bad_even | bad_odd):
        raise DomainError(f"reality structure fails at x = {grid[bad_even | bad_odd]}")
    n_a = (n_max + 1) // 2
    a = np.empty((n_a, len(grid)))
    weights, limits_a = {}, {n: {} for n in range(n_a)}
    one_sided = {b: (omega_at(b - 1e-12, n_max, convention), omega_at(b + 1e-12, n_max, convention)) for b in JUMPS}
    breaks = JUMPS + KINKS

    def odd_parts(x):
        return omega_at(x, n_max, convention)[1::2].imag

    # a_n = omega_2n + i omega'_2n+1 = omega_2n - (Im omega_2n+1)'
    for i, x in enumerate(grid):
        dl, dr = _sided_derivatives(odd_parts, float(x), breaks)
        even_l = even_r = omega[0::2, i].real
        on_jump = [b for b in JUMPS if abs(x - b) <= 1e-12]
        if on_jump:
            b = on_jump[0]
            even_l, even_r = one_sided[b][0][0::2].real, one_sided[b][1][0::2].real
            for n in range(n_a):
                limits_a[n][b] = (float(even_l[n] - dl[n]), float(even_r[n] - dr[n]))
        a[:, i] = 0.5 * ((even_l - dl) + (even_r - dr))[:n_a]
    for n in range(n_a):
        k = 2 * n + 1
        weights[n] = {b: float(-(one_sided[b][1][k] - one_sided[b][0][k]).imag) for b in JUMPS}
    for b in JUMPS:
        if b not in limits_a[0]:
            # break not on the grid: record the limits anyway
            dl, _ = _sided_derivatives(odd_parts, b, breaks)
            _, dr = _sided_derivatives(odd_parts, b, breaks)
            for n in range(n_a):
                limits_a[n][b] = (
                    float(one_sided[b][0][2 * n].real - dl[n]),
                    float(one_sided[b][1][2 * n].real - dr[n]),
                )
    residues = -0.25j * np.asarray(nu(grid))
    meta = {
        "max_imag_even": float(np.max(np.abs(even.imag))),
        "max_real_odd": float(np.max(np.abs(odd.real))),
        "max_parity_defect": float(np.max(np.abs(a - a[:, ::-1]))) if np.allclose(grid, -grid[::-1]) else None,
        "a_one_sided": limits_a,
    }
    return CoeffTable(grid, omega, a, convention, weights, residues, meta)


# -- interpolated coefficients, effective mass and potential -------------------



class CoefficientInterpolant:
    """Cubic splines of ``a_n`` on each smooth piece, exactly zero for ``|x| >= 3``.

    Pieces are split at ``-3, -1, 0, 1, 3`` so the jumps of ``a_n`` stay sharp;
    piece ends use the one-sided limits. Delta parts are not included.
    Works in dimensionless ``x``.
    """

    def __init__(self, table: CoeffTable, n: int):
        from scipy.interpolate import CubicSpline

        if "a_one_sided" not in table.metadata:
            raise ValueError("table lacks one-sided limits; build it with extract_coeffs")
        g, vals = table.grid, table.a[n]
        h = g[1] - g[0]
        if g[0] > -SUPPORT + 1e-9 or g[-1] < SUPPORT - 1e-9:
            raise DomainError("table grid must cover [-3, 3]")
        limits = table.metadata["a_one_sided"][n]
        edges = (-SUPPORT, *JUMPS, SUPPORT)
        self.edges = np.asarray(edges)
        self.pieces = []
        for lo, hi in zip(edges[:-1], edges[1:]):
            inside = (g > lo + h / 2) & (g < hi - h / 2)
            xs = np.concatenate([[lo], g[inside], [hi]])
            left = 0.0 if lo == -SUPPORT else limits[lo][1]
            right = 0.0 if hi == SUPPORT else limits[hi][0]
            ys = np.concatenate([[left], vals[inside], [right]])
            self.pieces.append(CubicSpline(xs, ys))
        self.delta_weights = table.delta_weights[n]

    def __call__(self, x, nu_deriv: int = 0):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        idx = np.searchsorted(self.edges, x, side="right") - 1
        for j, spl in enumerate(self.pieces):
            m = idx == j
            if np.any(m):
                out[m] = spl(x[m], nu_deriv)
        out[np.abs(x) >= SUPPORT] = 0.0
        return out if out.ndim else float(out)


def alpha_functions(table: CoeffTable, params: PhysicalParams, n_max: int = 2):
    """``alpha_n(x)`` for physical ``x`` as callables ``f(x, derivative=0)``."""
    out = []
    for n in range(n_max + 1):
        interp = CoefficientInterpolant(table, n)
        factor = 2 * params.m * (params.L / (2 * params.hbar)) ** (2 * (n + 1))
        scale = 1.0 / params.length_scale

        def alpha(x, derivative=0, interp=interp, factor=factor, scale=scale):
            xt = np.asarray(x, dtype=float) * scale
            return factor * scale**derivative * np.asarray(interp(xt, derivative))

        out.append(alpha)
    return out


def effective_mass(x_phys, params: PhysicalParams, table: CoeffTable | None = None):
    """``m / (1 + 2 m zeta^2 alpha_1(x))``.

    Raises
    ------
    DomainError
        Where the denominator is not positive.
    """
    table = extract_coeffs() if table is None else table
    alpha1 = alpha_functions(table, params, 1)[1]
    denom = 1.0 + 2.0 * params.m * params.zeta**2 * np.asarray(alpha1(x_phys))
    if np.any(denom <= 0):
        raise DomainError("effective mass is singular or negative here")
    return params.m / denom


def w_potential(x_phys, params: PhysicalParams, table: CoeffTable | None = None):
    """``zeta^2 alpha_0(x)``."""
    table = extract_coeffs() if table is None else table
    alpha0 = alpha_functions(table, params, 0)[0]
    return params.zeta**2 * np.asarray(alpha0(x_phys))


# -- operator-action check -------------------------------------------------------


def kernel_action(psi, grid):
    """``(h2 psi)(x) = int <x|h2|y> psi(y) dy`` by trapezoid quadrature."""
    grid = np.asarray(grid, dtype=float)
    w = _trap_weights(grid)
    out = np.empty(len(grid), dtype=complex)
    for s in range(0, len(grid), 512):
        K = h2_kernel(grid[s : s + 512, None], grid[None, :])
        out[s : s + 512] = K @ (w * psi)
    return out


def _spectral_power(f, h, power):
    """``p^power f`` with ``p = -i d/dx`` on the periodic box, by FFT."""
    k = 2 * np.pi * np.fft.fftfreq(len(f), d=h)
    return np.fft.ifft(k**power * np.fft.fft(f))


def truncated_action(psi, grid, table: CoeffTable, n_trunc: int = 2):
    """``(1/2) sum_{n <= n_trunc} {a_n, p^2n} psi`` with the regular ``a_n``.

    ``a_n`` is taken from the table at coincident nodes (zero beyond it);
    powers of ``p`` are applied spectrally, so the grid must be uniform and
    ``psi`` negligible at the box ends.
    """
    grid = np.asarray(grid, dtype=float)
    h = grid[1] - grid[0]
    out = np.zeros(len(grid), dtype=complex)
    for n in range(n_trunc + 1):
        a = np.interp(grid, table.grid, table.a[n], left=0.0, right=0.0)
        out += 0.5 * (a * _spectral_power(psi, h, 2 * n) + _spectral_power(a * psi, h, 2 * n))
    return out


@dataclass
class ActionReport:
    sigma: float
    p0: float
    relative_error: float
    kernel_norm: float
    truncated_norm: float


def operator_action_check(
    sigma: float = 2.0,
    p0: float = 0.0,
    x0: float = 0.0,
    n_trunc: int = 2,
    table: CoeffTable | None = None,
    box: float = 24.0,
    h: float = 0.01,
) -> ActionReport:
    """Relative L2 gap between the truncated symbol action and kernel quadrature.

    Uses the Gaussian packet ``exp(-(x-x0)^2 / 4 sigma^2 + i p0 x)``.
    """
    table = extract_coeffs() if table is None else table
    n = int(round(2 * box / h))
    grid = np.linspace(-box, box, n + 1)
    psi = np.exp(-((grid - x0) ** 2) / (4 * sigma**2) + 1j * p0 * grid)
    exact = kernel_action(psi, grid)
    approx = truncated_action(psi, grid, table, n_trunc)
    w = _trap_weights(grid)
    nk = np.sqrt(np.sum(w * np.abs(exact) ** 2))
    na = np.sqrt(np.sum(w * np.abs(approx) ** 2))
    err = np.sqrt(np.sum(w * np.abs(exact - approx) ** 2)) / nk
    return ActionReport(sigma, p0, float(err), float(nk), float(na))
