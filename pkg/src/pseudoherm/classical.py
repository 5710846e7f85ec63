"""Pre-classical Hamiltonian ``H_c = p^2/2m + zeta^2 sum_n alpha_n(x) p^2n``.

This is the phase-space symbol of the equivalent Hermitian Hamiltonian
before any ``hbar -> 0`` limit, truncated at ``n = 2``. It equals the free
Hamiltonian for ``|x| >= 3L/2``.

The ``alpha_n`` jump at ``x = 0, +-L/2``, so ``H_c`` is smooth only piecewise.
Trajectories carry the index of the piece they live on; a step that would
leave the piece is cut at the break, where the momentum on the far side is
fixed by energy conservation (refraction) or the particle turns back
(reflection). Inside a piece the integrator is the implicit midpoint rule.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .exceptions import ConvergenceError
from .hequiv import JUMPS, SUPPORT, CoeffTable, CoefficientInterpolant, extract_coeffs
from .params import PhysicalParams


@dataclass(frozen=True)
class PhaseState:
    x_c: float
    p_c: float
    t: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.x_c) and np.isfinite(self.p_c) and np.isfinite(self.t)):
            raise ValueError("phase-space state must be finite")


@dataclass
class Trajectory:
    t: np.ndarray
    x: np.ndarray
    p: np.ndarray
    energy: np.ndarray
    events: list

    @property
    def energy_drift(self) -> float:
        E0 = self.energy[0]
        return float(np.max(np.abs(self.energy - E0)) / max(abs(E0), 1e-300))

    def final_state(self) -> PhaseState:
        return PhaseState(float(self.x[-1]), float(self.p[-1]), float(self.t[-1]))


class ClassicalHamiltonian:
    """``H_c(x, p)`` in physical units from a coefficient table.

    Parameters
    ----------
    params : PhysicalParams
    table : CoeffTable, optional
        Built with :func:`extract_coeffs` when omitted.
    truncation : int
        Highest ``n`` kept in ``sum alpha_n p^2n``.
    """

    def __init__(self, params: PhysicalParams, table: CoeffTable | None = None, truncation: int = 2):
        if truncation < 0:
            raise ValueError("truncation must be non-negative")
        table = extract_coeffs() if table is None else table
        if table.a.shape[0] <= truncation:
            raise ValueError("table has too few a_n for this truncation")
        self.params = params
        self.truncation = truncation
        s = params.length_scale
        self.edges = np.array([-SUPPORT, *JUMPS, SUPPORT]) * s
        self.n_pieces = len(self.edges) + 1  # free pieces at both ends
        interps = [CoefficientInterpolant(table, n) for n in range(truncation + 1)]
        n = np.arange(truncation + 1)
        factor = 2 * params.m * (params.L / (2 * params.hbar)) ** (2 * (n + 1)) * params.zeta**2
        # per inner piece: knots in physical x and cubic coefficients (4, m, n)
        self._knots, self._coef = [], []
        for j in range(len(self.edges) - 1):
            spl = [it.pieces[j] for it in interps]
            x = spl[0].x * s
            # coefficients of powers of (x~ - knot~), x~ = x / s
            c = np.stack([sp.c for sp in spl], axis=-1)
            self._knots.append(x)
            self._coef.append(c * factor)
        self._scale = s

    # -- evaluation ------------------------------------------------------------

    def piece_of(self, x) -> np.ndarray:
        """0 for ``x < -3L/2``, inner pieces 1..4, 5 beyond ``3L/2``."""
        return np.searchsorted(self.edges, np.asarray(x, dtype=float), side="right")

    def _alphas(self, x, piece):
        """``zeta^2 alpha_n`` and ``zeta^2 alpha_n'`` at ``x`` on the given pieces."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        piece = np.broadcast_to(np.atleast_1d(piece), x.shape)
        nn = self.truncation + 1
        val = np.zeros(x.shape + (nn,))
        der = np.zeros(x.shape + (nn,))
        for j, (knots, c) in enumerate(zip(self._knots, self._coef)):
            m = piece == j + 1
            if not np.any(m):
                continue
            xm = x[m]
            i = np.clip(np.searchsorted(knots, xm, side="right") - 1, 0, len(knots) - 2)
            # work in the dimensionless local variable the spline was built on
            d = (xm - knots[i]) / self._scale
            c3, c2, c1, c0 = c[0, i], c[1, i], c[2, i], c[3, i]
            dd = d[:, None]
            val[m] = ((c3 * dd + c2) * dd + c1) * dd + c0
            der[m] = ((3 * c3 * dd + 2 * c2) * dd + c1) / self._scale
        return val, der

    def _eval(self, x, p, piece):
        """``(H, dH/dx, dH/dp)`` with the alphas of ``piece``."""
        p = np.atleast_1d(np.asarray(p, dtype=float))
        m = self.params.m
        val, der = self._alphas(x, piece)
        n = np.arange(self.truncation + 1)
        p2n = p[:, None] ** (2 * n)
        H = p**2 / (2 * m) + np.sum(val * p2n, axis=-1)
        Hx = np.sum(der * p2n, axis=-1)
        # d/dp p^2n = 2n p^(2n-1); the n = 0 term drops
        dp = np.zeros_like(p2n)
        dp[:, 1:] = 2 * n[1:] * p[:, None] ** (2 * n[1:] - 1)
        Hp = p / m + np.sum(val * dp, axis=-1)
        return H, Hx, Hp

    def hamiltonian(self, x_c, p_c):
        """``H_c(x, p)``; points on a break take the right-hand piece."""
        x = np.asarray(x_c, dtype=float)
        p = np.broadcast_to(np.asarray(p_c, dtype=float), x.shape)
        H = self._eval(x.ravel(), p.ravel(), self.piece_of(x.ravel()))[0].reshape(x.shape)
        return H if H.ndim else float(H)

    def effective_mass(self, x_c):
        """``m / (1 + 2 m zeta^2 alpha_1)`` (``m`` when the truncation drops ``alpha_1``)."""
        x = np.atleast_1d(np.asarray(x_c, dtype=float))
        if self.truncation < 1:
            return np.full(x.shape, self.params.m)
        val, _ = self._alphas(x, self.piece_of(x))
        return self.params.m / (1.0 + 2.0 * self.params.m * val[:, 1])

    def w(self, x_c):
        x = np.atleast_1d(np.asarray(x_c, dtype=float))
        return self._alphas(x, self.piece_of(x))[0][:, 0]

    # -- integration -----------------------------------------------------------

    def _midpoint(self, x0, p0, piece, dt, tol=1e-14, max_iter=100):
        """One implicit-midpoint step for arrays of states on fixed pieces."""
        _, Hx, Hp = self._eval(x0, p0, piece)
        x1, p1 = x0 + dt * Hp, p0 - dt * Hx
        for _ in range(max_iter):
            _, Hx, Hp = self._eval(0.5 * (x0 + x1), 0.5 * (p0 + p1), piece)
            xn, pn = x0 + dt * Hp, p0 - dt * Hx
            change = max(np.max(np.abs(xn - x1)), np.max(np.abs(pn - p1)))
            x1, p1 = xn, pn
            if change <= tol * (1.0 + max(np.max(np.abs(x1)), np.max(np.abs(p1)))):
                return x1, p1
        raise ConvergenceError("implicit midpoint iteration failed; reduce dt")

    def _piece_bounds(self, piece):
        lo = np.concatenate([[-np.inf], self.edges])[piece]
        hi = np.concatenate([self.edges, [np.inf]])[piece]
        return lo, hi

    def _cross(self, x0, p0, piece, dt, events, t0):
        """Advance one trajectory by ``dt``, resolving break crossings exactly."""
        remaining = dt
        for _ in range(16):
            x1, p1 = self._midpoint(np.array([x0]), np.array([p0]), np.array([piece]), remaining)
            x1, p1 = float(x1[0]), float(p1[0])
            lo, hi = self._piece_bounds(piece)
            if lo <= x1 <= hi:
                return x1, p1, piece
            b = hi if x1 > hi else lo

            def gap(tau):
                xt, _ = self._midpoint(np.array([x0]), np.array([p0]), np.array([piece]), tau)
                return float(xt[0]) - b

            tau = brentq(gap, 0.0, remaining, xtol=1e-15, rtol=4 * np.finfo(float).eps)
            _, pb = self._midpoint(np.array([x0]), np.array([p0]), np.array([piece]), tau)
            pb = float(pb[0])
            E = float(self._eval(np.array([b]), np.array([pb]), np.array([piece]))[0][0])
            other = piece + 1 if b == hi else piece - 1
            q = self._solve_p2(b, other, E, pb**2)
            t_hit = t0 + dt - remaining + tau
            if q is None:
                events.append(("reflect", t_hit, b))
                x0, p0 = b, -pb
            else:
                events.append(("refract", t_hit, b))
                x0, p0, piece = b, float(np.sign(pb) * np.sqrt(q)), other
            remaining -= tau
            if remaining <= 0:
                return x0, p0, piece
        raise ConvergenceError("too many break crossings in one step; reduce dt")

    def _solve_p2(self, b, piece, E, q_ref):
        """Non-negative root ``q = p^2`` of ``H_piece(b, p) = E`` closest to ``q_ref``."""
        val, _ = self._alphas(np.array([b]), np.array([piece]))
        coeffs = val[0].copy()
        coeffs[0] -= E
        if len(coeffs) > 1:
            coeffs[1] += 1.0 / (2 * self.params.m)
        else:
            coeffs = np.append(coeffs, 1.0 / (2 * self.params.m))
        roots = np.roots(coeffs[::-1]) if np.any(coeffs[2:]) else np.array([-coeffs[0] / coeffs[1]])
        roots = roots[np.abs(np.imag(roots)) < 1e-12].real
        roots = roots[roots >= 0]
        if roots.size == 0:
            return None
        return float(roots[np.argmin(np.abs(roots - q_ref))])

    def integrate_many(self, x0, p0, t_end: float, dt: float, record_every: int = 1):
        """Integrate a batch of initial conditions; returns a list of :class:`Trajectory`."""
        if not dt > 0 or not t_end > 0:
            raise ValueError("dt and t_end must be positive")
        x = np.array(x0, dtype=float, ndmin=1)
        p = np.array(p0, dtype=float, ndmin=1)
        piece = self.piece_of(x)
        n_steps = int(np.ceil(t_end / dt - 1e-12))
        n_rec = n_steps // record_every + 1
        X = np.empty((n_rec, len(x)))
        P = np.empty_like(X)
        E = np.empty_like(X)
        T = np.arange(n_rec) * dt * record_every
        events = [[] for _ in x]
        X[0], P[0] = x, p
        E[0] = self._eval(x, p, piece)[0]
        lo, hi = self._piece_bounds(piece)
        for step in range(1, n_steps + 1):
            x1, p1 = self._midpoint(x, p, piece, dt)
            out = (x1 < lo) | (x1 > hi)
            for i in np.flatnonzero(out):
                x1[i], p1[i], piece[i] = self._cross(x[i], p[i], piece[i], dt, events[i], (step - 1) * dt)
            if np.any(out):
                lo, hi = self._piece_bounds(piece)
            x, p = x1, p1
            if step % record_every == 0:
                r = step // record_every
                X[r], P[r] = x, p
                E[r] = self._eval(x, p, piece)[0]
        return [Trajectory(T, X[:, i], P[:, i], E[:, i], events[i]) for i in range(len(x))]

    def integrate(self, initial: PhaseState, t_end: float, dt: float, record_every: int = 1) -> Trajectory:
        traj = self.integrate_many([initial.x_c], [initial.p_c], t_end, dt, record_every)[0]
        traj.t = traj.t + initial.t
        return traj


# -- classification and portraits ---------------------------------------------


def classify(traj: Trajectory, region: float, return_tol: float = 1e-2) -> str:
    """Label an orbit ``open``, ``closed`` or ``undetermined``.

    ``open`` once it is outside ``(-region, region)`` and moving outward, since
    the motion is free from then on. ``closed`` if it crosses its starting
    section ``x = x0`` again in the initial direction with the initial
    momentum (linear interpolation between samples).
    """
    x, p = traj.x, traj.p
    if np.any((np.abs(x) > region) & (np.sign(x) == np.sign(p))):
        return "open"
    x0, p0 = x[0], p[0]
    s = np.sign(p0) if p0 != 0 else 1.0
    d = s * (x - x0)
    cross = np.flatnonzero((d[:-1] < 0) & (d[1:] >= 0))
    for i in cross:
        f = d[i] / (d[i] - d[i + 1])
        p_hit = p[i] + f * (p[i + 1] - p[i])
        if abs(p_hit - p0) <= return_tol * max(abs(p0), 1e-12):
            return "closed"
    return "undetermined"


@dataclass
class Portrait:
    trajectories: list
    initial: list
    classes: list


_P_MAG = (0.025, 0.05, 0.075, 0.1, 0.125, 0.15, 0.2, 0.3, 0.5, 0.75, 1.0, 1.5, 2.0)
DEFAULT_P0 = tuple(-v for v in _P_MAG[::-1]) + _P_MAG


def phase_portrait(
    H: ClassicalHamiltonian,
    initial=None,
    t_end: float = 40.0,
    dt: float = 1e-3,
    record_every: int = 10,
) -> Portrait:
    """Trajectories and closed/open labels for a list of ``(x0, p0)``.

    The default set starts at ``x0 = 0`` with ``|p0|`` from 0.025 to 2, denser
    at small momenta where the orbits close.
    """
    if initial is None:
        initial = [(0.0, p) for p in DEFAULT_P0]
    xs, ps = zip(*initial)
    trajs = H.integrate_many(xs, ps, t_end, dt, record_every)
    region = 1.5 * H.params.L
    classes = [classify(t, region) for t in trajs]
    return Portrait(trajs, list(initial), classes)


def closed_open_threshold(H: ClassicalHamiltonian, x0: float = 0.0, lo: float = 0.01, hi: float = 2.0,
                          t_end: float = 40.0, dt: float = 1e-3, iters: int = 20) -> float:
    """Bisect for the ``|p0|`` separating closed from open orbits started at ``x0``."""

    def label(p):
        return classify(H.integrate(PhaseState(x0, p), t_end, dt, record_every=5), 1.5 * H.params.L)

    if label(lo) != "closed" or label(hi) != "open":
        raise ConvergenceError("threshold not bracketed")
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if label(mid) == "closed":
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
