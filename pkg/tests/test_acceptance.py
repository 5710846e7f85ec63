"""Acceptance suite: ten criteria at their stated tolerances.

Each criterion prints one ``PASS``/``FAIL`` line. Criteria 6 and 7 are
expected to fail (see the README); they are kept at full strength.
Run directly with ``python3 tests/test_acceptance.py`` or through pytest.
"""
import numpy as np
import pytest

from pseudoherm.classical import DEFAULT_P0, ClassicalHamiltonian, phase_portrait
from pseudoherm.dynamics import scattering_run
from pseudoherm.eigensystem import build_phi, build_psi
from pseudoherm.hequiv import (
    SUPPORT,
    check_p2_Q1_commutator,
    effective_mass,
    extract_coeffs,
    h1_is_zero,
    h2_commutator_kernel,
    h2_kernel,
    operator_action_check,
    refinement_slope,
)
from pseudoherm.metric import BLOCK_LABELS, ORACLE_PAIRS, BlockTable, block_kernel, eta1_kernel, eta1_spectral_oracle
from pseudoherm.observables import (
    grid_commutator_correction,
    localized_gram_matrix,
    metric_matrix,
    momentum_matrix,
    observable_transform,
    pseudo_hermiticity_defect,
    uniform_grid,
)
from pseudoherm.params import PhysicalParams

SEED = 20240611
ZS = (0.05, 0.1, 0.2)


def _slope(xs, ys):
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


def criterion_1():
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for mu in BLOCK_LABELS:
        for nu in BLOCK_LABELS:
            x, y = BlockTable.sample(mu, nu, 100, rng)
            worst = max(worst, float(np.max(np.abs(block_kernel(mu, nu, x, y) - eta1_kernel(x, y)))))
    return worst < 1e-12, f"16 blocks x 100 points, max error {worst:.1e} (< 1e-12)"


def criterion_2():
    errs = [abs(eta1_spectral_oracle(x, y).value - eta1_kernel(x, y)) for x, y in ORACLE_PAIRS]
    worst = max(errs)
    return worst < 1e-3, f"{len(errs)} pairs over all 16 blocks, max error {worst:.1e} (< 1e-3)"


def criterion_3():
    rng = np.random.default_rng(SEED)
    x = np.linspace(-3, 3, 61)
    match = ode = 0.0
    for _ in range(50):
        k, Z = rng.uniform(0.2, 5.0), rng.uniform(0.0, 1.0)
        for b in (1, -1):
            for f in (build_psi(k, Z, b), build_phi(k, Z, b)):
                match = max(match, float(f.matching_residuals().max()))
                ode = max(ode, float(np.abs(f.ode_residual(x)).max()))
    Zs = np.array([1e-3, 2e-3, 4e-3, 8e-3])
    slopes = []
    for k in (0.5, 2.0, 4.0):
        for b in (1, -1):
            free = np.exp(1j * b * k * x) / np.sqrt(2 * np.pi)
            err = [np.abs(build_psi(k, Z, b)(x) - free).max() for Z in Zs]
            slopes.append(_slope(Zs, err))
    ok = match < 1e-10 and ode < 1e-10 and all(abs(s - 1) <= 0.1 for s in slopes)
    return ok, (
        f"matching {match:.1e}, ODE {ode:.1e} (< 1e-10); "
        f"Z->0 slopes {min(slopes):.3f}..{max(slopes):.3f} (1 +- 0.1)"
    )


def criterion_4():
    r_comm = check_p2_Q1_commutator(N=4000).max_residual
    r_h1 = h1_is_zero(N=4000).max_residual
    s_comm, _ = refinement_slope(check_p2_Q1_commutator)
    s_h1, _ = refinement_slope(h1_is_zero)
    ok = r_comm < 1e-4 and r_h1 < 1e-4 and s_comm >= 1.5 and s_h1 >= 1.5
    return ok, (
        f"[p^2,Q1]+2i nu residual {r_comm:.1e}, h1 residual {r_h1:.1e} at N=4000 (< 1e-4); "
        f"slopes {s_comm:.2f}, {s_h1:.2f} (>= 1.5)"
    )


def criterion_5():
    rng = np.random.default_rng(SEED)
    x, y = rng.uniform(-4, 4, 1000), rng.uniform(-4, 4, 1000)
    worst = float(np.max(np.abs(h2_kernel(x, y) - h2_commutator_kernel(x, y))))
    # [-1, 1] is closed: nu(+-1) = -+1/2, so the end points are not outside
    side = rng.choice([-1.0, 1.0], size=(2, 1000))
    xo, yo = side * np.nextafter(1.0, 2.0) + side * rng.uniform(0, 5, (2, 1000))
    support = float(np.max(np.abs(h2_kernel(xo, yo))))
    return worst < 1e-14 and support == 0.0, f"max gap {worst:.1e} (< 1e-14); outside-support max {support!r} (== 0)"


def criterion_6():
    t = extract_coeffs()
    g = t.grid
    out = np.abs(g) > SUPPORT
    even, odd = t.omega[0::2], t.omega[1::2]
    tol = 1e-8
    checks = {}
    checks["omega_even real"] = float(np.abs(even.imag).max()) < tol
    checks["omega_even zero outside"] = float(np.abs(even[:, out]).max()) < tol
    checks["omega_odd imaginary"] = float(np.abs(odd.real).max()) < tol
    # constants c_n (theta(x) - 1/2) outside, the same c_n on both sides
    step = np.where(g > 0, 0.5, -0.5)
    c = odd[:, out] / step[out]
    checks["omega_odd = c (theta - 1/2) outside"] = float(np.abs(c - c[:, :1]).max()) < tol
    checks["a_n even"] = float(np.abs(t.a - t.a[:, ::-1]).max()) < tol
    checks["a_n zero for |x| >= 3"] = float(np.abs(t.a[:, np.abs(g) >= SUPPORT]).max()) < tol
    amp = np.abs(t.a).max(axis=1)
    checks["max|a_n| decreasing"] = bool(amp[1] < amp[0] and amp[2] < amp[1])
    failed = [k for k, v in checks.items() if not v]
    detail = f"max|a_n| = {amp[0]:.4f}, {amp[1]:.4f}, {amp[2]:.4f}"
    if failed:
        detail += "; fails: " + ", ".join(failed)
    else:
        detail += "; reality, parity, support and decay all hold"
    return not failed, detail


def criterion_7():
    table = extract_coeffs()
    cases = [(2.0, 0.0), (2.0, 0.5), (2.0, -0.5), (3.0, 0.25)]
    errs = [operator_action_check(s, p, table=table).relative_error for s, p in cases]
    worst = max(errs)
    return worst < 0.05, f"relative L2 error over (sigma, p0) = {cases}: max {worst:.2e} (< 0.05)"


def criterion_8():
    g = uniform_grid(-5, 5, 401)
    dx, dp, dg = [], [], []
    for Z in ZS:
        eta = metric_matrix(g, Z)
        dx.append(pseudo_hermiticity_defect(observable_transform("x").matrix(g, Z), eta))
        o = momentum_matrix(g)
        dp.append(pseudo_hermiticity_defect(o + Z * grid_commutator_correction(o, g), eta))
        dg.append(np.linalg.norm(localized_gram_matrix(g, Z) - np.eye(len(g))))
    sx, sp, sg = _slope(ZS, dx), _slope(ZS, dp), _slope(ZS, dg)
    ok = all(abs(s - 2) <= 0.3 for s in (sx, sp, sg))
    return ok, f"slopes X {sx:.3f}, P {sp:.3f}, Gram {sg:.3f} (2 +- 0.3)"


def criterion_9():
    drifts = [scattering_run(Z)[1] for Z in ZS]
    s_eta = _slope(ZS, [d.eta_drift for d in drifts])
    s_l2 = _slope(ZS, [d.l2_change for d in drifts])
    ok = abs(s_eta - 2) <= 0.3 and abs(s_l2 - 1) <= 0.3
    return ok, f"eta-norm drift slope {s_eta:.3f} (2 +- 0.3), L2 change slope {s_l2:.3f} (1 +- 0.3)"


def criterion_10():
    params = PhysicalParams(m=0.5, hbar=1.0, L=2.0, zeta=1.0 / 3.0)
    table = extract_coeffs()
    x = np.linspace(-5, 5, 1001)
    m_eff = effective_mass(x, params, table)
    outside = np.abs(x) >= 1.5 * params.L
    free_outside = bool(np.all(m_eff[outside] == params.m))
    deviation = float(np.abs(m_eff[~outside] - params.m).max())
    H = ClassicalHamiltonian(params, table)
    portrait = phase_portrait(H)
    classes = dict(zip(DEFAULT_P0, portrait.classes))
    small = [classes[p] for p in DEFAULT_P0 if abs(p) <= 0.1]
    large = [classes[p] for p in DEFAULT_P0 if abs(p) >= 1.0]
    drift = max(t.energy_drift for t in portrait.trajectories)
    jump = 0.0
    for t in portrait.trajectories:
        both = (np.abs(t.x[:-1]) > 3) & (np.abs(t.x[1:]) > 3) & (np.sign(t.x[:-1]) == np.sign(t.x[1:]))
        if np.any(both):
            jump = max(jump, float(np.abs(np.diff(t.p)[both]).max()))
    ok = (
        free_outside
        and deviation > 1e-3
        and "closed" in small
        and "open" in large
        and drift <= 1e-6
        and jump == 0.0
    )
    n_closed, n_open = portrait.classes.count("closed"), portrait.classes.count("open")
    return ok, (
        f"m_eff = 1/2 outside: {free_outside}, max inside deviation {deviation:.3f}; "
        f"{n_closed} closed, {n_open} open; energy drift {drift:.1e} (<= 1e-6); "
        f"max |dp| for |x| > 3: {jump:.1e}"
    )


CRITERIA = {
    1: ("block/unified metric consistency", criterion_1),
    2: ("spectral oracle for the metric", criterion_2),
    3: ("eigensystem residuals and free limit", criterion_3),
    4: ("weak-form operator identities", criterion_4),
    5: ("h2 dual construction and support", criterion_5),
    6: ("coefficient structure", criterion_6),
    7: ("pseudo-differential action", criterion_7),
    8: ("pseudo-Hermiticity scaling", criterion_8),
    9: ("unitarity demonstration", criterion_9),
    10: ("classical phase portrait", criterion_10),
}


def report(n):
    name, fn = CRITERIA[n]
    ok, detail = fn()
    line = f"{'PASS' if ok else 'FAIL'} criterion {n:2d} ({name}): {detail}"
    print(line)
    return ok, line


SLOW = {2, 9, 10}


@pytest.mark.parametrize("n", [pytest.param(n, marks=pytest.mark.slow) if n in SLOW else n for n in sorted(CRITERIA)])
def test_criterion(n, record_property):
    ok, line = report(n)
    record_property("acceptance", line)
    assert ok, line


if __name__ == "__main__":
    results = [report(n)[0] for n in sorted(CRITERIA)]
    print(f"{sum(results)}/{len(results)} criteria pass")
