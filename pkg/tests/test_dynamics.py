import numpy as np
import pytest

from pseudoherm.dynamics import (
    EvolutionRun,
    apply_hamiltonian,
    eta_norm,
    evolve,
    gaussian_packet,
    l2_norm,
    mean_position,
    scattering_run,
    step,
)


@pytest.fixture
def run():
    g = np.linspace(-20, 20, 2001)
    return EvolutionRun(g, gaussian_packet(g, -6.0, 1.5, 1.5), 0.2)


def test_packet_normalised(run):
    assert l2_norm(run) == pytest.approx(1.0, abs=1e-12)
    assert mean_position(run) == pytest.approx(-6.0, abs=1e-9)


def test_free_evolution_is_unitary():
    g = np.linspace(-20, 20, 2001)
    r = EvolutionRun(g, gaussian_packet(g, 0.0, 1.0, 1.5), 0.0)
    evolve(r, 1.0, 1e-2)
    assert l2_norm(r) == pytest.approx(1.0, abs=1e-12)
    assert eta_norm(r) == l2_norm(r)


def test_free_packet_moves_at_group_velocity():
    # H = p^2 gives velocity 2 p0
    g = np.linspace(-30, 30, 3001)
    r = EvolutionRun(g, gaussian_packet(g, -5.0, 1.0, 2.0), 0.0)
    evolve(r, 2.0, 2e-3, record_every=100)
    assert mean_position(r) == pytest.approx(-1.0, abs=1e-2)


def test_time_reversal(run):
    psi0 = run.state.copy()
    for _ in range(50):
        step(run, 1e-2)
    for _ in range(50):
        step(run, -1e-2)
    np.testing.assert_allclose(run.state, psi0, atol=1e-11)
    assert run.t == pytest.approx(0.0, abs=1e-14)


def test_hamiltonian_action_on_plane_wave():
    g = np.linspace(-10, 10, 4001)
    r = EvolutionRun(g, np.exp(0.5j * g), 0.0)
    Hpsi = apply_hamiltonian(r)
    h = g[1] - g[0]
    # discrete Laplacian eigenvalue on the interior
    lam = 2 * (1 - np.cos(0.5 * h)) / h**2
    np.testing.assert_allclose(Hpsi[1:-1], lam * r.state[1:-1], atol=1e-10)


def test_eta_norm_is_real_and_positive(run):
    v = eta_norm(run)
    assert isinstance(v, float) and v > 0


def test_norm_log_layout(run):
    evolve(run, 0.1, 1e-2, record_every=5)
    log = np.array(run.norm_log)
    assert log.shape == (3, 4)
    np.testing.assert_allclose(log[:, 0], [0.0, 0.05, 0.1], atol=1e-12)


@pytest.mark.parametrize(
    "kwargs",
    [dict(grid=np.linspace(0, 1, 5), state=np.zeros(4), Z=0.1), dict(grid=np.linspace(0, 1, 5), state=np.zeros(5), Z=-1)],
)
def test_run_validation(kwargs):
    with pytest.raises(ValueError):
        EvolutionRun(**kwargs)


def test_nonuniform_grid_rejected():
    with pytest.raises(ValueError):
        EvolutionRun(np.array([0.0, 0.1, 0.3]), np.zeros(3), 0.1)


def test_evolve_needs_positive_step(run):
    with pytest.raises(ValueError):
        evolve(run, 1.0, 0.0)


def test_scattering_guards():
    with pytest.raises(ValueError, match="wavelength"):
        scattering_run(0.1, p0=20.0)
    with pytest.raises(ValueError, match="box edge"):
        scattering_run(0.1, box=12.0, t_end=1.0)


def test_l2_norm_changes_at_first_order():
    # a short run through the step; eta-drift is much smaller than the L2 change
    _, d = scattering_run(0.1, x0=-4.0, box=25.0, t_end=1.5)
    assert d.l2_change > 1e-3
    assert d.eta_drift < 0.1 * d.l2_change
