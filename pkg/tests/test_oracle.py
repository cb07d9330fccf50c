"""Dense reference implementations: statics, master equation, kets."""

import numpy as np
import pytest

from unravel import IsingParams, SubsystemSpec, dispersion, momentum_grid
from unravel import oracle
from unravel.errors import ConfigurationError


def test_two_site_spectrum():
    H = oracle.build_dense_hamiltonian(IsingParams(L=2, h=0.0))
    ev = np.sort(np.linalg.eigvalsh(H))
    assert np.allclose(ev, [-2.0, 0.0, 0.0, 2.0], atol=1e-12)


def test_ground_energy_matches_free_fermion_sum():
    p = IsingParams(L=8, h=1.0)
    e0, _ = oracle.dense_ground_state(p)
    expect = -0.5 * dispersion(p, momentum_grid(8)).sum()
    assert e0 == pytest.approx(expect, abs=1e-10)


def test_large_field_ground_state_is_polarized():
    p = IsingParams(L=6, h=50.0)
    _, ket = oracle.dense_ground_state(p)
    assert abs(ket[0]) > 1.0 - 1e-3  # essentially the vacuum
    assert oracle.dense_entropy(ket, SubsystemSpec(length=2)) < 1e-3


def test_size_caps():
    with pytest.raises(ConfigurationError):
        oracle.build_dense_hamiltonian(IsingParams(L=14, h=1.0))
    with pytest.raises(ConfigurationError):
        oracle.annihilation_operators(10)


def test_anticommutation_relations():
    ops = oracle.annihilation_operators(4)
    dim = 16
    for j in range(4):
        for k in range(4):
            anti = ops[j] @ ops[k] + ops[k] @ ops[j]
            assert np.abs(anti).max() < 1e-12
            mixed = ops[j] @ ops[k].T + ops[k].T @ ops[j]
            expect = np.eye(dim) if j == k else np.zeros((dim, dim))
            assert np.abs(mixed - expect).max() < 1e-12


def test_lindblad_unitary_limit_conserves_purity():
    p = IsingParams(L=4, h=1.0)
    H = oracle.build_dense_hamiltonian(p)
    rng = np.random.default_rng(0)
    v = rng.normal(size=16) + 1j * rng.normal(size=16)
    v /= np.linalg.norm(v)
    rho0 = np.outer(v, v.conj())
    rho = oracle.integrate_lindblad(rho0, H, [], 0.0, 1.0, 1e-3)
    purity = np.trace(rho @ rho).real
    assert purity == pytest.approx(1.0, abs=1e-10)
    # matches the von Neumann equation (exact propagation of the same ket)
    (ket,) = oracle.exact_evolution(H, v, [1.0])
    assert np.abs(rho - np.outer(ket, ket.conj())).max() < 1e-8


def test_pure_dephasing_is_analytic():
    L, gamma, t = 3, 0.8, 0.7
    dim = 2**3
    bits = oracle.occupation_bits(3)
    rng = np.random.default_rng(1)
    M = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho0 = M @ M.conj().T
    rho0 /= np.trace(rho0).real
    m_ops = [np.diag(bits[:, j]) for j in range(3)]
    rho = oracle.integrate_lindblad(rho0, np.zeros((dim, dim)), m_ops, gamma, t, 1e-3)
    # populations frozen, coherences damped by the squared occupation distance
    dist2 = ((bits[:, None, :] - bits[None, :, :]) ** 2).sum(axis=2)
    expect = rho0 * np.exp(-0.5 * gamma * t * dist2)
    assert np.abs(rho - expect).max() < 1e-9


def test_dissipator_insensitive_to_identity_shift():
    p = IsingParams(L=4, h=0.9)
    H = oracle.build_dense_hamiltonian(p)
    bits = oracle.occupation_bits(4)
    rho0 = np.zeros((16, 16), dtype=complex)
    rho0[1, 1] = rho0[1, 2] = rho0[2, 1] = rho0[2, 2] = 0.5
    m_n = [np.diag(bits[:, j]) for j in range(4)]
    rho_a = oracle.integrate_lindblad(rho0, H, m_n, 0.7, 0.5, 1e-3)
    rho_b = oracle.integrate_lindblad(
        rho0, H, [np.eye(16) + m for m in m_n], 0.7, 0.5, 1e-3
    )
    assert np.abs(rho_a - rho_b).max() < 1e-10


def test_gaussian_ket_simple_cases():
    assert np.array_equal(oracle.gaussian_ket(np.zeros((4, 4))), oracle.vacuum_ket(4))
    z = 0.6 - 0.3j
    Z = np.array([[0.0, z], [-z, 0.0]])
    ket = oracle.gaussian_ket(Z)
    norm = np.sqrt(1.0 + abs(z) ** 2)
    expect = np.zeros(4, dtype=complex)
    expect[0] = 1.0 / norm
    expect[3] = z / norm  # |11> = c0+ c1+ |0> carries amplitude +Z_01
    assert abs(np.vdot(expect, ket)) == pytest.approx(1.0, abs=1e-12)
    assert ket[3] / ket[0] == pytest.approx(z, abs=1e-12)


def test_dense_entropy_product_and_bell():
    ket = oracle.vacuum_ket(4)
    assert oracle.dense_entropy(ket, SubsystemSpec(length=2)) == pytest.approx(0.0, abs=1e-12)
    bell = np.zeros(4, dtype=complex)
    bell[0] = bell[3] = 1.0 / np.sqrt(2.0)
    assert oracle.dense_entropy(bell, SubsystemSpec(length=1)) == pytest.approx(np.log(2))
    assert oracle.dense_renyi2(bell, SubsystemSpec(length=1)) == pytest.approx(np.log(2))


def test_dense_entropy_requires_leading_block():
    with pytest.raises(ValueError):
        oracle.dense_entropy(oracle.vacuum_ket(4), SubsystemSpec(length=2, offset=1))


def test_trace_and_hermiticity_preserved():
    p = IsingParams(L=4, h=1.2)
    H = oracle.build_dense_hamiltonian(p)
    bits = oracle.occupation_bits(4)
    m_ops = [np.diag(bits[:, j]) for j in range(4)]
    rho0 = np.outer(oracle.vacuum_ket(4), oracle.vacuum_ket(4).conj())
    rho = oracle.integrate_lindblad(rho0, H, m_ops, 1.5, 1.0, 1e-3)
    assert np.trace(rho).real == pytest.approx(1.0, abs=1e-10)
    assert np.abs(rho - rho.conj().T).max() < 1e-12
    ev = np.linalg.eigvalsh(rho)
    assert ev.min() > -1e-9


def test_dense_ensembles_converge_to_master_equation():
    """Both dense unravelings average to the same RK4 solution (3 sigma)."""
    from unravel import NoiseStream, TrajectoryConfig

    L, gamma, t, dt, n_traj = 4, 1.0, 1.0, 0.005, 600
    p = IsingParams(L=L, h=1.0)
    spec = SubsystemSpec(length=1)
    H = oracle.build_dense_hamiltonian(p)
    bits = oracle.occupation_bits(L)
    rho0 = np.outer(oracle.vacuum_ket(L), oracle.vacuum_ket(L).conj())
    m_ops = [np.diag(bits[:, j]) for j in range(L)]
    rho = oracle.integrate_lindblad(rho0, H, m_ops, gamma, t, dt / 10)
    n_ode = np.array([np.trace(rho @ m).real for m in m_ops])
    for unr, alpha, runner in (
        ("qsd", None, oracle.dense_qsd_trajectory),
        ("qj", 1.0, oracle.dense_qj_trajectory),
    ):
        cfg = TrajectoryConfig(
            unraveling=unr, gamma=gamma, alpha=alpha, t_max=t, seed=23, dt=dt,
            record_every=int(round(t / dt)),
        )
        finals = np.array(
            [runner(p, cfg, NoiseStream(cfg.seed, i), spec)[2][-1] for i in range(n_traj)]
        )
        mean = finals.mean(axis=0)
        sem = finals.std(axis=0, ddof=1) / np.sqrt(n_traj)
        z = (np.abs(mean - n_ode) / sem).max()
        assert z < 3.0, f"dense {unr} ensemble off the master equation: max z = {z:.2f}"


def test_dense_trajectories_unitary_limit():
    p = IsingParams(L=4, h=1.0)
    spec = SubsystemSpec(length=1)
    from unravel import NoiseStream, TrajectoryConfig

    H = oracle.build_dense_hamiltonian(p)
    cfg = TrajectoryConfig(unraveling="qsd", gamma=0.0, t_max=1.0, seed=0, dt=0.01, record_every=25)
    times, S, occ = oracle.dense_qsd_trajectory(p, cfg, NoiseStream(0, 0), spec)
    kets = oracle.exact_evolution(H, oracle.vacuum_ket(4), times)
    S_exact = np.array([oracle.dense_entropy(k, spec) for k in kets])
    assert np.abs(S - S_exact).max() < 1e-10

    cfg = TrajectoryConfig(
        unraveling="qj", gamma=0.0, alpha=1.0, t_max=1.0, seed=0, dt=0.01, record_every=25
    )
    times, S, occ = oracle.dense_qj_trajectory(p, cfg, NoiseStream(0, 0), spec)
    assert np.abs(S - S_exact).max() < 1e-10
    del occ
