"""Named runtime checks behind the ``validate`` and ``oracle`` commands.

Each check returns ``(name, ok, detail)``.  The fast suite exercises the
structural invariants of a build (matrix symmetries, dispersion, the
gamma=0 collapse of all steppers, canonical pairs, entropy bounds); the
oracle suite replays the dense cross-checks on small chains.
"""

from __future__ import annotations

import numpy as np

from . import oracle
from .entanglement import (
    SubsystemSpec,
    entanglement_entropy,
    majorana_covariance,
    renyi_entropy,
    state_entropies,
    subsystem_spectrum,
)
from .gaussian import (
    GaussianState,
    _restore_structure,
    canonical_defect,
    correlations,
    occupations,
    random_state,
)
from .trajectories import (
    NoiseStream,
    TrajectoryConfig,
    Unraveling,
    hamiltonian_step,
    jump_probabilities,
    run_trajectory,
)

# Checks look these up through the module so fault injection in tests (and
# debugging sessions) can swap implementations.
from . import ising


def _projector_defect(state):
    corr = correlations(state)
    L = corr.L
    g_full = np.block([[corr.G, corr.F], [corr.F.conj().T, np.eye(L) - corr.G.T]])
    return float(np.abs(g_full @ g_full - g_full).max())


def check_bdg_structure(L=8, h=0.7):
    H = ising.build_bdg(ising.IsingParams(L=L, h=h))
    tau = np.block([[np.zeros((L, L)), np.eye(L)], [np.eye(L), np.zeros((L, L))]])
    defects = {
        "A symmetric": np.abs(H.A - H.A.T).max(),
        "B antisymmetric": np.abs(H.B + H.B.T).max(),
        "Hermitian": np.abs(H.matrix - H.matrix.conj().T).max(),
        "particle-hole": np.abs(tau @ H.matrix @ tau + H.matrix.conj()).max(),
    }
    worst = max(defects, key=defects.get)
    ok = defects[worst] < 1e-12
    return "bdg-structure", ok, f"worst defect {defects[worst]:.2e} ({worst})"


def check_dispersion(sizes=(4, 8, 16), fields=(0.0, 0.5, 1.0, 2.0)):
    worst = 0.0
    for L in sizes:
        for h in fields:
            p = ising.IsingParams(L=L, h=h)
            H = ising.build_bdg(p)
            ev = np.sort(np.linalg.eigvalsh(2.0 * H.matrix))
            disp = ising.dispersion(p, ising.momentum_grid(L))
            expect = np.sort(np.concatenate([-disp, disp]))
            worst = max(worst, float(np.abs(ev - expect).max()))
    return "dispersion-match", worst < 1e-10, f"max eigenvalue mismatch {worst:.2e}"


def check_nh_gap():
    val = ising.nh_dispersion(4.0, np.pi / 2.0)
    re = abs(val.real)
    return "nh-gap-closure", re < 1e-12, f"|Re w(gamma=4, k=pi/2)| = {re:.2e}"


def check_gamma0_collapse(L=8, steps=40, dt=0.05):
    p = ising.IsingParams(L=L, h=1.0)
    spec = SubsystemSpec(length=L // 4)
    reference = None
    worst = 0.0
    for unr, alpha in ((Unraveling.QSD, None), (Unraveling.QUANTUM_JUMP, 1.0), (Unraveling.NON_HERMITIAN, 1.0)):
        cfg = TrajectoryConfig(
            unraveling=unr, gamma=0.0, alpha=alpha, t_max=steps * dt, seed=5, dt=dt, record_every=1
        )
        series = run_trajectory(cfg, p, spec)
        if reference is None:
            H = ising.build_bdg(p)
            state = ising.initial_state(p)
            exact = []
            for step in range(steps + 1):
                exact.append(state_entropies(state, spec)[0])
                state = hamiltonian_step(state, H, dt)
            reference = np.array(exact)
        worst = max(worst, float(np.abs(series.entropy - reference).max()))
    return "gamma0-collapse", worst < 1e-10, f"max deviation from unitary evolution {worst:.2e}"


def check_canonical_invariants(L=16, steps=200):
    from .trajectories import _make_stepper

    p = ising.IsingParams(L=L, h=1.0)
    worst_defect = 0.0
    worst_proj = 0.0
    for unr, alpha, dt in (
        (Unraveling.QSD, None, 0.05),
        (Unraveling.QUANTUM_JUMP, 1.0, None),  # default 1/(8 L gamma alpha) keeps sum(pi) <= 1
        (Unraveling.NON_HERMITIAN, np.sqrt(2) - 1, 0.05),
    ):
        cfg = TrajectoryConfig(
            unraveling=unr, gamma=1.0, alpha=alpha, t_max=1.0, seed=9, dt=dt
        ).resolved(L)
        stepper = _make_stepper(cfg, p)
        noise = NoiseStream(cfg.seed, 0)
        state = ising.initial_state(p)
        for step in range(1, steps + 1):
            state = stepper(state, noise)
            if step % 100 == 0:
                state = GaussianState.from_stacked(_restore_structure(state.stacked))
            worst_defect = max(worst_defect, max(canonical_defect(state)))
        worst_proj = max(worst_proj, _projector_defect(state))
    ok = worst_defect < 1e-9 and worst_proj < 1e-9
    return "canonical-invariants", ok, f"pair defect {worst_defect:.2e}, projector defect {worst_proj:.2e}"


def check_entropy_bounds(L=12, n_states=10, seed=2):
    rng = np.random.default_rng(seed)
    ell = L // 4
    worst = ""
    ok = True
    for _ in range(n_states):
        state = random_state(L, rng)
        corr = correlations(state)
        A = majorana_covariance(corr)
        spec_a = subsystem_spectrum(A, SubsystemSpec(length=ell))
        spec_b = subsystem_spectrum(A, SubsystemSpec(length=L - ell, offset=ell))
        S_a = entanglement_entropy(spec_a)
        S_b = entanglement_entropy(spec_b)
        H2 = renyi_entropy(spec_a, 2.0)
        H_half = renyi_entropy(spec_a, 0.5)
        if not (-1e-12 <= S_a <= ell * np.log(2) + 1e-9):
            ok, worst = False, f"entropy bound violated: S={S_a}"
        if abs(S_a - S_b) > 1e-8:
            ok, worst = False, f"pure-state symmetry violated: |S_A - S_B| = {abs(S_a - S_b):.2e}"
        if not (H2 <= S_a + 1e-10 and S_a <= H_half + 1e-10):
            ok, worst = False, "Renyi ordering violated"
    return "entropy-bounds", ok, worst or "bounds, S_A=S_B and Renyi ordering hold"


def check_jump_probabilities(L=8):
    p = ising.IsingParams(L=L, h=1.0)
    cfg = TrajectoryConfig(unraveling="qj", gamma=1.0, alpha=1.0, t_max=1.0, seed=0).resolved(L)
    pi = jump_probabilities(ising.initial_state(p), cfg)
    expect = cfg.gamma * cfg.dt
    ok = np.all(pi >= 0) and abs(pi.sum() - L * expect) < 1e-12
    return "jump-probabilities", bool(ok), f"vacuum pi_j = {pi[0]:.3e} (gamma dt = {expect:.3e})"


def check_initial_state(L=8):
    p = ising.IsingParams(L=L, h=1.0)
    state = ising.initial_state(p)
    n = occupations(state)
    S, _ = state_entropies(state, SubsystemSpec(length=L // 4))
    ok = np.abs(n).max() == 0.0 and abs(S) < 1e-12
    return "initial-state", bool(ok), f"max occupation {np.abs(n).max():.1e}, entropy {S:.1e}"


FAST_CHECKS = [
    check_bdg_structure,
    check_dispersion,
    check_nh_gap,
    check_initial_state,
    check_jump_probabilities,
    check_entropy_bounds,
    check_gamma0_collapse,
    check_canonical_invariants,
]

QUICK_SUBSET = [
    check_bdg_structure,
    check_dispersion,
    check_nh_gap,
    check_initial_state,
    check_jump_probabilities,
    check_entropy_bounds,
]


def run_fast_suite(quick: bool = False):
    """Run the invariant suite; yields (name, ok, detail).

    A check that raises counts as a failure of that property rather than
    aborting the rest of the suite.
    """
    for check in (QUICK_SUBSET if quick else FAST_CHECKS):
        name = check.__name__.removeprefix("check_").replace("_", "-")
        try:
            yield check()
        except Exception as exc:  # noqa: BLE001 - report, keep going
            yield name, False, f"raised {type(exc).__name__}: {exc}"


# ----------------------------------------------------------------------
# oracle cross-checks (dense references at small L)


def oracle_gamma0(L=8, t_max=3.0):
    p = ising.IsingParams(L=L, h=1.0)
    spec = SubsystemSpec(length=max(1, L // 4))
    cfg = TrajectoryConfig(unraveling="qsd", gamma=0.0, t_max=t_max, seed=1, dt=0.05, record_every=5)
    series = run_trajectory(cfg, p, spec)
    H = oracle.build_dense_hamiltonian(p)
    kets = oracle.exact_evolution(H, oracle.vacuum_ket(L), series.times)
    S = np.array([oracle.dense_entropy(k, spec) for k in kets])
    bits = oracle.occupation_bits(L)
    n = np.array([np.abs(k) ** 2 @ bits for k in kets])
    dev = max(np.abs(series.entropy - S).max(), np.abs(series.occupations - n).max())
    return "oracle-gamma0-unitarity", dev < 1e-8, f"max deviation {dev:.2e}"


def oracle_shared_noise(L=6, n_traj=3, t_max=2.0, dt=0.01):
    p = ising.IsingParams(L=L, h=1.0)
    spec = SubsystemSpec(length=max(1, L // 4))
    worst = 0.0
    for unr, alpha, dense_fn in (
        ("qsd", None, oracle.dense_qsd_trajectory),
        ("qj", 1.0, oracle.dense_qj_trajectory),
    ):
        cfg = TrajectoryConfig(unraveling=unr, gamma=1.0, alpha=alpha, t_max=t_max, seed=7, dt=dt, record_every=10)
        for idx in range(n_traj):
            series = run_trajectory(cfg, p, spec, traj_index=idx)
            _, S, _ = dense_fn(p, cfg, NoiseStream(cfg.seed, idx), spec)
            worst = max(worst, float(np.abs(series.entropy - S).max()))
    return "oracle-shared-noise", worst < 1e-6, f"max entropy deviation {worst:.2e}"


def oracle_nh(L=6, t_max=2.0):
    p = ising.IsingParams(L=L, h=1.0)
    spec = SubsystemSpec(length=max(1, L // 4))
    cfg = TrajectoryConfig(
        unraveling="nh", gamma=0.5, alpha=np.sqrt(2) - 1, t_max=t_max, seed=0, dt=0.05, record_every=5
    )
    series = run_trajectory(cfg, p, spec)
    _, S, _ = oracle.dense_nh_trajectory(p, cfg, spec)
    dev = float(np.abs(series.entropy - S).max())
    return "oracle-no-click", dev < 1e-7, f"max entropy deviation {dev:.2e}"


def oracle_lindblad(L=4, n_traj=400, t=1.0, dt=0.002, seed=11, gamma=1.0, hf=1.0):
    """Ensemble means of both unravelings against the master equation."""
    p = ising.IsingParams(L=L, h=hf)
    spec = SubsystemSpec(length=1)
    H = oracle.build_dense_hamiltonian(p)
    bits = oracle.occupation_bits(L)
    rho0 = np.outer(oracle.vacuum_ket(L), oracle.vacuum_ket(L).conj())
    m_n = [np.diag(bits[:, j]) for j in range(L)]
    m_shift = [np.eye(2**L) + m for m in m_n]
    rho = oracle.integrate_lindblad(rho0, H, m_n, gamma, t, dt / 10)
    rho_shift = oracle.integrate_lindblad(rho0, H, m_shift, gamma, t, dt / 10)
    shift_dev = float(np.abs(rho - rho_shift).max())
    n_ode = np.array([np.trace(rho @ m).real for m in m_n])

    details = [f"dissipator shift invariance {shift_dev:.2e}"]
    ok = shift_dev < 1e-9
    for unr, alpha in (("qsd", None), ("qj", 1.0)):
        cfg = TrajectoryConfig(
            unraveling=unr, gamma=gamma, alpha=alpha, t_max=t, seed=seed, dt=dt,
            record_every=int(round(t / dt)),
        )
        finals = np.array(
            [run_trajectory(cfg, p, spec, traj_index=i).occupations[-1] for i in range(n_traj)]
        )
        mean = finals.mean(axis=0)
        sem = finals.std(axis=0, ddof=1) / np.sqrt(n_traj)
        z = float((np.abs(mean - n_ode) / sem).max())
        details.append(f"{unr} max |z| = {z:.2f}")
        ok = ok and z < 3.0
    return "oracle-lindblad-consistency", ok, "; ".join(details)


def run_oracle_suite(L=4, n_traj=400, seed=11):
    yield oracle_gamma0()
    yield oracle_shared_noise()
    yield oracle_nh()
    yield oracle_lindblad(L=L, n_traj=n_traj, seed=seed)
