"""Gaussian frames: correlations, normalization, pairing form, snapshots."""

import numpy as np
import pytest

from unravel import (
    GaussianState,
    IsingParams,
    NotGenericGaussianError,
    SingularFrameError,
    StateCorruptionError,
    canonical_defect,
    correlations,
    ground_state,
    load_state,
    occupations,
    pairing_matrix,
    random_state,
    restore_canonical,
    save_state,
)
from unravel import oracle


def vacuum(L):
    return GaussianState(np.eye(L, dtype=complex), np.zeros((L, L), dtype=complex))


def occupied(L):
    return GaussianState(np.zeros((L, L), dtype=complex), np.eye(L, dtype=complex))


def test_vacuum_correlations():
    corr = correlations(vacuum(4))
    assert np.array_equal(corr.G, np.eye(4))
    assert np.array_equal(corr.F, np.zeros((4, 4)))


def test_occupied_correlations():
    corr = correlations(occupied(4))
    assert np.array_equal(corr.G, np.zeros((4, 4)))
    assert np.array_equal(corr.F, np.zeros((4, 4)))
    assert np.all(occupations(occupied(4)) == 1.0)


@pytest.mark.parametrize("seed", range(5))
def test_random_state_invariants(seed):
    from unravel.gaussian import CANONICAL_ATOL

    rng = np.random.default_rng(seed)
    state = random_state(6, rng)
    norm, antisym = canonical_defect(state)
    assert norm < CANONICAL_ATOL and antisym < CANONICAL_ATOL
    corr = correlations(state)
    assert np.abs(corr.G - corr.G.conj().T).max() < 1e-10
    ev = np.linalg.eigvalsh(corr.G)
    assert ev.min() > -1e-10 and ev.max() < 1 + 1e-10
    assert np.abs(corr.F + corr.F.T).max() < 1e-10
    n = occupations(state)
    assert 0.0 <= n.sum() <= 6.0


def test_correlations_match_dense_oracle():
    rng = np.random.default_rng(42)
    state = random_state(4, rng)
    ket = oracle.gaussian_ket(pairing_matrix(state))
    ops = oracle.annihilation_operators(4)
    corr = correlations(state)
    for j in range(4):
        for k in range(4):
            G_jk = np.vdot(ket, ops[j] @ ops[k].T @ ket)
            F_jk = np.vdot(ket, ops[j] @ ops[k] @ ket)
            assert corr.G[j, k] == pytest.approx(G_jk, abs=1e-9)
            assert corr.F[j, k] == pytest.approx(F_jk, abs=1e-9)


def test_ground_state_occupations_match_dense():
    p = IsingParams(L=8, h=1.0)
    gs = ground_state(p)
    n = occupations(gs)
    _, ket = oracle.dense_ground_state(p)
    bits = oracle.occupation_bits(8)
    n_dense = np.abs(ket) ** 2 @ bits
    assert np.abs(n - n_dense).max() < 1e-10
    assert np.abs(n - n.mean()).max() < 1e-10  # site-uniform


def test_pairing_matrix_vacuum_and_antisymmetry():
    assert np.array_equal(pairing_matrix(vacuum(4)), np.zeros((4, 4)))
    rng = np.random.default_rng(3)
    Z = pairing_matrix(random_state(6, rng))
    assert np.abs(Z + Z.T).max() < 1e-8


def test_pairing_matrix_round_trip():
    rng = np.random.default_rng(11)
    M = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    # L must be even for chain params but the pairing form itself is generic
    Z = (M - M.T) / 2.0
    Z = np.pad(Z, ((0, 1), (0, 1)))
    state = restore_canonical(GaussianState(np.eye(6, dtype=complex), Z.conj()))
    assert np.abs(pairing_matrix(state) - Z).max() < 1e-10


def test_pairing_matrix_reproduces_dense_ground_state():
    p = IsingParams(L=4, h=2.0)
    gs = ground_state(p)
    Z = pairing_matrix(gs)
    ket = oracle.gaussian_ket(Z)
    _, ket_exact = oracle.dense_ground_state(p)
    assert abs(np.vdot(ket_exact, ket)) > 1.0 - 1e-9


def test_pairing_matrix_rejects_filled_modes():
    with pytest.raises(NotGenericGaussianError):
        pairing_matrix(occupied(4))


def test_restore_canonical_idempotent():
    rng = np.random.default_rng(8)
    state = random_state(6, rng)
    again = restore_canonical(state)
    assert np.abs(again.stacked - restore_canonical(again).stacked).max() < 1e-14


def test_restore_canonical_removes_scale():
    rng = np.random.default_rng(9)
    state = random_state(6, rng)
    scaled = GaussianState(3.0 * state.U, 3.0 * state.V)
    fixed = restore_canonical(scaled)
    c0, c1 = correlations(state), correlations(fixed)
    assert np.abs(c0.G - c1.G).max() < 1e-12
    assert np.abs(c0.F - c1.F).max() < 1e-12


def test_restore_canonical_detects_rank_loss():
    U = np.eye(4, dtype=complex)
    U[:, 1] = U[:, 0]  # two identical annihilators: frame is singular
    with pytest.raises(SingularFrameError):
        restore_canonical(GaussianState(U, np.zeros((4, 4), dtype=complex)))


def test_correlations_reject_corrupt_state():
    state = vacuum(4)
    bad = GaussianState(2.0 * state.U, state.V)
    with pytest.raises(StateCorruptionError):
        correlations(bad)


def test_correlation_projector_property():
    rng = np.random.default_rng(21)
    for _ in range(5):
        state = random_state(8, rng)
        corr = correlations(state)
        g_full = np.block(
            [[corr.G, corr.F], [corr.F.conj().T, np.eye(8) - corr.G.T]]
        )
        assert np.abs(g_full @ g_full - g_full).max() < 1e-9


def test_snapshot_round_trip(tmp_path):
    rng = np.random.default_rng(5)
    state = random_state(6, rng)
    path = tmp_path / "state.gfst"
    save_state(state, path)
    loaded = load_state(path)
    assert np.array_equal(loaded.U, state.U)
    assert np.array_equal(loaded.V, state.V)
    raw = bytearray(path.read_bytes())
    assert raw[:4] == b"GFST"
    raw[:4] = b"XXXX"
    path.write_bytes(bytes(raw))
    with pytest.raises(ValueError, match="magic"):
        load_state(path)


def test_occupations_clip_band():
    state = vacuum(4)
    n = occupations(state)
    assert n.min() >= 0.0 and n.max() <= 1.0


def test_occupations_reject_out_of_band():
    # small enough frame defect to pass the canonical gate, large enough to
    # push an occupation below the -1e-10 band
    U = np.eye(4, dtype=complex) * (1.0 + 3e-7)
    bad = GaussianState(U, np.zeros((4, 4), dtype=complex))
    with pytest.raises(StateCorruptionError, match="occupations"):
        occupations(bad)
