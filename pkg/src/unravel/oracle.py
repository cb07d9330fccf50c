"""Brute-force references in the full 2^L Hilbert space.

Everything here exists to cross-check the Gaussian machinery at small L:
exact Schrodinger evolution, dense master-equation integration, stochastic
trajectories that consume the same noise streams as the frame-based
steppers, explicit construction of Gaussian kets from their pairing form,
and reduced-density-matrix entropies.

Basis convention: occupation states indexed by ``b``, bit ``j`` of ``b`` is
the occupation of site ``j``, and ``|b> = (c0^dag)^{n_0} (c1^dag)^{n_1} ...
|0>`` (creation operators in site order).  With that ordering a leading
contiguous block of sites factorizes as a plain tensor factor, so qubit-style
partial traces give the exact fermionic entropies.
"""

from __future__ import annotations

import numpy as np
from scipy.special import xlogy

from .entanglement import SubsystemSpec
from .errors import ConfigurationError, StateCorruptionError
from .ising import IsingParams
from .trajectories import NoiseStream, TrajectoryConfig, Unraveling, record_steps

__all__ = [
    "occupation_bits",
    "annihilation_operators",
    "build_dense_hamiltonian",
    "even_sector_indices",
    "dense_ground_state",
    "exact_evolution",
    "lindblad_rhs",
    "integrate_lindblad",
    "dense_qsd_trajectory",
    "dense_qj_trajectory",
    "dense_nh_trajectory",
    "gaussian_ket",
    "dense_entropy",
    "dense_renyi2",
    "vacuum_ket",
]

_STATIC_LMAX = 12
_STOCHASTIC_LMAX = 8


def _check_L(L: int, lmax: int):
    if L > lmax:
        raise ConfigurationError(f"dense oracle supports L <= {lmax}, got {L}")


def occupation_bits(L: int) -> np.ndarray:
    """(2^L, L) matrix with the occupation of each site in each basis state."""
    b = np.arange(2**L)
    return ((b[:, None] >> np.arange(L)) & 1).astype(float)


def _parity_below(L: int) -> np.ndarray:
    """(2^L, L) signs (-1)^(number of occupied sites i < j)."""
    bits = occupation_bits(L).astype(int)
    below = np.cumsum(bits, axis=1) - bits
    return (-1.0) ** below


def annihilation_operators(L: int) -> list[np.ndarray]:
    """Dense matrices of c_j in the ordered occupation basis."""
    _check_L(L, _STOCHASTIC_LMAX)
    dim = 2**L
    bits = occupation_bits(L).astype(int)
    signs = _parity_below(L)
    ops = []
    b = np.arange(dim)
    for j in range(L):
        occupied = bits[:, j] == 1
        rows = b[occupied] ^ (1 << j)
        cols = b[occupied]
        op = np.zeros((dim, dim))
        op[rows, cols] = signs[occupied, j]
        ops.append(op)
    return ops


def build_dense_hamiltonian(params: IsingParams) -> np.ndarray:
    """Quadratic fermion Hamiltonian with the even-sector boundary bond.

    Bulk bonds carry hopping and pairing amplitude -J; the boundary bond
    carries +J (antiperiodic), matching the frame-level matrix.  The field
    term is ``h sum_j (2 n_j - 1)``.  The matrix is built on the full Fock
    space; only the even-parity sector is physical.
    """
    L = params.L
    _check_L(L, _STATIC_LMAX)
    dim = 2**L
    J, h = params.J, params.h
    bits = occupation_bits(L).astype(int)
    signs = _parity_below(L)
    b = np.arange(dim)
    off = np.zeros((dim, dim))

    bonds = [(j, j + 1, -J) for j in range(L - 1)] + [(L - 1, 0, +J)]
    for j, k, amp in bonds:
        # hopping amp * c+_j c_k; the sign of c_k uses the source state, the
        # sign of c+_j the state with mode k already removed
        mask = (bits[:, k] == 1) & (bits[:, j] == 0)
        src = b[mask]
        mid = src ^ (1 << k)
        dst = mid ^ (1 << j)
        np.add.at(off, (dst, src), amp * signs[src, k] * signs[mid, j])
        # pairing amp * c+_j c+_k
        mask = (bits[:, k] == 0) & (bits[:, j] == 0)
        src = b[mask]
        mid = src ^ (1 << k)
        dst = mid ^ (1 << j)
        np.add.at(off, (dst, src), amp * signs[src, k] * signs[mid, j])

    H = off + off.T  # Hermitian conjugates of the bond terms
    H[b, b] += h * (2.0 * bits.sum(axis=1) - L)
    return H


def even_sector_indices(L: int) -> np.ndarray:
    bits = occupation_bits(L).astype(int)
    return np.where(bits.sum(axis=1) % 2 == 0)[0]


def dense_ground_state(params: IsingParams) -> tuple[float, np.ndarray]:
    """Even-sector ground energy and ket (embedded in the full Fock space)."""
    H = build_dense_hamiltonian(params)
    idx = even_sector_indices(params.L)
    H_even = H[np.ix_(idx, idx)]
    w, v = np.linalg.eigh(H_even)
    ket = np.zeros(2**params.L, dtype=complex)
    ket[idx] = v[:, 0]
    return float(w[0]), ket


def vacuum_ket(L: int) -> np.ndarray:
    ket = np.zeros(2**L, dtype=complex)
    ket[0] = 1.0
    return ket


def exact_evolution(H: np.ndarray, psi0: np.ndarray, times) -> list[np.ndarray]:
    """Exact kets ``exp(-i H t) psi0`` via one eigendecomposition."""
    w, v = np.linalg.eigh(H)
    coeff = v.conj().T @ psi0
    return [v @ (np.exp(-1j * w * t) * coeff) for t in np.atleast_1d(times)]


def lindblad_rhs(rho: np.ndarray, H: np.ndarray, m_ops, gamma: float) -> np.ndarray:
    """``d rho/dt = -i [H, rho] - gamma/2 sum_j [m_j, [m_j, rho]]``."""
    out = -1j * (H @ rho - rho @ H)
    for m in m_ops:
        mr = m @ rho
        rm = rho @ m
        out -= 0.5 * gamma * (m @ mr - mr @ m - m @ rm + rm @ m)
    return out


def integrate_lindblad(
    rho0: np.ndarray, H: np.ndarray, m_ops, gamma: float, t_final: float, step: float
) -> np.ndarray:
    """Fixed-step RK4 integration of the master equation.

    The step is refined to at most the requested value; the trace is
    monitored and drift beyond 1e-8 aborts.
    """
    n = max(1, int(np.ceil(t_final / step)))
    dt = t_final / n
    rho = rho0.astype(complex).copy()
    trace0 = np.trace(rho).real
    for _ in range(n):
        k1 = lindblad_rhs(rho, H, m_ops, gamma)
        k2 = lindblad_rhs(rho + 0.5 * dt * k1, H, m_ops, gamma)
        k3 = lindblad_rhs(rho + 0.5 * dt * k2, H, m_ops, gamma)
        k4 = lindblad_rhs(rho + dt * k3, H, m_ops, gamma)
        rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    drift = abs(np.trace(rho).real - trace0)
    if drift > 1e-8:
        raise StateCorruptionError(f"Lindblad integration trace drift {drift:.3e}")
    return rho


class _DenseRecorder:
    def __init__(self, L, subsys, dt):
        self.L = L
        self.subsys = subsys
        self.dt = dt
        self.bits = occupation_bits(L)
        self.times = []
        self.entropy = []
        self.occ = []

    def record(self, step, psi):
        self.times.append(step * self.dt)
        self.entropy.append(dense_entropy(psi, self.subsys))
        self.occ.append(np.abs(psi) ** 2 @ self.bits)


def _dense_trajectory(params, cfg, noise, subsys, step_fn):
    cfg = cfg.resolved(params.L)
    n_steps = int(round(cfg.t_max / cfg.dt))
    schedule = set(record_steps(n_steps, cfg.record_every).tolist())
    rec = _DenseRecorder(params.L, subsys, cfg.dt)
    psi = vacuum_ket(params.L)
    if 0 in schedule:
        rec.record(0, psi)
    for step in range(1, n_steps + 1):
        psi = step_fn(psi, noise)
        norm = np.linalg.norm(psi)
        if norm < 1e-12:
            raise StateCorruptionError(f"dense trajectory norm collapsed at step {step}")
        psi /= norm
        if step in schedule:
            rec.record(step, psi)
    return np.array(rec.times), np.array(rec.entropy), np.array(rec.occ)


def dense_qsd_trajectory(
    params: IsingParams,
    cfg: TrajectoryConfig,
    noise: NoiseStream,
    subsys: SubsystemSpec,
):
    """Trotterized diffusive trajectory on the full Hilbert space.

    Consumes the same Wiener draws as the frame stepper: one length-L normal
    vector per step, applied through ``exp(sum_j T_j n_j)`` with the drift
    evaluated after the Hamiltonian substep.
    """
    _check_L(params.L, _STOCHASTIC_LMAX)
    if Unraveling(cfg.unraveling) is not Unraveling.QSD:
        raise ConfigurationError("dense_qsd_trajectory requires a qsd config")
    cfg = cfg.resolved(params.L)
    H = build_dense_hamiltonian(params)
    w, v = np.linalg.eigh(H)
    prop = (v * np.exp(-1j * w * cfg.dt)) @ v.conj().T
    bits = occupation_bits(params.L)
    gdt = cfg.gamma * cfg.dt

    def step_fn(psi, stream):
        psi = prop @ psi
        psi /= np.linalg.norm(psi)
        n = np.abs(psi) ** 2 @ bits
        T = stream.wiener(params.L, gdt) + (2.0 * n - 1.0) * gdt
        return psi * np.exp(bits @ T)

    return _dense_trajectory(params, cfg, noise, subsys, step_fn)


def dense_qj_trajectory(
    params: IsingParams,
    cfg: TrajectoryConfig,
    noise: NoiseStream,
    subsys: SubsystemSpec,
):
    """Click-protocol trajectory on the full Hilbert space.

    Consumes one uniform draw per step and resolves the clicked site with
    the same cumulative rule as the frame stepper, so identical streams give
    identical click records.
    """
    _check_L(params.L, _STOCHASTIC_LMAX)
    if Unraveling(cfg.unraveling) is not Unraveling.QUANTUM_JUMP:
        raise ConfigurationError("dense_qj_trajectory requires a qj config")
    cfg = cfg.resolved(params.L)
    H = build_dense_hamiltonian(params)
    bits = occupation_bits(params.L)
    gamma_eff = cfg.gamma * cfg.alpha * (2.0 + cfg.alpha)
    H_eff = H.astype(complex) - 0.5j * gamma_eff * np.diag(bits.sum(axis=1))
    lam, vec = np.linalg.eig(-1j * cfg.dt * H_eff)
    prop = (vec * np.exp(lam)) @ np.linalg.inv(vec)

    def step_fn(psi, stream):
        n = np.abs(psi) ** 2 @ bits
        pi = cfg.gamma * (1.0 + cfg.alpha * (cfg.alpha + 2.0) * n) * cfg.dt
        if pi.sum() > 1.0:
            raise ConfigurationError(
                f"dt too large for jump discretization: sum of jump probabilities {pi.sum():.4f} > 1"
            )
        r = stream.uniform()
        csum = np.cumsum(pi)
        if r <= csum[-1]:
            site = int(np.searchsorted(csum, r, side="left"))
            return psi * (1.0 + cfg.alpha * bits[:, site])
        return prop @ psi

    return _dense_trajectory(params, cfg, noise, subsys, step_fn)


def dense_nh_trajectory(
    params: IsingParams,
    cfg: TrajectoryConfig,
    subsys: SubsystemSpec,
):
    """Deterministic no-click evolution with explicit renormalization."""
    _check_L(params.L, _STOCHASTIC_LMAX)
    if Unraveling(cfg.unraveling) is not Unraveling.NON_HERMITIAN:
        raise ConfigurationError("dense_nh_trajectory requires an nh config")
    cfg = cfg.resolved(params.L)
    H = build_dense_hamiltonian(params)
    bits = occupation_bits(params.L)
    gamma_eff = cfg.gamma * cfg.alpha * (2.0 + cfg.alpha)
    H_eff = H.astype(complex) - 0.5j * gamma_eff * np.diag(bits.sum(axis=1))
    lam, vec = np.linalg.eig(-1j * cfg.dt * H_eff)
    prop = (vec * np.exp(lam)) @ np.linalg.inv(vec)
    return _dense_trajectory(params, cfg, None, subsys, lambda psi, _: prop @ psi)


def gaussian_ket(Z: np.ndarray) -> np.ndarray:
    """Normalized ket ``exp(1/2 sum Z_jk c+_j c+_k) |0>``.

    The pair-creation operator is nilpotent, so the exponential series
    terminates after L/2 applications.
    """
    L = Z.shape[0]
    _check_L(L, _STOCHASTIC_LMAX)
    if np.abs(Z + Z.T).max() > 1e-10 * max(1.0, np.abs(Z).max()):
        raise ValueError("pairing matrix must be antisymmetric")
    ops = annihilation_operators(L)
    dim = 2**L
    P = np.zeros((dim, dim), dtype=complex)
    for j in range(L):
        for k in range(L):
            if Z[j, k] != 0:
                P += 0.5 * Z[j, k] * (ops[j].T @ ops[k].T)
    ket = vacuum_ket(L)
    term = ket.copy()
    for order in range(1, L // 2 + 1):
        term = P @ term / order
        ket = ket + term
    return ket / np.linalg.norm(ket)


def _rdm_singular_values(ket: np.ndarray, spec: SubsystemSpec) -> np.ndarray:
    L = int(np.log2(ket.size))
    if spec.offset != 0:
        raise ValueError("dense partial trace supports leading contiguous blocks only")
    l = spec.length
    mat = ket.reshape(2 ** (L - l), 2**l)
    return np.linalg.svd(mat, compute_uv=False)


def dense_entropy(ket: np.ndarray, spec: SubsystemSpec) -> float:
    """Von Neumann entropy of the reduced state of the leading block."""
    p = _rdm_singular_values(ket, spec) ** 2
    p = p[p > 1e-16]
    return float(-(xlogy(p, p)).sum())


def dense_renyi2(ket: np.ndarray, spec: SubsystemSpec) -> float:
    """Second Renyi entropy ``-ln tr rho_A^2`` of the leading block."""
    p = _rdm_singular_values(ket, spec) ** 2
    return float(-np.log((p**2).sum()))
