"""Transverse-field Ising chain in fermionic (Bogoliubov-de Gennes) form.

The chain of ``L`` spins with coupling ``J`` and transverse field ``h`` maps
to a quadratic fermion Hamiltonian with antiperiodic boundary conditions in
the even-parity sector.  Everything here is built in that sector: the
single-particle content is a ``2L x 2L`` matrix

    H = [[ A,  B],
         [-B, -A]],

with ``A`` real symmetric and ``B`` real antisymmetric, normalized so that
the time evolution of a Bogoliubov frame ``[U; V]`` is generated by ``2H``
(propagator ``exp(-2i H dt)``).  Consequently the eigenvalues of ``2H`` come
in pairs ``+/- w(k)`` with ``w`` the quasiparticle dispersion on the
antiperiodic momentum grid ``k = pi (2n - 1) / L``.

Coupling the chain to local occupation measurements of strength ``gamma``
(jump operators ``1 + alpha n_j``) adds an imaginary part to the diagonal of
``A``; the resulting non-Hermitian matrix drives the deterministic no-click
evolution.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import ConfigurationError

__all__ = [
    "IsingParams",
    "BdgMatrix",
    "EffectiveBdgMatrix",
    "build_bdg",
    "build_effective_bdg",
    "dispersion",
    "nh_dispersion",
    "momentum_grid",
    "initial_state",
    "ground_state",
]

# Eigenvector-matrix condition number above which the eigendecomposition
# route for the non-Hermitian exponential is abandoned for Pade
# scaling-and-squaring.
_EXPM_COND_LIMIT = 1e8


@dataclass(frozen=True)
class IsingParams:
    """Couplings of the chain.  Only the even-parity sector is supported."""

    L: int
    h: float
    J: float = 1.0
    parity: str = "even"

    def __post_init__(self):
        if self.L < 2 or self.L % 2 != 0:
            raise ConfigurationError(f"L must be an even integer >= 2, got {self.L}")
        if self.J <= 0:
            raise ConfigurationError(f"J must be positive, got {self.J}")
        if self.parity != "even":
            raise ConfigurationError(f"only the even parity sector is supported, got {self.parity!r}")


def momentum_grid(L: int) -> np.ndarray:
    """Antiperiodic (even-sector) momenta ``k_n = pi (2n - 1) / L, n = 1..L``."""
    n = np.arange(1, L + 1)
    return np.pi * (2 * n - 1) / L


def dispersion(params: IsingParams, k) -> np.ndarray:
    """Quasiparticle energy ``2J sqrt(1 + (h/J)^2 - 2 (h/J) cos k)``."""
    x = params.h / params.J
    return 2.0 * params.J * np.sqrt(1.0 + x * x - 2.0 * x * np.cos(k))


def nh_dispersion(gamma: float, k, J: float = 1.0) -> np.ndarray:
    """Complex dispersion of the no-click chain at zero field.

    Principal-branch square root of the analytic continuation of the
    dispersion to an imaginary transverse field ``i gamma / 4``.  The real
    gap closes at ``gamma = 4 J``, ``k = pi/2``.
    """
    if gamma < 0:
        raise ConfigurationError(f"gamma must be non-negative, got {gamma}")
    # cos evaluated as sin(pi/2 - k): equally accurate everywhere, and exact
    # at the gap-closing momentum k = pi/2 (the square root would otherwise
    # amplify the ~1e-16 cosine residue to ~1e-8 in the real part).
    cos_k = np.sin(np.pi / 2.0 - np.asarray(k, dtype=float))
    radicand = (1.0 - gamma**2 / (16.0 * J * J)) - 1j * (gamma / (2.0 * J)) * cos_k
    out = 2.0 * J * np.sqrt(np.asarray(radicand, dtype=complex))
    return out[()] if out.ndim == 0 else out


class _PropagatorCache:
    """Per-matrix cache of ``exp(-2i H dt)`` keyed by the time step."""

    def __init__(self):
        self._cache = {}

    def get(self, dt, builder):
        key = float(dt)
        prop = self._cache.get(key)
        if prop is None:
            prop = builder(key)
            self._cache[key] = prop
        return prop


@dataclass(frozen=True)
class BdgMatrix:
    """Hermitian single-particle matrix of the closed chain."""

    A: np.ndarray
    B: np.ndarray
    matrix: np.ndarray
    _props: _PropagatorCache = field(default_factory=_PropagatorCache, repr=False, compare=False)

    @property
    def L(self) -> int:
        return self.A.shape[0]

    def propagator(self, dt: float) -> np.ndarray:
        """Unitary frame propagator ``exp(-2i H dt)``, cached per ``dt``."""
        return self._props.get(dt, self._build)

    def _build(self, dt):
        w, phi = np.linalg.eigh(self.matrix)
        return (phi * np.exp(-2j * w * dt)) @ phi.conj().T


@dataclass(frozen=True)
class EffectiveBdgMatrix:
    """Non-Hermitian single-particle matrix of the no-click evolution."""

    matrix: np.ndarray
    gamma_eff: float
    _props: _PropagatorCache = field(default_factory=_PropagatorCache, repr=False, compare=False)

    @property
    def L(self) -> int:
        return self.matrix.shape[0] // 2

    def propagator(self, dt: float) -> np.ndarray:
        """Frame propagator ``exp(-2i H_eff dt)``, cached per ``dt``.

        Diagonalization is used when the eigenvector matrix is well
        conditioned; otherwise falls back to scaling-and-squaring.
        """
        return self._props.get(dt, self._build)

    def _build(self, dt):
        generator = -2j * dt * self.matrix
        lam, vec = np.linalg.eig(generator)
        cond = np.linalg.cond(vec)
        if np.isfinite(cond) and cond < _EXPM_COND_LIMIT:
            return (vec * np.exp(lam)) @ np.linalg.inv(vec)
        prop = scipy.linalg.expm(generator)
        if not np.all(np.isfinite(prop)):
            raise ArithmeticError(
                f"matrix exponential failed; eigenvector condition estimate {cond:.3e}"
            )
        return prop


def _bdg_blocks(params: IsingParams):
    """Assemble the A (hopping) and B (pairing) blocks, bond by bond.

    Bulk bonds carry -J/2; the boundary bond carries +J/2 because the even
    fermion-parity sector imposes antiperiodic boundary conditions.  Bond
    contributions add, which makes L = 2 (where the bulk and boundary bonds
    coincide) come out right.
    """
    L, J, h = params.L, params.J, params.h
    A = np.zeros((L, L))
    B = np.zeros((L, L))
    np.fill_diagonal(A, h)
    for j in range(L - 1):
        A[j, j + 1] += -J / 2
        A[j + 1, j] += -J / 2
        B[j, j + 1] += -J / 2
        B[j + 1, j] += +J / 2
    A[L - 1, 0] += +J / 2
    A[0, L - 1] += +J / 2
    B[L - 1, 0] += +J / 2
    B[0, L - 1] += -J / 2
    return A, B


def _assemble(A, B):
    top = np.hstack([A, B])
    bottom = np.hstack([-B, -A])
    return np.vstack([top, bottom])


def build_bdg(params: IsingParams) -> BdgMatrix:
    """Single-particle matrix of the chain in the even-parity sector."""
    A, B = _bdg_blocks(params)
    return BdgMatrix(A=A, B=B, matrix=_assemble(A, B))


def build_effective_bdg(params: IsingParams, gamma: float, alpha: float) -> EffectiveBdgMatrix:
    """Non-Hermitian matrix driving the no-click (jump-free) evolution.

    The measurement term shifts the diagonal of ``A`` by
    ``i gamma alpha (2 + alpha) / 4``; the occupation-independent part of the
    jump operators only rescales the norm and is dropped (renormalization
    removes it anyway).  At ``gamma = 0`` this returns the closed-chain
    matrix bit-exactly (up to complex dtype).
    """
    if gamma < 0:
        raise ConfigurationError(f"gamma must be non-negative, got {gamma}")
    if alpha <= 0:
        raise ConfigurationError(f"alpha must be positive, got {alpha}")
    A, B = _bdg_blocks(params)
    gamma_eff = gamma * alpha * (2.0 + alpha)
    A_eff = A.astype(complex)
    A_eff[np.diag_indices_from(A_eff)] += 1j * gamma_eff / 4.0
    top = np.hstack([A_eff, B.astype(complex)])
    bottom = np.hstack([-B.astype(complex), -A_eff])
    return EffectiveBdgMatrix(matrix=np.vstack([top, bottom]), gamma_eff=gamma_eff)


def initial_state(params: IsingParams):
    """Fermionic vacuum, i.e. the ground state at infinite transverse field.

    With ``sigma^z_j = 1 - 2 n_j`` the large-field ground state has every
    mode empty, so the Bogoliubov frame is exactly ``U = I, V = 0``.
    """
    from .gaussian import GaussianState

    eye = np.eye(params.L, dtype=complex)
    return GaussianState(eye, np.zeros_like(eye))


def ground_state(params: IsingParams):
    """Bogoliubov vacuum of the chain at the given field.

    The annihilator frame is spanned by the positive-energy eigenvectors of
    the single-particle matrix; orthonormality of the eigenbasis makes the
    frame canonical by construction.
    """
    from .gaussian import GaussianState

    H = build_bdg(params)
    w, phi = np.linalg.eigh(H.matrix)
    plus = phi[:, w > 0]
    if plus.shape[1] != params.L:
        raise ArithmeticError("zero mode encountered; the even-sector spectrum should be gapped")
    return GaussianState(plus[: params.L].copy(), plus[params.L :].copy())
