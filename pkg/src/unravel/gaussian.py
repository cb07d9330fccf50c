"""Pure fermionic Gaussian states as Bogoliubov (U, V) frames.

A state on ``L`` modes is stored as the ``2L x L`` stacked frame
``W = [U; V]`` whose columns are the annihilator coefficients:
``gamma_k = sum_j U*_{jk} c_j + V*_{jk} c_j^dagger`` annihilates the state.
A frame is *canonical* when

    U^dag U + V^dag V = I      (normalization)
    U^T V + V^T U = 0          (fermionic antisymmetry)

The antisymmetry constraint is preserved exactly by every operation used in
the dynamics; normalization is restored with a QR factorization whose R
factor is made real-positive on the diagonal (this fixes the gauge and makes
repeated renormalization idempotent).
"""

from __future__ import annotations

import struct

import numpy as np
import scipy.linalg

from .errors import NotGenericGaussianError, SingularFrameError, StateCorruptionError

__all__ = [
    "GaussianState",
    "CorrelationMatrices",
    "canonical_defect",
    "correlations",
    "occupations",
    "pairing_matrix",
    "restore_canonical",
    "random_state",
    "save_state",
    "load_state",
]

# Canonical-pair tolerance for healthy states; correlations() rejects states
# whose defect exceeds the looser corruption threshold.
CANONICAL_ATOL = 1e-10
CORRUPTION_ATOL = 1e-6

_SNAPSHOT_MAGIC = b"GFST"
_SNAPSHOT_VERSION = 1
_SNAPSHOT_HEADER = struct.Struct("<4sIII")  # magic, version, L, reserved


class GaussianState:
    """Value type holding the stacked Bogoliubov frame of a pure state."""

    __slots__ = ("_W",)

    def __init__(self, U, V):
        U = np.ascontiguousarray(U, dtype=complex)
        V = np.ascontiguousarray(V, dtype=complex)
        if U.ndim != 2 or U.shape[0] != U.shape[1] or U.shape != V.shape:
            raise ValueError(f"U and V must be equal square matrices, got {U.shape} and {V.shape}")
        self._W = np.vstack([U, V])

    @classmethod
    def from_stacked(cls, W):
        state = cls.__new__(cls)
        state._W = np.ascontiguousarray(W, dtype=complex)
        return state

    @property
    def L(self) -> int:
        return self._W.shape[1]

    @property
    def U(self) -> np.ndarray:
        return self._W[: self.L]

    @property
    def V(self) -> np.ndarray:
        return self._W[self.L :]

    @property
    def stacked(self) -> np.ndarray:
        return self._W

    def copy(self) -> "GaussianState":
        return GaussianState.from_stacked(self._W.copy())

    def occupations_unchecked(self) -> np.ndarray:
        """Site occupations ``1 - (U U^dag)_jj`` without canonical checks.

        Meant for hot loops where the frame is renormalized every step;
        use :func:`occupations` anywhere correctness matters more than speed.
        """
        g_diag = np.einsum("jk,jk->j", self.U, self.U.conj()).real
        return np.clip(1.0 - g_diag, 0.0, 1.0)

    def __repr__(self):
        return f"GaussianState(L={self.L})"


class CorrelationMatrices:
    """Two-point functions ``G_{jj'} = <c_j c^dag_j'>`` and ``F_{jj'} = <c_j c_j'>``."""

    __slots__ = ("G", "F")

    def __init__(self, G, F):
        self.G = G
        self.F = F

    @property
    def L(self) -> int:
        return self.G.shape[0]


def canonical_defect(state: GaussianState) -> tuple[float, float]:
    """Max-norm violations of (normalization, antisymmetry)."""
    U, V = state.U, state.V
    norm = U.conj().T @ U + V.conj().T @ V - np.eye(state.L)
    antisym = U.T @ V + V.T @ U
    return float(np.abs(norm).max()), float(np.abs(antisym).max())


def correlations(state: GaussianState) -> CorrelationMatrices:
    """Correlation matrices of a canonical state.

    ``G = U U^dag`` and ``F = U V^dag`` follow from projecting onto the
    annihilator modes of the frame; both are validated against the dense
    oracle in the test suite.
    """
    norm_defect, antisym_defect = canonical_defect(state)
    if norm_defect > CORRUPTION_ATOL or antisym_defect > CORRUPTION_ATOL:
        raise StateCorruptionError(
            f"state is not canonical: normalization defect {norm_defect:.3e}, "
            f"antisymmetry defect {antisym_defect:.3e}"
        )
    U, V = state.U, state.V
    return CorrelationMatrices(G=U @ U.conj().T, F=U @ V.conj().T)


def occupations(state: GaussianState) -> np.ndarray:
    """Site occupations ``<n_j> = 1 - G_jj``, clipped to [0, 1].

    Values outside ``[-1e-10, 1 + 1e-10]`` before clipping signal a corrupted
    state and raise.
    """
    corr = correlations(state)
    n = 1.0 - np.diag(corr.G).real
    if np.any(n < -1e-10) or np.any(n > 1.0 + 1e-10):
        raise StateCorruptionError(
            f"occupations out of range: min {n.min():.3e}, max {n.max():.3e}"
        )
    return np.clip(n, 0.0, 1.0)


def pairing_matrix(state: GaussianState) -> np.ndarray:
    """Antisymmetric pairing form ``Z = -(U^dag)^{-1} V^dag``.

    Diagnostic quantity: it exists only while ``U`` is invertible (a mode
    that is exactly filled makes the Gaussian-exponential form singular).
    """
    U, V = state.U, state.V
    sv = np.linalg.svd(U, compute_uv=False)
    if sv[-1] <= 1e-12 * max(sv[0], 1.0):
        raise NotGenericGaussianError("state not in generic Gaussian form")
    Z = -np.linalg.solve(U.conj().T, V.conj().T)
    defect = np.abs(Z + Z.T).max()
    if defect > 1e-8 * max(1.0, np.abs(Z).max()):
        raise StateCorruptionError(f"pairing matrix not antisymmetric: defect {defect:.3e}")
    return 0.5 * (Z - Z.T)


def _renormalize_stacked(W: np.ndarray) -> np.ndarray:
    """QR-renormalize a stacked frame, R diagonal made real-positive.

    Fast path is Cholesky-QR (identical factorization, since QR with a
    positive diagonal R is unique); falls back to Householder QR when the
    Gram matrix is numerically indefinite.
    """
    gram = W.conj().T @ W
    try:
        R = np.linalg.cholesky(gram).conj().T
        if np.diag(R).real.min() <= 1e-12 * np.diag(R).real.max():
            raise np.linalg.LinAlgError
        return scipy.linalg.solve_triangular(
            R.T, W.T, lower=True, check_finite=False
        ).T
    except np.linalg.LinAlgError:
        Q, R = scipy.linalg.qr(W, mode="economic", check_finite=False)
        diag = np.diag(R)
        scale = np.abs(diag).max() if diag.size else 0.0
        if scale == 0.0 or np.abs(diag).min() <= 1e-12 * scale:
            raise SingularFrameError("trajectory collapsed to singular frame") from None
        phases = diag / np.abs(diag)
        return Q * phases.conj()


def restore_canonical(state: GaussianState) -> GaussianState:
    """Return the canonical frame spanning the same state.

    Right-multiplication by ``R^{-1}`` mixes annihilators among themselves,
    so the physical state is untouched; only normalization changes.
    """
    return GaussianState.from_stacked(_renormalize_stacked(state.stacked))


def _restore_structure(W: np.ndarray) -> np.ndarray:
    """Project a frame back onto the exact Bogoliubov structure.

    QR renormalization keeps the frame orthonormal but lets round-off in the
    antisymmetry constraint ``U^T V + V^T U = 0`` random-walk over long
    runs.  Rebuilding the full ``[[U, V*], [V, U*]]`` matrix, taking its
    polar (nearest-unitary) factor and re-averaging the redundant blocks
    restores both constraints to machine precision while moving the state
    only by the size of the defect.
    """
    L = W.shape[1]
    U, V = W[:L], W[L:]
    full = np.block([[U, V.conj()], [V, U.conj()]])
    gram = full.conj().T @ full
    w, vec = np.linalg.eigh(gram)
    if w[0] <= 1e-24 * w[-1]:
        raise SingularFrameError("trajectory collapsed to singular frame")
    inv_sqrt = (vec / np.sqrt(w)) @ vec.conj().T
    polar = full @ inv_sqrt
    U1 = 0.5 * (polar[:L, :L] + polar[L:, L:].conj())
    V1 = 0.5 * (polar[L:, :L] + polar[:L, L:].conj())
    return _renormalize_stacked(np.vstack([U1, V1]))


def random_state(L: int, rng: np.random.Generator, scale: float = 1.0) -> GaussianState:
    """Random canonical Gaussian state with pairing form of the given scale.

    Built from a random antisymmetric ``Z``: the frame ``(I, conj(Z))`` has
    annihilators ``c_j - sum_k Z_jk c^dag_k`` and is renormalized into
    canonical form.  ``pairing_matrix`` of the result reproduces ``Z``.
    """
    M = rng.normal(size=(L, L)) + 1j * rng.normal(size=(L, L))
    Z = scale * (M - M.T) / 2.0
    return restore_canonical(GaussianState(np.eye(L, dtype=complex), Z.conj()))


def save_state(state: GaussianState, path) -> None:
    """Binary snapshot: 16-byte header (magic, version, L) + row-major U, V."""
    with open(path, "wb") as fh:
        fh.write(_SNAPSHOT_HEADER.pack(_SNAPSHOT_MAGIC, _SNAPSHOT_VERSION, state.L, 0))
        fh.write(np.ascontiguousarray(state.U, dtype=np.complex128).tobytes())
        fh.write(np.ascontiguousarray(state.V, dtype=np.complex128).tobytes())


def load_state(path) -> GaussianState:
    with open(path, "rb") as fh:
        header = fh.read(_SNAPSHOT_HEADER.size)
        magic, version, L, _ = _SNAPSHOT_HEADER.unpack(header)
        if magic != _SNAPSHOT_MAGIC:
            raise ValueError(f"not a Gaussian-state snapshot: bad magic {magic!r}")
        if version != _SNAPSHOT_VERSION:
            raise ValueError(f"unsupported snapshot version {version}")
        count = L * L
        U = np.frombuffer(fh.read(16 * count), dtype=np.complex128).reshape(L, L)
        V = np.frombuffer(fh.read(16 * count), dtype=np.complex128).reshape(L, L)
    return GaussianState(U, V)
