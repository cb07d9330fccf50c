"""Stochastic trajectory steppers for the monitored chain.

Three unravelings of the same dephasing master equation are implemented, all
acting on the Bogoliubov frame ``W = [U; V]`` of a Gaussian state:

* ``qsd``  -- continuous monitoring.  Each step applies the Hamiltonian
  propagator, then the stochastic occupation operator
  ``exp(sum_j T_j n_j)`` with ``T_j = dW_j + (2 <n_j> - 1) gamma dt`` and
  ``dW_j ~ N(0, gamma dt)``.  Applying ``exp(x n_j)`` scales row ``j`` of
  ``U`` by ``exp(-x)`` and row ``j`` of ``V`` by ``exp(+x)``.
* ``qj``   -- detector clicks.  With probability ``pi_j = p_j dt`` the jump
  operator ``1 + alpha n_j`` fires on site ``j``; otherwise the frame is
  pushed by the non-Hermitian no-click propagator.
* ``nh``   -- the deterministic no-click (post-selected) limit.

Every non-unitary substep is followed by QR renormalization of the frame.
Noise is drawn from counter-based generators keyed on
``(master seed, stream index)`` so that trajectories are reproducible
independent of scheduling, and so the dense reference evolutions can consume
bit-identical draws.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from numpy.random import Generator, Philox

from .entanglement import SubsystemSpec, square_correlation, state_entropies
from .errors import ConfigurationError, StateCorruptionError
from .gaussian import (
    CorrelationMatrices,
    GaussianState,
    _renormalize_stacked,
    _restore_structure,
    canonical_defect,
)
from .ising import (
    BdgMatrix,
    EffectiveBdgMatrix,
    IsingParams,
    build_bdg,
    build_effective_bdg,
    initial_state,
)

__all__ = [
    "Unraveling",
    "TrajectoryConfig",
    "NoiseStream",
    "EntropyTimeSeries",
    "hamiltonian_step",
    "qsd_step",
    "jump_probabilities",
    "apply_jump",
    "qj_step",
    "nh_step",
    "run_trajectory",
    "run_ensemble",
]

# Canonical-pair drift allowed on periodically checked steps.
STEP_CHECK_ATOL = 1e-9
DEFAULT_QSD_DT = 0.05
DEFAULT_RECORD_INTERVAL = 0.25  # time units between recorded observables


class Unraveling(str, Enum):
    QSD = "qsd"
    QUANTUM_JUMP = "qj"
    NON_HERMITIAN = "nh"


@dataclass(frozen=True)
class TrajectoryConfig:
    """One stochastic realization's contract.

    ``dt=None`` resolves to 0.05 for qsd/nh and to ``1 / (8 L gamma alpha)``
    for quantum jumps (falling back to 0.05 when ``gamma alpha = 0``).
    ``record_every=None`` resolves to one record per ~0.25 time units.
    """

    unraveling: Unraveling
    gamma: float
    t_max: float
    seed: int
    alpha: float | None = None
    dt: float | None = None
    record_every: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "unraveling", Unraveling(self.unraveling))
        if self.gamma < 0:
            raise ConfigurationError(f"gamma must be non-negative, got {self.gamma}")
        if self.t_max < 0:
            raise ConfigurationError(f"t_max must be non-negative, got {self.t_max}")
        if self.dt is not None and self.dt <= 0:
            raise ConfigurationError(f"dt must be positive, got {self.dt}")
        if self.record_every is not None and self.record_every < 1:
            raise ConfigurationError(f"record_every must be >= 1, got {self.record_every}")
        if self.unraveling in (Unraveling.QUANTUM_JUMP, Unraveling.NON_HERMITIAN):
            if self.alpha is None or self.alpha <= 0:
                raise ConfigurationError(
                    f"{self.unraveling.value} requires alpha > 0, got {self.alpha}"
                )

    def resolved(self, L: int) -> "TrajectoryConfig":
        """Fill in dt and record_every defaults for a chain of size L."""
        dt = self.dt
        if dt is None:
            if self.unraveling is Unraveling.QUANTUM_JUMP and self.gamma * (self.alpha or 0) > 0:
                dt = 1.0 / (8.0 * L * self.gamma * self.alpha)
            else:
                dt = DEFAULT_QSD_DT
        stride = self.record_every
        if stride is None:
            stride = max(1, round(DEFAULT_RECORD_INTERVAL / dt))
        return replace(self, dt=dt, record_every=stride)


class NoiseStream:
    """Deterministic per-trajectory noise, split by counter-based keying.

    The generator is keyed on ``(master seed, stream index)``; identical keys
    reproduce identical draw sequences on any machine or schedule.
    """

    def __init__(self, seed: int, index: int = 0):
        self.seed = int(seed)
        self.index = int(index)
        self._gen = Generator(Philox(key=np.array([self.seed, self.index], dtype=np.uint64)))

    def wiener(self, n: int, var: float) -> np.ndarray:
        """n i.i.d. normal increments with zero mean and the given variance."""
        return self._gen.normal(0.0, np.sqrt(var), size=n)

    def uniform(self) -> float:
        return float(self._gen.random())

    @property
    def state(self) -> str:
        """JSON-encoded generator state (the resumable stream counter)."""
        return json.dumps(self._gen.bit_generator.state, default=_json_np)

    @state.setter
    def state(self, encoded: str) -> None:
        raw = json.loads(encoded)
        raw["state"]["counter"] = np.array(raw["state"]["counter"], dtype=np.uint64)
        raw["state"]["key"] = np.array(raw["state"]["key"], dtype=np.uint64)
        if "buffer" in raw:
            raw["buffer"] = np.array(raw["buffer"], dtype=np.uint64)
        self._gen.bit_generator.state = raw


def _json_np(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.integer):
        return int(obj)
    raise TypeError(f"not JSON-serializable: {type(obj)}")


def stream_index(cell_id: int, traj_index: int) -> int:
    """Distinct stream per (sweep cell, trajectory) pair."""
    return (int(cell_id) << 32) | int(traj_index)


def _occ_from_stacked(W: np.ndarray) -> np.ndarray:
    L = W.shape[1]
    g_diag = np.einsum("jk,jk->j", W[:L], W[:L].conj()).real
    return np.clip(1.0 - g_diag, 0.0, 1.0)


def hamiltonian_step(state: GaussianState, H: BdgMatrix, dt: float) -> GaussianState:
    """Exact unitary substep ``W <- exp(-2i H dt) W`` (stays canonical)."""
    return GaussianState.from_stacked(H.propagator(dt) @ state.stacked)


def qsd_step(
    state: GaussianState, H: BdgMatrix, cfg: TrajectoryConfig, noise: NoiseStream
) -> GaussianState:
    """One diffusive monitoring step (Hamiltonian then stochastic part).

    The drift uses the occupations of the post-Hamiltonian state; the
    ordering is validated against the dense shared-noise reference.
    """
    dt = _require_dt(cfg)
    W = H.propagator(dt) @ state.stacked
    L = state.L
    n = _occ_from_stacked(W)
    gdt = cfg.gamma * dt
    T = noise.wiener(L, gdt) + (2.0 * n - 1.0) * gdt
    # exp(sum T_j n_j): damp the empty-mode block, amplify the occupied one.
    W[:L] *= np.exp(-T)[:, None]
    W[L:] *= np.exp(T)[:, None]
    return GaussianState.from_stacked(_renormalize_stacked(W))


def jump_probabilities(state: GaussianState, cfg: TrajectoryConfig) -> np.ndarray:
    """Per-site click probabilities ``pi_j = gamma [1 + alpha(alpha+2) <n_j>] dt``."""
    dt = _require_dt(cfg)
    n = state.occupations_unchecked()
    p = cfg.gamma * (1.0 + cfg.alpha * (cfg.alpha + 2.0) * n)
    pi = p * dt
    total = pi.sum()
    if total > 1.0:
        raise ConfigurationError(
            f"dt too large for jump discretization: sum of jump probabilities {total:.4f} > 1"
        )
    return pi


def apply_jump(state: GaussianState, site: int, alpha: float) -> GaussianState:
    """Click on one site: apply ``1 + alpha n_site = exp(ln(1+alpha) n_site)``.

    The normalization prefactor of the jump operator is absorbed by the QR
    restoration.
    """
    if not 0 <= site < state.L:
        raise ValueError(f"site must be in [0, {state.L}), got {site}")
    x = np.log1p(alpha)
    W = state.stacked.copy()
    W[site] *= np.exp(-x)
    W[site + state.L] *= np.exp(x)
    return GaussianState.from_stacked(_renormalize_stacked(W))


def qj_step(
    state: GaussianState,
    Heff: EffectiveBdgMatrix,
    cfg: TrajectoryConfig,
    noise: NoiseStream,
) -> GaussianState:
    """One jump-protocol step: at most one click, else no-click drift.

    Site selection is cumulative: the smallest j with
    ``sum_{i<=j} pi_i >= r`` clicks.
    """
    pi = jump_probabilities(state, cfg)
    r = noise.uniform()
    csum = np.cumsum(pi)
    if r <= csum[-1]:
        site = int(np.searchsorted(csum, r, side="left"))
        return apply_jump(state, site, cfg.alpha)
    W = Heff.propagator(cfg.dt) @ state.stacked
    return GaussianState.from_stacked(_renormalize_stacked(W))


def nh_step(state: GaussianState, Heff: EffectiveBdgMatrix, dt: float) -> GaussianState:
    """Deterministic no-click substep ``W <- exp(-2i H_eff dt) W`` + QR."""
    W = Heff.propagator(dt) @ state.stacked
    return GaussianState.from_stacked(_renormalize_stacked(W))


def _require_dt(cfg: TrajectoryConfig) -> float:
    if cfg.dt is None:
        raise ConfigurationError("TrajectoryConfig.dt is unset; call cfg.resolved(L) first")
    return cfg.dt


@dataclass
class EntropyTimeSeries:
    """Observables of one trajectory on its recording grid."""

    times: np.ndarray
    entropy: np.ndarray
    renyi2: np.ndarray
    occupations: np.ndarray          # (n_records, L)
    corr: np.ndarray | None          # (n_records, L//2 + 1) site-averaged |<c+ c>|^2
    seed: int
    traj_index: int

    @property
    def n_mean(self) -> np.ndarray:
        return self.occupations.mean(axis=1)


def _record_corr_profile(corr: CorrelationMatrices) -> np.ndarray:
    L = corr.L
    return np.array([square_correlation(corr, r).mean() for r in range(L // 2 + 1)])


def _make_stepper(cfg: TrajectoryConfig, params: IsingParams):
    """Bind the per-unraveling step function with prebuilt matrices."""
    if cfg.unraveling is Unraveling.QSD:
        H = build_bdg(params)
        H.propagator(cfg.dt)
        return lambda state, noise: qsd_step(state, H, cfg, noise)
    if cfg.unraveling is Unraveling.QUANTUM_JUMP:
        Heff = build_effective_bdg(params, cfg.gamma, cfg.alpha)
        Heff.propagator(cfg.dt)
        return lambda state, noise: qj_step(state, Heff, cfg, noise)
    Heff = build_effective_bdg(params, cfg.gamma, cfg.alpha)
    Heff.propagator(cfg.dt)
    return lambda state, noise: nh_step(state, Heff, cfg.dt)


class _Recorder:
    def __init__(self, cfg, subsys, record_corr):
        self.cfg = cfg
        self.subsys = subsys
        self.record_corr = record_corr
        self.times = []
        self.entropy = []
        self.renyi2 = []
        self.occ = []
        self.corr = [] if record_corr else None

    def record(self, step: int, state: GaussianState):
        s, h2 = state_entropies(state, self.subsys)
        self.times.append(step * self.cfg.dt)
        self.entropy.append(s)
        self.renyi2.append(h2)
        self.occ.append(state.occupations_unchecked())
        if self.record_corr:
            U, V = state.U, state.V
            corr = CorrelationMatrices(G=U @ U.conj().T, F=U @ V.conj().T)
            self.corr.append(_record_corr_profile(corr))

    def series(self, seed: int, traj_index: int) -> EntropyTimeSeries:
        return EntropyTimeSeries(
            times=np.array(self.times),
            entropy=np.array(self.entropy),
            renyi2=np.array(self.renyi2),
            occupations=np.array(self.occ),
            corr=np.array(self.corr) if self.corr is not None else None,
            seed=seed,
            traj_index=traj_index,
        )


def record_steps(n_steps: int, stride: int) -> np.ndarray:
    """Recording schedule: every ``stride`` steps plus the final step."""
    steps = list(range(0, n_steps + 1, stride))
    if steps[-1] != n_steps:
        steps.append(n_steps)
    return np.array(steps)


def run_trajectory(
    cfg: TrajectoryConfig,
    params: IsingParams,
    subsys: SubsystemSpec | None = None,
    traj_index: int = 0,
    *,
    cell_id: int = 0,
    record_corr: bool = False,
    check_every: int = 100,
    restructure_every: int = 100,
    checkpoint_path=None,
    checkpoint_every: int | None = None,
    resume_from=None,
) -> EntropyTimeSeries:
    """Evolve one trajectory from the infinite-field ground state (vacuum).

    Observables (subsystem entropy, second Renyi entropy, occupations and
    optionally the distance-resolved squared correlation) are recorded every
    ``record_every`` steps.  Canonical invariants are asserted every
    ``check_every`` steps; every ``restructure_every`` steps the frame's
    Bogoliubov structure is restored exactly, which stops the slow
    random-walk of the antisymmetry constraint over very long runs.  The
    result is a pure function of ``(cfg, params, subsys, traj_index,
    cell_id)``.
    """
    cfg = cfg.resolved(params.L)
    if subsys is None:
        subsys = SubsystemSpec(length=max(1, params.L // 4))
    n_steps = int(round(cfg.t_max / cfg.dt))
    schedule = set(record_steps(n_steps, cfg.record_every).tolist())
    stepper = _make_stepper(cfg, params)

    noise = NoiseStream(cfg.seed, stream_index(cell_id, traj_index))
    state = initial_state(params)
    recorder = _Recorder(cfg, subsys, record_corr)
    start = 0
    if resume_from is not None:
        start, state, recorder = _load_checkpoint(resume_from, cfg, subsys, record_corr, noise)
    if start == 0 and 0 in schedule:
        recorder.record(0, state)

    for step in range(start + 1, n_steps + 1):
        state = stepper(state, noise)
        if restructure_every and step % restructure_every == 0:
            state = GaussianState.from_stacked(_restore_structure(state.stacked))
        if step % check_every == 0:
            defect = max(canonical_defect(state))
            if defect > STEP_CHECK_ATOL:
                raise StateCorruptionError(
                    f"canonical defect {defect:.3e} at step {step} "
                    f"({cfg.unraveling.value}, traj {traj_index})"
                )
        if step in schedule:
            recorder.record(step, state)
        if checkpoint_path is not None and checkpoint_every and step % checkpoint_every == 0:
            _save_checkpoint(checkpoint_path, step, state, noise, recorder)

    return recorder.series(cfg.seed, traj_index)


def _save_checkpoint(path, step, state, noise, recorder):
    np.savez(
        path,
        step=step,
        W=state.stacked,
        rng_state=np.frombuffer(noise.state.encode(), dtype=np.uint8),
        times=np.array(recorder.times),
        entropy=np.array(recorder.entropy),
        renyi2=np.array(recorder.renyi2),
        occ=np.array(recorder.occ),
        corr=np.array(recorder.corr) if recorder.corr is not None else np.zeros(0),
    )


def _load_checkpoint(path, cfg, subsys, record_corr, noise):
    data = np.load(path)
    step = int(data["step"])
    state = GaussianState.from_stacked(data["W"])
    noise.state = data["rng_state"].tobytes().decode()
    recorder = _Recorder(cfg, subsys, record_corr)
    recorder.times = list(data["times"])
    recorder.entropy = list(data["entropy"])
    recorder.renyi2 = list(data["renyi2"])
    recorder.occ = list(data["occ"])
    if record_corr:
        recorder.corr = list(data["corr"])
    return step, state, recorder


def _ensemble_task(args):
    cfg, params, subsys, cell_id, record_corr, indices = args
    return [
        run_trajectory(
            cfg, params, subsys, traj_index=i, cell_id=cell_id, record_corr=record_corr
        )
        for i in indices
    ]


def run_ensemble(
    cfg: TrajectoryConfig,
    params: IsingParams,
    n_traj: int,
    subsys: SubsystemSpec | None = None,
    *,
    cell_id: int = 0,
    record_corr: bool = False,
    workers: int = 1,
) -> list[EntropyTimeSeries]:
    """Independent trajectories 0..n_traj-1, reduced in index order.

    With ``workers > 1`` trajectories are distributed over a process pool;
    results are identical to the serial path because every trajectory owns a
    stream keyed by its index.
    """
    if n_traj < 1:
        raise ConfigurationError(f"n_traj must be >= 1, got {n_traj}")
    cfg = cfg.resolved(params.L)
    indices = list(range(n_traj))
    if workers <= 1 or n_traj == 1:
        return _ensemble_task((cfg, params, subsys, cell_id, record_corr, indices))

    import multiprocessing as mp

    workers = min(workers, n_traj)
    chunks = [indices[i::workers] for i in range(workers)]
    tasks = [(cfg, params, subsys, cell_id, record_corr, chunk) for chunk in chunks]
    ctx = mp.get_context("fork")
    with ctx.Pool(processes=workers) as pool:
        chunk_results = pool.map(_ensemble_task, tasks)
    by_index: dict[int, EntropyTimeSeries] = {}
    for chunk, result in zip(chunks, chunk_results):
        for i, series in zip(chunk, result):
            by_index[i] = series
    return [by_index[i] for i in indices]
