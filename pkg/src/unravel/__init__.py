"""Quantum-trajectory simulator for the monitored transverse-field Ising chain.

Gaussian fermionic states are evolved under two unravelings of the same
dephasing master equation (diffusive monitoring and detector clicks) plus the
deterministic no-click limit; subsystem entropies, Renyi entropies and
correlation profiles are extracted from trajectory ensembles, together with
scaling fits locating the crossover between subextensive and area-law
entanglement.
"""

__version__ = "0.1.0"

from .analysis import (
    AsymptoticEstimate,
    CrossoverEstimate,
    EnsembleStats,
    TanhFit,
    asymptotic_correlation,
    crossover_field,
    ensemble_average,
    fit_tanh_log,
    loglinear_slope,
    single_trajectory_stats,
    time_average,
)
from .entanglement import (
    MajoranaSpectrum,
    SubsystemSpec,
    entanglement_entropy,
    majorana_correlation,
    majorana_covariance,
    renyi_entropy,
    square_correlation,
    state_entropies,
    subsystem_spectrum,
)
from .errors import (
    ConfigurationError,
    MissingColumnError,
    NotGenericGaussianError,
    SingularFrameError,
    StateCorruptionError,
    UnravelError,
)
from .gaussian import (
    CorrelationMatrices,
    GaussianState,
    canonical_defect,
    correlations,
    load_state,
    occupations,
    pairing_matrix,
    random_state,
    restore_canonical,
    save_state,
)
from .ising import (
    BdgMatrix,
    EffectiveBdgMatrix,
    IsingParams,
    build_bdg,
    build_effective_bdg,
    dispersion,
    ground_state,
    initial_state,
    momentum_grid,
    nh_dispersion,
)
from .trajectories import (
    EntropyTimeSeries,
    NoiseStream,
    TrajectoryConfig,
    Unraveling,
    apply_jump,
    hamiltonian_step,
    jump_probabilities,
    nh_step,
    qj_step,
    qsd_step,
    run_ensemble,
    run_trajectory,
)
