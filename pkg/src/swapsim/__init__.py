"""Dense-state simulator for the four-particle entanglement-swapping experiment."""
from .analysis import (
    ChshEstimate,
    ChshSettings,
    chsh_estimate,
    chsh_exact,
    chsh_max,
    correlator_exact,
    fidelity_pure,
    hermitian_eigenvalues,
    partial_transpose,
    ppt_check,
)
from .core import (
    BellOutcome,
    DensityMatrix,
    StateError,
    StateVector,
    bell_state,
    density_from_pure,
    joint_state,
    kron,
    partial_trace,
    pauli,
    permute_qubits,
    singlet,
    spin_operator,
    tensor,
)
from .measurement import (
    ImpossibleOutcomeError,
    MeasurementResult,
    RngStream,
    born_probabilities,
    measure,
    measure_bell,
    measure_spin,
    relative_state,
    rng_derive,
)
from .protocol import (
    ExperimentConfig,
    StationDAction,
    TrialRecord,
    conditional_mixture,
    nonsignaling_check,
    post_select,
    run_ensemble,
    run_trial,
)

__version__ = "0.1.0"
