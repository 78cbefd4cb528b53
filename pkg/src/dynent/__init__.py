"""Dynamical entropy and divisibility analysis of a qubit collisionally
coupled to a classical four-symbol Markov chain."""

from .alf import (
    EntropySequence,
    alf_closed_form,
    entropy_sequence,
    finite_size_bound,
    povm_search,
    qr_lower_bound,
    rate_estimate,
)
from .collision import (
    CoarseGrainedDM,
    CollisionModel,
    POVM,
    cgdm_bruteforce,
    cgdm_closed_form,
    closed_form_spectrum,
    heisenberg_word,
    random_povm,
    reduced_dynamics,
    reference_povm,
    tn_channel,
)
from .divisibility import (
    DivisibilityReport,
    NonInvertible,
    block_positivity_min,
    classify,
    extreme_dynamics_check,
    propagator,
    trace_distance_trajectory,
)
from .envchain import (
    MarkovEnv,
    block_entropy,
    block_probability,
    build_env,
    entropy_rate,
    mutual_information,
)
from .linalg import (
    InvariantViolation,
    hermitian_eig,
    kron,
    partial_trace,
    purify,
    trace_norm,
    von_neumann_entropy,
)
from .pauli import PauliMap, eigenvalues_from_weights, pauli_sign, weights_from_eigenvalues

__all__ = [
    "CoarseGrainedDM", "CollisionModel", "DivisibilityReport", "EntropySequence",
    "InvariantViolation", "MarkovEnv", "NonInvertible", "POVM", "PauliMap",
    "alf_closed_form", "block_entropy", "block_positivity_min",
    "block_probability", "build_env", "cgdm_bruteforce", "cgdm_closed_form",
    "classify", "closed_form_spectrum", "eigenvalues_from_weights",
    "entropy_rate", "entropy_sequence", "extreme_dynamics_check",
    "finite_size_bound", "hermitian_eig", "heisenberg_word", "kron",
    "mutual_information", "partial_trace", "pauli_sign", "povm_search",
    "propagator", "purify", "qr_lower_bound", "random_povm", "rate_estimate",
    "reduced_dynamics", "reference_povm", "tn_channel",
    "trace_distance_trajectory", "trace_norm", "von_neumann_entropy",
    "weights_from_eigenvalues",
]

__version__ = "0.1.0"
