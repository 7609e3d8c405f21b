"""Exact and variational calculations for two-party Bell scenarios.

Tensors of coefficients or probabilities are indexed [x][y][a][b]
(inputs first, outputs second).  The package computes exact classical
quantities by strategy enumeration, lower-bounds quantum values by
alternating optimization, and answers behavior-level questions
(membership in the local polytope, maximal violation, noise
robustness, communication bounds) by linear programming.
"""

from .classical import (
    MembershipCertificate,
    banach_norm,
    classical_value,
    classical_value_incomplete,
    is_local,
    signed_extrema,
)
from .core import (
    Behavior,
    BellFunctional,
    COMPLETE,
    DeterministicStrategy,
    INCOMPLETE,
    InvariantViolation,
    LocalModel,
    NoSignalingResult,
    QuantumModel,
    Scenario,
    behavior_from_local,
    behavior_from_quantum,
    hermitian_part,
    no_signaling_check,
    pair,
    validate,
)
from .errors import (
    BellError,
    DocumentError,
    GuardExceededError,
    ScenarioMismatchError,
    SignalingBehaviorError,
    UndefinedQuantityError,
    ValidationError,
)
from .generators import (
    chsh_functional,
    game_functional,
    magic_square_functional,
    random_correlation_functional,
    random_functional,
)
from .numerics import (
    EigenDecomposition,
    LinearProgram,
    LpSolution,
    PovmUpdateResult,
    eigh,
    lp_solve,
    povm_update,
    psd_project,
)
from .seesaw import (
    SeesawConfig,
    SeesawResult,
    bell_operator,
    pad_quantum_model,
    quantum_ratio,
    reduced_operators,
    seesaw,
)
from .violation import (
    DimensionEntry,
    DimensionWitnessReport,
    ViolationReport,
    check_noise_identity,
    comm_lower_bound,
    complete_behavior,
    complete_quantum_model,
    dimension_witness_report,
    eq4_gap,
    max_violation,
    noise_robustness,
    violation_report,
)

__all__ = [
    "Behavior",
    "BellError",
    "BellFunctional",
    "COMPLETE",
    "DeterministicStrategy",
    "DimensionEntry",
    "DimensionWitnessReport",
    "DocumentError",
    "EigenDecomposition",
    "GuardExceededError",
    "INCOMPLETE",
    "InvariantViolation",
    "LinearProgram",
    "LocalModel",
    "LpSolution",
    "MembershipCertificate",
    "NoSignalingResult",
    "PovmUpdateResult",
    "QuantumModel",
    "Scenario",
    "ScenarioMismatchError",
    "SeesawConfig",
    "SeesawResult",
    "SignalingBehaviorError",
    "UndefinedQuantityError",
    "ValidationError",
    "ViolationReport",
    "banach_norm",
    "behavior_from_local",
    "behavior_from_quantum",
    "bell_operator",
    "check_noise_identity",
    "chsh_functional",
    "classical_value",
    "classical_value_incomplete",
    "comm_lower_bound",
    "complete_behavior",
    "complete_quantum_model",
    "dimension_witness_report",
    "eigh",
    "eq4_gap",
    "game_functional",
    "hermitian_part",
    "is_local",
    "lp_solve",
    "magic_square_functional",
    "max_violation",
    "no_signaling_check",
    "noise_robustness",
    "pad_quantum_model",
    "pair",
    "povm_update",
    "psd_project",
    "quantum_ratio",
    "random_correlation_functional",
    "random_functional",
    "reduced_operators",
    "seesaw",
    "signed_extrema",
    "validate",
    "violation_report",
]
