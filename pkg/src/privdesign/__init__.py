"""Optimal ε-differentially private publication of a count."""
from .core import (
    BeliefDistribution,
    CapExceededError,
    DatabaseBelief,
    DatabasePrior,
    DecisionProblem,
    EpsilonBudget,
    RankError,
    SignalMatrix,
    StateBelief,
    StatePrior,
    ValidationError,
    project_belief,
    projection_matrix,
    symmetric_prior_from_state_prior,
)
from .decision import full_information_value, interim_value, is_supermodular
from .design import (
    DesignSolution,
    build_signal_matrix,
    exponential_parameterization,
    solve_database,
    solve_oblivious,
    weights_for_support,
)
from .mechanisms import (
    ObliviousMechanism,
    geometric,
    induced_distribution,
    mechanism_value,
    verify_dp,
)
from .orders import frechet_representation, spm_dominates, supermodular_value_dominance, uprr_compare
from .polytope import (
    DatabasePolytope,
    ObliviousPolytope,
    UpperBoundSignature,
    database_membership,
    enumerate_database_vertices,
    enumerate_oblivious_vertices,
    oblivious_membership,
    oblivious_vertex,
    projection_gap,
)

__version__ = "0.1.0"

__all__ = [
    "BeliefDistribution",
    "CapExceededError",
    "DatabaseBelief",
    "DatabasePolytope",
    "DatabasePrior",
    "DecisionProblem",
    "DesignSolution",
    "EpsilonBudget",
    "ObliviousMechanism",
    "ObliviousPolytope",
    "RankError",
    "SignalMatrix",
    "StateBelief",
    "StatePrior",
    "UpperBoundSignature",
    "ValidationError",
    "build_signal_matrix",
    "database_membership",
    "enumerate_database_vertices",
    "enumerate_oblivious_vertices",
    "exponential_parameterization",
    "frechet_representation",
    "full_information_value",
    "geometric",
    "induced_distribution",
    "interim_value",
    "is_supermodular",
    "mechanism_value",
    "oblivious_membership",
    "oblivious_vertex",
    "project_belief",
    "projection_gap",
    "projection_matrix",
    "solve_database",
    "solve_oblivious",
    "spm_dominates",
    "supermodular_value_dominance",
    "symmetric_prior_from_state_prior",
    "uprr_compare",
    "verify_dp",
    "weights_for_support",
]
