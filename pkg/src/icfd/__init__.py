"""Envy-free incomplete connected fair division: approximation scheme, exact oracles, generators."""

from .core import (
    MANDATORY,
    OPTIONAL,
    Allocation,
    Instance,
    InstanceError,
    VerificationReport,
    Violation,
    agent_types,
    bundle_value,
    is_envy_free,
    is_eps_envy_free,
    is_valid,
    validate_instance,
    verify,
)
from .epas import SolveOutcome, lift_allocation, reduce_agents, solve_epas
from .exact import VectorSumInstance, solve_exact, solve_vector_sum
from .motif import ColoredWeightedGraph, GuardExceeded, brute_force_motif, max_colorful_connected
from .numerics import ApproxParams, ceil_log, eps_prime_of, parse_rational

__version__ = "0.1.0"

__all__ = [
    "agent_types",
    "Allocation",
    "ApproxParams",
    "brute_force_motif",
    "bundle_value",
    "ceil_log",
    "ColoredWeightedGraph",
    "eps_prime_of",
    "GuardExceeded",
    "Instance",
    "InstanceError",
    "is_envy_free",
    "is_eps_envy_free",
    "is_valid",
    "lift_allocation",
    "MANDATORY",
    "max_colorful_connected",
    "OPTIONAL",
    "parse_rational",
    "reduce_agents",
    "solve_epas",
    "solve_exact",
    "solve_vector_sum",
    "SolveOutcome",
    "validate_instance",
    "VectorSumInstance",
    "VerificationReport",
    "verify",
    "Violation",
]
