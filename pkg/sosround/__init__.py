"""
SOS Rounding Package
Moment oracles and the conditioning-based rounding loop
"""

from .oracle import (
    MomentOracle,
    basis_mixture,
    condition,
    expected_value,
    load_oracle,
    pseudo_expectation,
    random_oracle,
    sphere_residual,
    tensor_value
)
from .rounding import (
    DecrementReport,
    RoundingDiagnostics,
    RoundingResult,
    bks_round_loop,
    chain_rule_terms,
    diagnostics,
    direct_round,
    entropy_decrement_check,
    hellinger_joint_product,
    joint_array,
    joint_law,
    marginal,
    max_rounds
)

__all__ = [
    # Oracles
    'MomentOracle',
    'load_oracle',
    'random_oracle',
    'basis_mixture',
    'pseudo_expectation',
    'sphere_residual',
    'condition',
    'tensor_value',
    'expected_value',

    # Rounding
    'DecrementReport',
    'RoundingDiagnostics',
    'RoundingResult',
    'marginal',
    'joint_law',
    'joint_array',
    'direct_round',
    'hellinger_joint_product',
    'entropy_decrement_check',
    'chain_rule_terms',
    'diagnostics',
    'max_rounds',
    'bks_round_loop'
]
