"""
Protocols Package
Verifier-to-verifier constructions
"""

from .common import Construction, DyadicBranchPlan, DyadicWeight, balanced_map, dyadic_floor, product_soundness
from .product_test import build_product_test, eta, product_test_acceptance, product_test_value
from .symmetric import build_sym_projector, build_sym_to_stoq, symmetric_closeness_bound, symmetric_overlap
from .matching import matching_probability, matching_success_rate, perfect_matching
from .symmetrization import SymmetrizationPlan, build_length_efficient_symmetrization, symmetrization_acceptance
from .compression import CompressionParams, build_prover_compression
from .repetition import (
    build_strong_conjunction,
    build_weak_conjunction,
    error_reduction_gap,
    repetition_count,
    weak_repetition_thresholds
)

__all__ = [
    # Building blocks
    'Construction',
    'DyadicBranchPlan',
    'DyadicWeight',
    'balanced_map',
    'dyadic_floor',
    'product_soundness',

    # Constructions
    'build_product_test',
    'build_sym_projector',
    'build_sym_to_stoq',
    'build_length_efficient_symmetrization',
    'build_prover_compression',
    'build_weak_conjunction',
    'build_strong_conjunction',

    # Analytic values
    'product_test_value',
    'product_test_acceptance',
    'eta',
    'symmetric_overlap',
    'symmetric_closeness_bound',
    'symmetrization_acceptance',
    'matching_probability',
    'matching_success_rate',
    'perfect_matching',
    'SymmetrizationPlan',
    'CompressionParams',
    'repetition_count',
    'weak_repetition_thresholds',
    'error_reduction_gap'
]
