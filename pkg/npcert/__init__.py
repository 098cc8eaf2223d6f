"""
NP Certification Package
Constraint-graph protocols, uniformity testing and birthday-paradox checks
"""

from .instance import BranchDistribution, GapCGInstance, branch_state, honest_witness, load_instance
from .predicates import consistency_predicate, paninski_predicate, paninski_threshold
from .protocol4 import build_protocol4_verifier, protocol4_acceptance
from .protocol5 import (
    build_protocol5_verifier,
    minimize_protocol5_rejection,
    protocol5_rejection,
    protocol5_soundness_floor
)
from .birthday import birthday_exact, birthday_mc
from .sampling import Estimate, wilson_interval

__all__ = [
    # Instances
    'GapCGInstance',
    'BranchDistribution',
    'load_instance',
    'honest_witness',
    'branch_state',

    # Predicates
    'paninski_predicate',
    'paninski_threshold',
    'consistency_predicate',

    # Protocols
    'build_protocol4_verifier',
    'protocol4_acceptance',
    'build_protocol5_verifier',
    'protocol5_rejection',
    'minimize_protocol5_rejection',
    'protocol5_soundness_floor',

    # Statistics
    'birthday_exact',
    'birthday_mc',
    'wilson_interval',
    'Estimate'
]
